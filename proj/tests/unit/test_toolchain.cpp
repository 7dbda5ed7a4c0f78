#include <signal.h>

#include <chrono>
#include <fstream>

#include "dceval/toolchain.hpp"
#include "doctest.h"
#include "harness.hpp"

using namespace dceval::toolchain;
using dceval::testing::cli_path;
using dceval::testing::fixtures_root;
using dceval::testing::TempDir;

namespace {

ProcessResult sh(const std::string& script, Millis timeout = Millis(10000)) {
  return run_process({{"/bin/sh", "-c", script}, {}, {}, timeout});
}

// Live (non-zombie) processes whose process group is `pgid`.
std::vector<int> group_members(int pgid) {
  std::vector<int> out;
  for (const auto& e : std::filesystem::directory_iterator("/proc")) {
    std::string name = e.path().filename().string();
    if (name.find_first_not_of("0123456789") != std::string::npos) continue;
    std::ifstream in(e.path() / "stat");
    std::string stat;
    std::getline(in, stat);
    auto close = stat.rfind(')');
    if (close == std::string::npos) continue;
    std::istringstream fields(stat.substr(close + 2));
    std::string state;
    int ppid = 0, pgrp = 0;
    fields >> state >> ppid >> pgrp;
    if (pgrp == pgid && state != "Z") out.push_back(std::stoi(name));
  }
  return out;
}

}  // namespace

TEST_CASE("split_command honours quotes") {
  CHECK(split_command("a  b\t'c d' \"e f\"") == std::vector<std::string>{"a", "b", "c d", "e f"});
  CHECK(split_command("x'y z'w") == std::vector<std::string>{"xy zw"});
  CHECK(split_command("").empty());
}

TEST_CASE("placeholders expand whole and embedded") {
  Substitutions subs{{"A.class", "B.class"}, "/out dir", {"/cp one", "/cp2"}, {"t1", "t2"}, "/bin/self", "/proj"};
  auto argv = expand({"{self}", "-d", "{output}", "-cp", "{classpath}", "--in={input}", "{input}", "{filter}",
                      "--root={project_root}", "--cp={classpath}", "--tests={filter}"},
                     subs);
  CHECK(argv == std::vector<std::string>{"/bin/self", "-d", "/out dir", "-cp", "/cp one:/cp2", "--in=A.class,B.class",
                                         "A.class", "B.class", "t1", "t2", "--root=/proj", "--cp=/cp one:/cp2",
                                         "--tests=t1,t2"});
  Substitutions empty;
  CHECK(expand({"-cp", "{classpath}"}, empty) == std::vector<std::string>{"-cp", ""});
}

TEST_CASE("ToolSpec JSON round trip and validation") {
  auto j = nlohmann::json::parse(R"({"id": "cfr", "kind": "decompiler",
      "command": "java -jar 'cfr dir/cfr.jar' {input} --outputdir {output}", "timeout_ms": 1500,
      "environment": {"LANG": "C"}})");
  auto spec = j.get<ToolSpec>();
  CHECK(spec.command == std::vector<std::string>{"java", "-jar", "cfr dir/cfr.jar", "{input}", "--outputdir", "{output}"});
  CHECK(spec.effective_timeout() == Millis(1500));
  CHECK(nlohmann::json(spec).get<ToolSpec>() == spec);
  ToolSpec defaults{"t", ToolKind::TestRunner, {"run", "{filter}"}, std::nullopt, {}, Millis(0), {}};
  CHECK(defaults.effective_timeout() == kDefaultTestTimeout);
  ToolSpec bad = spec;
  bad.command.clear();
  CHECK_THROWS_AS(validate(bad, "tools[3]"), ConfigError);
  try {
    validate(bad, "tools[3]");
  } catch (const ConfigError& e) {
    CHECK(e.field() == "tools[3].command");
  }
  bad = spec;
  bad.command = {"cat", "{inputs}"};
  CHECK_THROWS_AS(validate(bad), ConfigError);
  CHECK_THROWS_AS(nlohmann::json::parse(R"({"id":"x","kind":"linker","command":"ld"})").get<ToolSpec>(),
                  std::invalid_argument);
}

TEST_CASE("arguments with spaces reach the child unchanged") {
  auto r = run_process({{"/bin/sh", "-c", "printf '%s|' \"$@\"", "sh", "a b", " c ", "", "d'e\"f"}, {}, {}, Millis(5000)});
  REQUIRE(r.status == ToolStatus::Ok);
  CHECK(r.stdout_text == "a b| c ||d'e\"f|");
}

TEST_CASE("exit codes, stderr, workdir and environment") {
  auto r = sh("echo out; echo err >&2; exit 7");
  CHECK(r.status == ToolStatus::NonZeroExit);
  CHECK(r.exit_code == 7);
  CHECK(r.stdout_text == "out\n");
  CHECK(r.stderr_text == "err\n");
  TempDir dir;
  auto pwd = run_process({{"pwd"}, dir.path(), {{"DCEVAL_PROBE", "x y"}}, Millis(5000)});
  CHECK(pwd.stdout_text == std::filesystem::canonical(dir.path()).string() + "\n");
  auto env = run_process({{"/bin/sh", "-c", "echo \"$DCEVAL_PROBE\""}, {}, {{"DCEVAL_PROBE", "x y"}}, Millis(5000)});
  CHECK(env.stdout_text == "x y\n");
  auto killed = sh("kill -TERM $$");
  CHECK(killed.status == ToolStatus::NonZeroExit);
  CHECK(killed.exit_code == -SIGTERM);
}

TEST_CASE("spawn failures are reported, not thrown") {
  auto r = run_process({{"/nonexistent/tool"}, {}, {}, Millis(5000)});
  CHECK(r.status == ToolStatus::SpawnFailure);
  CHECK_FALSE(r.spawn_error.empty());
  auto bad_dir = run_process({{"true"}, "/nonexistent/dir", {}, Millis(5000)});
  CHECK(bad_dir.status == ToolStatus::SpawnFailure);
  CHECK(run_process({}).status == ToolStatus::SpawnFailure);
}

TEST_CASE("timeout kills the whole process group promptly") {
  auto start = std::chrono::steady_clock::now();
  auto r = sh("sleep 60 & sleep 60 & (sleep 60 &) ; sleep 60", Millis(300));
  auto elapsed = std::chrono::steady_clock::now() - start;
  CHECK(r.status == ToolStatus::Timeout);
  CHECK(elapsed < std::chrono::seconds(5) + Millis(300));
  CHECK(group_members(r.process_group).empty());
}

TEST_CASE("background children do not outlive a normal exit") {
  auto r = sh("sleep 60 >/dev/null 2>&1 & echo started");
  CHECK(r.status == ToolStatus::Ok);
  CHECK(r.stdout_text == "started\n");
  CHECK(group_members(r.process_group).empty());
}

TEST_CASE("the stub test runner's forked child is cleaned up") {
  TempDir dir;
  auto r = run_process({{cli_path(), "stub", "testrunner", "--project", (fixtures_root() / "foo").string(),
                         "--spawn-child", "dctest.FooTest#testBar"},
                        dir.path(),
                        {},
                        Millis(10000)});
  CHECK(r.status == ToolStatus::Ok);
  CHECK(r.stdout_text == "PASS dctest.FooTest#testBar\n");
  CHECK(group_members(r.process_group).empty());
}

TEST_CASE("output capture is capped") {
  auto r = sh("head -c 3000000 /dev/zero; echo done >&2");
  CHECK(r.status == ToolStatus::Ok);
  CHECK(r.stdout_text.size() == kCaptureLimit);
  CHECK(r.stdout_truncated);
  CHECK_FALSE(r.stderr_truncated);
  CHECK(r.stderr_text == "done\n");
}

TEST_CASE("list_files is relative and sorted") {
  auto files = list_files(fixtures_root() / "inner" / "classes-javac", ".class");
  REQUIRE(files.size() >= 2);
  CHECK(std::is_sorted(files.begin(), files.end()));
  for (const auto& f : files) CHECK(std::filesystem::path(f).is_relative());
  CHECK(list_files("/nonexistent", ".class").empty());
}

TEST_CASE("compile and decompile through stub tools") {
  TempDir dir;
  auto root = fixtures_root() / "foo";
  InvocationContext ctx{cli_path(), root.string(), dir / "scratch"};
  ToolSpec javac{"javac", ToolKind::Compiler,
                 split_command("{self} stub compile-copy --project {project_root} --flavor javac --classpath "
                               "{classpath} --out {output} {input}"),
                 std::nullopt, {}, Millis(0), {}};
  auto compiled = compile({root / "src/dctest/Foo.java"}, {}, javac, dir / "classes", ctx);
  REQUIRE(compiled.ok());
  CHECK(compiled.produced_files == std::vector<std::string>{"dctest/Foo.class"});
  CHECK(dceval::testing::read_text(dir / "classes/dctest/Foo.class") ==
        dceval::testing::read_text(root / "classes-javac/dctest/Foo.class"));

  ToolSpec ident{"identity", ToolKind::Decompiler,
                 split_command("{self} stub decomp-identity --project {project_root} --out {output} {input}"),
                 std::nullopt, {}, Millis(0), {}};
  auto decompiled = decompile({dir / "classes/dctest/Foo.class"}, ident, dir / "dec", ctx);
  REQUIRE(decompiled.ok());
  CHECK(decompiled.produced_files == std::vector<std::string>{"dctest/Foo.java"});

  ToolSpec crash = ident;
  crash.command = split_command("{self} stub decomp-crash --project {project_root} --out {output} {input}");
  auto crashed = decompile({dir / "classes/dctest/Foo.class"}, crash, dir / "crash", ctx);
  CHECK(crashed.status == ToolStatus::NonZeroExit);
  CHECK(crashed.produced_files.empty());
}

TEST_CASE("run_tests maps runner output to a verdict") {
  TempDir dir;
  auto root = fixtures_root() / "foo";
  InvocationContext ctx{cli_path(), root.string(), dir.path()};
  ToolSpec runner{"tests", ToolKind::TestRunner,
                  split_command("{self} stub testrunner --project {project_root} --classpath {classpath} {filter}"),
                  std::nullopt, {}, Millis(0), {}};
  std::vector<std::string> all = {"dctest.FooTest#testFoo", "dctest.FooTest#testBar", "dctest.FooTest#testCount"};
  auto pass = run_tests(all, {root / "classes-javac"}, runner, Millis(10000), ctx);
  CHECK(pass.verdict.verdict == Verdict::Passed);
  CHECK(pass.verdict.failing.empty());

  auto start = std::chrono::steady_clock::now();
  auto hang = run_tests(all, {root / "variants/mutant/classes-javac", root / "classes-javac"}, runner, Millis(500), ctx);
  CHECK(hang.verdict.verdict == Verdict::Timeout);
  CHECK(std::chrono::steady_clock::now() - start < std::chrono::seconds(6));

  auto bukkit = fixtures_root() / "singleton";
  InvocationContext bctx{cli_path(), bukkit.string(), dir.path()};
  auto fail = run_tests({"org.bukkit.BukkitTest#testSetServer", "org.bukkit.BukkitTest#testCannotRedefine"},
                        {bukkit / "variants/mutant/classes-javac", bukkit / "lib"}, runner, Millis(10000), bctx);
  CHECK(fail.verdict.verdict == Verdict::Failed);
  CHECK_FALSE(fail.verdict.failing.empty());

  ToolSpec silent = runner;
  silent.command = {"true"};
  auto unreported = run_tests({"a#b"}, {}, silent, Millis(5000), ctx);
  CHECK(unreported.verdict.verdict == Verdict::Failed);
  CHECK(unreported.verdict.failing == std::vector<std::string>{"a#b"});
}
