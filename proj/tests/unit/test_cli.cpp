#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <random>
#include <thread>

#include "dceval/pipeline.hpp"
#include "dceval/toolchain.hpp"
#include "doctest.h"
#include "harness.hpp"

extern char** environ;

using dceval::testing::cli_path;
using dceval::testing::fixtures_root;
using dceval::testing::read_text;
using dceval::testing::test_data;
using dceval::testing::TempDir;
using dceval::toolchain::Millis;
using dceval::toolchain::ProcessResult;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

ProcessResult cli(const fs::path& out, std::vector<std::string> args, Millis timeout = Millis(120000)) {
  args.insert(args.begin(), cli_path());
  return dceval::toolchain::run_process(
      {args, {}, {{"DCEVAL_FIXTURES", fixtures_root().string()}, {"DCEVAL_OUT", out.string()}}, timeout});
}

std::string config() { return (test_data() / "stub-config.json").string(); }

fs::path edited_config(const fs::path& dir, const std::function<void(json&)>& edit) {
  auto j = json::parse(read_text(test_data() / "stub-config.json"));
  edit(j);
  for (auto& p : j.at("projects")) {
    p["root"] = (fixtures_root() / p.at("id").get<std::string>()).string();
  }
  auto path = dir / "config.json";
  std::ofstream(path) << j.dump(2);
  return path;
}

std::string canonical_results(const fs::path& path) {
  return dceval::pipeline::without_timings(dceval::pipeline::resultset_load(path));
}

}  // namespace

TEST_CASE("cli: run, resume and report over the stub matrix") {
  TempDir out;
  auto r = cli(out.path(), {"run", "-c", config(), "-q"});
  REQUIRE(r.exit_code == 0);
  auto results = out / "results.jsonl";
  auto rs = dceval::pipeline::resultset_load(results);
  CHECK(rs.cases.size() == 50);
  CHECK(rs.failures.empty());
  auto first = canonical_results(results);

  auto again = cli(out.path(), {"run", "-c", config(), "--json-progress"});
  CHECK(again.exit_code == 0);
  CHECK(again.stdout_text.find("\"done\"") == std::string::npos);
  CHECK(again.stdout_text.find("50 case(s)") != std::string::npos);
  CHECK(canonical_results(results) == first);

  auto deceptive = cli(out.path(), {"run", "-c", config(), "-q", "--fail-on-deceptive"});
  CHECK(deceptive.exit_code == 1);

  auto rep = cli(out.path(), {"report", "-r", results.string()});
  CHECK(rep.exit_code == 0);
  auto golden = read_text(test_data() / "golden/summary-stub-matrix.md");
  CHECK(rep.stdout_text == golden);
  CHECK(read_text(out / "report/summary.md") == golden);
  CHECK(fs::exists(out / "report/deceptive.json"));

  auto as_csv = cli(out.path(), {"report", "-r", results.string(), "-o", (out / "csv").string(), "--format", "csv",
                                 "--chisq"});
  CHECK(as_csv.exit_code == 0);
  CHECK(as_csv.stdout_text.rfind("decompiler,total_cases,", 0) == 0);
  CHECK(fs::exists(out / "csv/chisq.json"));
  CHECK(as_csv.stderr_text.find("warning: chi-squared") != std::string::npos);

  CHECK(cli(out.path(), {"report", "-r", results.string(), "-q", "--fail-on-deceptive"}).exit_code == 1);
  CHECK(cli(out.path(), {"report", "-r", results.string(), "--format", "xml"}).exit_code == 2);
  CHECK(cli(out.path(), {"report", "-r", (out / "absent.jsonl").string()}).exit_code == 2);

  auto forced = cli(out.path(), {"run", "-c", config(), "-q", "--force-tests"});
  CHECK(forced.exit_code == 2);
  CHECK(forced.stderr_text.find("--fresh") != std::string::npos);
  auto fresh = cli(out.path(), {"run", "-c", config(), "-q", "--fresh", "--only", "decompiler=identity"});
  CHECK(fresh.exit_code == 0);
  CHECK(dceval::pipeline::resultset_load(results).cases.size() == 10);
}

TEST_CASE("cli: filters select cases") {
  TempDir out;
  auto r = cli(out.path(), {"run", "-c", config(), "-q", "--only", "decompiler=identity", "--project", "foo",
                            "--project", "utils"});
  REQUIRE(r.exit_code == 0);
  auto rs = dceval::pipeline::resultset_load(out / "results.jsonl");
  CHECK(rs.cases.size() == 4);
  for (const auto& c : rs.cases) CHECK(c.key.decompiler == "identity");
  CHECK(cli(out.path(), {"run", "-c", config(), "-q", "--only", "colour=red"}).exit_code == 2);
  CHECK(cli(out.path(), {"run", "-c", config(), "-q", "--only", "decompiler"}).exit_code == 2);

  auto progress = cli(out.path(), {"run", "-c", config(), "--fresh", "--json-progress", "--unit", "dctest/Foo.java",
                                   "--decompiler", "equiv", "--results", (out / "p.jsonl").string()});
  CHECK(progress.exit_code == 0);
  std::istringstream lines(progress.stdout_text);
  std::string line;
  int n = 0;
  while (std::getline(lines, line)) {
    auto j = json::parse(line);
    if (j.contains("outcome")) ++n;
  }
  CHECK(n == 2);
}

TEST_CASE("cli: configuration errors exit 2 and name the field") {
  TempDir dir;
  auto missing = edited_config(dir.path(), [](json& j) { j["projects"][1]["testmap"] = "missing.json"; });
  auto r = cli(dir.path(), {"run", "-c", missing.string(), "-q"});
  CHECK(r.exit_code == 2);
  CHECK(r.stderr_text.find("config error: projects[1].testmap") != std::string::npos);

  auto workers = edited_config(dir.path(), [](json& j) { j["pipeline"]["workers"] = -1; });
  r = cli(dir.path(), {"run", "-c", workers.string(), "-q"});
  CHECK(r.exit_code == 2);
  CHECK(r.stderr_text.find("pipeline.workers") != std::string::npos);

  CHECK(cli(dir.path(), {"run", "-c", (dir / "absent.json").string()}).exit_code == 2);
  CHECK(cli(dir.path(), {"run"}).exit_code != 0);
  CHECK(cli(dir.path(), {"bogus"}).exit_code != 0);
}

TEST_CASE("cli: help for every subcommand") {
  TempDir dir;
  for (std::vector<std::string> args :
       {std::vector<std::string>{"--help"}, {"run", "--help"}, {"report", "--help"}, {"multidc", "--help"},
        {"fixture-verify", "--help"}, {"stub", "--help"}, {"stub", "testrunner", "--help"},
        {"stub", "compile-copy", "--help"}, {"stub", "decomp-identity", "--help"}}) {
    CAPTURE(args.front());
    auto r = cli(dir.path(), args);
    CHECK(r.exit_code == 0);
    CHECK(r.stdout_text.find("Usage") != std::string::npos);
  }
}

TEST_CASE("cli: stub commands") {
  TempDir dir;
  auto root = fixtures_root() / "foo";
  auto r = cli(dir.path(), {"stub", "compile-copy", "--project", root.string(), "--flavor", "ecj", "--out",
                            (dir / "c").string(), (root / "src/dctest/Foo.java").string()});
  CHECK(r.exit_code == 0);
  CHECK(read_text(dir / "c/dctest/Foo.class") == read_text(root / "classes-ecj/dctest/Foo.class"));
  r = cli(dir.path(), {"stub", "decomp-equiv", "--project", root.string(), "--out", (dir / "d").string(),
                       (dir / "c/dctest/Foo.class").string()});
  CHECK(r.exit_code == 0);
  CHECK(read_text(dir / "d/dctest/Foo.java") == read_text(root / "variants/equiv/src/dctest/Foo.java"));
  r = cli(dir.path(), {"stub", "decomp-crash", "--project", root.string(), "--out", (dir / "x").string(),
                       (dir / "c/dctest/Foo.class").string()});
  CHECK(r.exit_code == 3);
  r = cli(dir.path(), {"stub", "testrunner", "--project", root.string(), "--classpath",
                       (root / "classes-javac").string(), "dctest.FooTest#testFoo"});
  CHECK(r.exit_code == 0);
  CHECK(r.stdout_text == "PASS dctest.FooTest#testFoo\n");
}

TEST_CASE("cli: multidc writes sources, results and a manifest") {
  TempDir out;
  auto r = cli(out.path(), {"multidc", "-c", config(), "-q", "--ranking", "crash,syntaxbreak,identity", "-o",
                            (out / "m").string()});
  REQUIRE(r.exit_code == 0);
  auto manifest = json::parse(read_text(out / "m/manifest.json"));
  CHECK(manifest.at("ranking").at("order") == json::array({"crash", "syntaxbreak", "identity"}));
  CHECK(manifest.at("units").size() == 10);
  for (const auto& u : manifest.at("units")) {
    CHECK(u.at("chosen") == "identity");
    CHECK(u.at("attempts").size() == 3);
    CHECK(u.at("category") == "StrictlyEquivalent");
  }
  CHECK(read_text(out / "m/sources/foo/javac/dctest/Foo.java") ==
        read_text(fixtures_root() / "foo/src/dctest/Foo.java"));
  auto rs = dceval::pipeline::resultset_load(out / "m/results.jsonl");
  CHECK(rs.cases.size() == 10);
  for (const auto& c : rs.cases) CHECK(c.key.decompiler == "Multi-DC");

  auto from_config = cli(out.path(), {"multidc", "-c", config(), "-q", "--project", "singleton", "-o",
                                      (out / "n").string()});
  CHECK(from_config.exit_code == 0);
  auto m2 = json::parse(read_text(out / "n/manifest.json"));
  CHECK(m2.at("units").size() == 2);
  for (const auto& u : m2.at("units")) CHECK(u.at("chosen") == "mutant");

  CHECK(cli(out.path(), {"multidc", "-c", config(), "-q", "--ranking", ""}).exit_code == 2);
  CHECK(cli(out.path(), {"multidc", "-c", config(), "-q", "--ranking", "identity,nope"}).exit_code == 2);
  CHECK(cli(out.path(), {"multidc", "-c", config(), "-q", "--ranking", "identity,identity"}).exit_code == 2);
}

TEST_CASE("cli: a run killed at a random point resumes to the uninterrupted result") {
  TempDir ref;
  REQUIRE(cli(ref.path(), {"run", "-c", config(), "-q"}).exit_code == 0);
  auto reference = canonical_results(ref / "results.jsonl");

  std::mt19937 rng(std::random_device{}());
  std::uniform_int_distribution<int> delay_ms(50, 3000);
  TempDir out;
  setenv("DCEVAL_FIXTURES", fixtures_root().c_str(), 1);
  setenv("DCEVAL_OUT", out.path().c_str(), 1);
  std::string cli_bin = cli_path(), cfg = config();
  std::vector<char*> argv = {cli_bin.data(), const_cast<char*>("run"), const_cast<char*>("-c"), cfg.data(),
                             const_cast<char*>("-q"), nullptr};
  pid_t pid = 0;
  REQUIRE(posix_spawn(&pid, cli_bin.c_str(), nullptr, nullptr, argv.data(), environ) == 0);
  int delay = delay_ms(rng);
  CAPTURE(delay);
  std::this_thread::sleep_for(std::chrono::milliseconds(delay));
  kill(pid, SIGKILL);
  int status = 0;
  waitpid(pid, &status, 0);

  auto resumed = cli(out.path(), {"run", "-c", config(), "-q"});
  CHECK(resumed.exit_code == 0);
  CHECK(canonical_results(out / "results.jsonl") == reference);
}

TEST_CASE("cli: fixture-verify") {
  TempDir dir;
  auto ok = cli(dir.path(), {"fixture-verify", "--fixtures", fixtures_root().string(), "--no-jdk", "--timeout-ms",
                             "1500", "--json", (dir / "ok.json").string()});
  CHECK(ok.exit_code == 0);
  auto report = json::parse(read_text(dir / "ok.json"));
  CHECK(report.at("violations").empty());
  CHECK(report.at("fixtures").size() == 5);

  auto negative = cli(dir.path(), {"fixture-verify", "--fixtures", (fixtures_root() / "negative").string(),
                                   "--no-jdk", "--timeout-ms", "1500", "-q"});
  CHECK(negative.exit_code == 1);

  fs::create_directories(dir / "corpus");
  fs::copy(fixtures_root() / "utils", dir / "corpus/utils", fs::copy_options::recursive);
  auto victim = dir / "corpus/utils/classes-ecj/org/apache/commons/codec/net/Utils.class";
  auto bytes = read_text(victim);
  std::ofstream(victim, std::ios::binary | std::ios::trunc) << bytes.substr(0, bytes.size() / 2);
  auto broken = cli(dir.path(), {"fixture-verify", "--fixtures", (dir / "corpus").string(), "--no-jdk",
                                 "--timeout-ms", "1500", "--json", (dir / "broken.json").string()});
  CHECK(broken.exit_code == 1);
  auto violations = json::parse(read_text(dir / "broken.json")).at("violations");
  REQUIRE_FALSE(violations.empty());
  bool named = false;
  for (const auto& v : violations)
    if (v.at("check") == "binaries" && v.at("detail").get<std::string>().find("Utils.class") != std::string::npos)
      named = true;
  CHECK(named);
}
