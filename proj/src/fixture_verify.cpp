#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "dceval/classfile.hpp"
#include "dceval/fixture_verify.hpp"
#include "dceval/normalize.hpp"

namespace dceval::fixtures {

using nlohmann::json;

namespace {

const char* const kFlavors[] = {"javac", "ecj"};

json read_json(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  return json::parse(in);
}

std::vector<std::string> first_lines(const std::string& text, std::size_t max_lines) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (out.size() < max_lines && std::getline(in, line)) out.push_back(line);
  return out;
}

std::string tail(const std::string& text) {
  std::string out;
  for (const auto& l : first_lines(text, 5)) out += (out.empty() ? "" : " | ") + l;
  return out;
}

struct Fixture {
  std::string name;
  fs::path root;
  std::vector<fs::path> libs;
  std::map<std::string, std::vector<std::string>> tests;  // unit -> selected tests
  std::vector<std::string> all_tests;
};

class Checker {
 public:
  Checker(const Fixture& f, const VerifyOptions& o, VerifyReport& r) : f_(f), options_(o), report_(r) {}

  void flag(const std::string& check, const std::string& detail) { report_.violations.push_back({f_.name, check, detail}); }

  void binaries() {
    std::vector<fs::path> dirs;
    for (const char* flavor : kFlavors) dirs.push_back(f_.root / ("classes-" + std::string(flavor)));
    if (fs::is_directory(f_.root / "variants"))
      for (const auto& v : fs::directory_iterator(f_.root / "variants"))
        for (const char* flavor : kFlavors) dirs.push_back(v.path() / ("classes-" + std::string(flavor)));
    for (const auto& dir : dirs) {
      if (!fs::is_directory(dir)) {
        if (dir.parent_path() == f_.root) flag("binaries", "missing directory " + dir.filename().string());
        continue;
      }
      for (const auto& rel : toolchain::list_files(dir, ".class")) {
        auto path = dir / rel;
        std::string shown = fs::relative(path, f_.root).string();
        try {
          auto bytes = classfile::read_bytes(path.string());
          auto cls = classfile::parse_class(bytes);
          if (classfile::serialize_class(cls) != bytes) flag("binaries", shown + ": serialize(parse(b)) != b");
          classfile::normalize(cls);
        } catch (const std::exception& e) {
          flag("binaries", shown + ": " + e.what());
        }
      }
    }
  }

  void testmap_coverage() {
    auto sources = toolchain::list_files(f_.root / "src", ".java");
    std::set<std::string> units(sources.begin(), sources.end());
    for (const auto& u : units)
      if (!f_.tests.count(u) || f_.tests.at(u).empty()) flag("testmap", u + " has no covering test");
    for (const auto& [u, tests] : f_.tests)
      if (!units.count(u)) flag("testmap", u + " is mapped but has no source");
  }

  void stub_tests() {
    if (options_.self.empty()) {
      report_.notes.push_back(f_.name + ": stub test runs skipped (no executable given)");
      return;
    }
    toolchain::ToolSpec runner{"stub-testrunner", toolchain::ToolKind::TestRunner,
                               {options_.self, "stub", "testrunner", "--project", "{project_root}",
                                "--classpath={classpath}", "{filter}"},
                               std::nullopt, {}, options_.test_timeout, {}};
    for (const char* flavor : kFlavors) {
      std::vector<fs::path> cp = {f_.root / ("classes-" + std::string(flavor))};
      cp.insert(cp.end(), f_.libs.begin(), f_.libs.end());
      auto original = run(runner, cp);
      if (original.verdict.verdict != toolchain::Verdict::Passed)
        flag("original-tests", std::string(flavor) + ": " + describe(original));
      fs::path mutant = f_.root / "variants" / "mutant" / ("classes-" + std::string(flavor));
      if (!fs::is_directory(mutant)) {
        flag("mutant-detected", std::string(flavor) + ": no seeded mutant binaries");
        continue;
      }
      cp.insert(cp.begin(), mutant);
      auto mutated = run(runner, cp);
      if (mutated.verdict.verdict == toolchain::Verdict::Passed)
        flag("mutant-detected", std::string(flavor) + ": tests pass on the seeded mutant");
    }
  }

  void jdk(const fs::path& javac, const std::optional<fs::path>& java) {
    fs::path scratch = fs::temp_directory_path() / ("dceval-fixture-verify-" + std::to_string(::getpid())) / f_.name;
    fs::remove_all(scratch);
    fs::create_directories(scratch / "classes");
    auto fresh = javac_build(javac, f_.root / "src", scratch / "classes", f_.libs, scratch);
    if (!fresh) return;
    fs::path committed = f_.root / "classes-javac";
    auto want = toolchain::list_files(committed, ".class");
    auto got = toolchain::list_files(scratch / "classes", ".class");
    if (want != got) flag("fresh-build", "fresh javac build produced a different set of classes");
    for (const auto& rel : want) {
      if (!fs::exists(scratch / "classes" / rel)) continue;
      auto a = classfile::normalize(classfile::read_class_file((committed / rel).string()));
      auto b = classfile::normalize(classfile::read_class_file((scratch / "classes" / rel).string()));
      auto eq = classfile::strict_equivalence(a, b, 1);
      if (!eq.equal) flag("fresh-build", rel + " differs from the fresh build: " + eq.differences.front().location);
    }
    const char* junit = std::getenv("DCEVAL_JUNIT_CP");
    if (!java || !junit) {
      report_.notes.push_back(f_.name + ": JUnit runs skipped (set DCEVAL_JUNIT_CP and provide java)");
      fs::remove_all(scratch.parent_path());
      return;
    }
    std::vector<fs::path> test_cp = {scratch / "classes"};
    test_cp.insert(test_cp.end(), f_.libs.begin(), f_.libs.end());
    test_cp.push_back(junit);
    fs::create_directories(scratch / "tests");
    if (!javac_build(javac, f_.root / "tests", scratch / "tests", test_cp, scratch)) return;
    test_cp.push_back(scratch / "tests");
    if (!junit_run(*java, test_cp, scratch)) flag("original-tests", "JUnit failures on the fresh build");
    fs::path mutant_src = f_.root / "variants" / "mutant" / "src";
    if (fs::is_directory(mutant_src)) {
      fs::create_directories(scratch / "mutant");
      std::vector<fs::path> mcp(f_.libs.begin(), f_.libs.end());
      if (javac_build(javac, mutant_src, scratch / "mutant", mcp, scratch)) {
        test_cp.insert(test_cp.begin(), scratch / "mutant");
        if (junit_run(*java, test_cp, scratch)) flag("mutant-detected", "JUnit passes on the seeded mutant");
      }
    }
    fs::remove_all(scratch.parent_path());
  }

 private:
  toolchain::TestRun run(const toolchain::ToolSpec& runner, const std::vector<fs::path>& cp) {
    toolchain::InvocationContext ctx{options_.self, f_.root.string(), fs::temp_directory_path()};
    return toolchain::run_tests(f_.all_tests, cp, runner, options_.test_timeout, ctx);
  }

  static std::string describe(const toolchain::TestRun& run) {
    std::string out(toolchain::to_string(run.verdict.verdict));
    for (const auto& id : run.verdict.failing) out += " " + id;
    return out;
  }

  bool javac_build(const fs::path& javac, const fs::path& src, const fs::path& out, const std::vector<fs::path>& cp,
                   const fs::path& scratch) {
    std::vector<std::string> argv = {javac.string(), "-source", "8", "-target", "8", "-nowarn", "-d", out.string()};
    if (!cp.empty()) {
      std::string joined;
      for (const auto& p : cp) joined += (joined.empty() ? "" : ":") + p.string();
      argv.insert(argv.end(), {"-cp", joined});
    }
    for (const auto& rel : toolchain::list_files(src, ".java")) argv.push_back((src / rel).string());
    auto r = toolchain::run_process({argv, scratch, {}, toolchain::kDefaultCompileTimeout});
    if (r.status != toolchain::ToolStatus::Ok) {
      flag("fresh-build", "javac failed on " + fs::relative(src, f_.root).string() + ": " + tail(r.stderr_text));
      return false;
    }
    return true;
  }

  bool junit_run(const fs::path& java, const std::vector<fs::path>& cp, const fs::path& scratch) {
    std::string joined;
    for (const auto& p : cp) joined += (joined.empty() ? "" : ":") + p.string();
    std::set<std::string> classes;
    for (const auto& id : f_.all_tests) classes.insert(id.substr(0, id.find('#')));
    std::vector<std::string> argv = {java.string(), "-cp", joined, "org.junit.runner.JUnitCore"};
    argv.insert(argv.end(), classes.begin(), classes.end());
    auto r = toolchain::run_process({argv, scratch, {}, options_.test_timeout});
    return r.status == toolchain::ToolStatus::Ok;
  }

  const Fixture& f_;
  const VerifyOptions& options_;
  VerifyReport& report_;
};

}  // namespace

std::optional<fs::path> find_jdk_tool(const std::string& name) {
  if (const char* home = std::getenv("JAVA_HOME")) {
    fs::path p = fs::path(home) / "bin" / name;
    if (fs::exists(p)) return p;
  }
  if (const char* path = std::getenv("PATH")) {
    std::string all = path;
    std::size_t start = 0;
    while (start <= all.size()) {
      auto end = all.find(':', start);
      if (end == std::string::npos) end = all.size();
      fs::path p = fs::path(all.substr(start, end - start)) / name;
      if (end > start && fs::exists(p)) return p;
      start = end + 1;
    }
  }
  return std::nullopt;
}

VerifyReport fixture_verify(const fs::path& root, const VerifyOptions& options) {
  VerifyReport report;
  if (!fs::is_directory(root)) throw std::invalid_argument("no fixture directory " + root.string());
  std::vector<fs::path> dirs;
  for (const auto& e : fs::directory_iterator(root))
    if (fs::exists(e.path() / "project.json")) dirs.push_back(e.path());
  std::sort(dirs.begin(), dirs.end());

  std::optional<fs::path> javac, java;
  if (options.use_jdk) {
    javac = find_jdk_tool("javac");
    java = find_jdk_tool("java");
    if (!javac) report.notes.push_back("no javac found: fresh-build and JUnit checks skipped");
  }

  for (const auto& dir : dirs) {
    Fixture f;
    f.name = dir.filename().string();
    f.root = fs::absolute(dir);
    report.fixtures.push_back(f.name);
    Checker check(f, options, report);
    try {
      json project = read_json(dir / "project.json");
      for (const auto& lib : project.value("classpath", json::array())) f.libs.push_back(f.root / lib.get<std::string>());
      json tm = read_json(f.root / project.at("testmap").get<std::string>());
      std::set<std::string> exclude;
      for (const auto& e : tm.value("exclude", json::array())) exclude.insert(e.get<std::string>());
      std::set<std::string> all;
      for (const auto& [unit, ids] : tm.at("units").items())
        for (const auto& id : ids) {
          std::string s = id.get<std::string>();
          if (exclude.count(s)) continue;
          f.tests[unit].push_back(s);
          if (all.insert(s).second) f.all_tests.push_back(s);
        }
      if (!exclude.empty()) check.flag("testmap", std::to_string(exclude.size()) + " excluded test(s)");
    } catch (const std::exception& e) {
      check.flag("project", e.what());
      continue;
    }
    check.binaries();
    check.testmap_coverage();
    check.stub_tests();
    if (javac) check.jdk(*javac, java);
  }
  return report;
}

void to_json(json& j, const Violation& v) { j = {{"fixture", v.fixture}, {"check", v.check}, {"detail", v.detail}}; }

void to_json(json& j, const VerifyReport& r) {
  j = {{"fixtures", r.fixtures}, {"violations", r.violations}, {"notes", r.notes}, {"ok", r.ok()}};
}

}  // namespace dceval::fixtures
