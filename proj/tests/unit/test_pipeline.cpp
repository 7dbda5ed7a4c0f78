#include <atomic>
#include <fstream>
#include <random>

#include "dceval/pipeline.hpp"
#include "doctest.h"
#include "harness.hpp"

using namespace dceval::pipeline;
using dceval::testing::cli_path;
using dceval::testing::fixtures_root;
using dceval::testing::read_text;
using dceval::testing::stub_config;
using dceval::testing::TempDir;
namespace fs = std::filesystem;

namespace {

ResultSet run_matrix(const fs::path& out, const std::function<void(dceval::config::RunConfig&)>& tweak = {},
                     std::optional<fs::path> results = std::nullopt) {
  auto cfg = stub_config(out);
  if (tweak) tweak(cfg);
  Evaluator ev(cfg, cli_path());
  MatrixOptions opts;
  opts.workers = cfg.pipeline.workers;
  opts.results_path = results;
  return evaluate_matrix(ev, enumerate_cases(ev), opts);
}

std::map<CaseKey, std::string> expected_categories() {
  std::map<CaseKey, std::string> out;
  for (const char* fixture : {"fastdate", "foo", "inner", "singleton", "utils"}) {
    auto j = nlohmann::json::parse(read_text(fixtures_root() / fixture / "expected.json"));
    for (const auto& [unit, stubs] : j.at("units").items())
      for (const auto& [stub, compilers] : stubs.items()) {
        if (stub == "empty") continue;
        for (const auto& [compiler, category] : compilers.items())
          out[{fixture, unit, compiler, stub}] = category.get<std::string>();
      }
  }
  return out;
}

std::map<CaseKey, std::string> categories_of(const ResultSet& rs) {
  std::map<CaseKey, std::string> out;
  for (const auto& c : rs.cases) out[c.key] = std::string(to_string(c.category));
  return out;
}

CaseResult sample_case() {
  CaseResult r;
  r.key = {"p", "a/B.java", "javac", "cfr"};
  r.category = Category::EquivalentModuloInputs;
  r.tested = true;
  r.distortion = dceval::srcdiff::DistortionScore{3, 104, 3.0 / 104};
  r.bytecode_report = dceval::classfile::EquivalenceReport{false, {{"a/B.class m()", "code", "iadd", "isub"}}};
  r.test_verdict = dceval::toolchain::TestVerdict{dceval::toolchain::Verdict::Passed, {}};
  r.timings_ms = {{"decompile", 12}};
  r.diagnostics = {{"decompile", "work/x/decompile.log"}};
  return r;
}

}  // namespace

TEST_CASE("category names") {
  for (Category c : all_categories()) CHECK(category_from_string(to_string(c)) == c);
  CHECK(all_categories().size() == 7);
  CHECK_THROWS_AS(category_from_string("Fine"), std::invalid_argument);
  CHECK_FALSE(is_recompilable(Category::EmptyOutput));
  CHECK_FALSE(is_recompilable(Category::SyntacticallyIncorrect));
  CHECK(is_recompilable(Category::Deceptive));
  CHECK(is_recompilable(Category::NotTested));
  CHECK(is_correct(Category::StrictlyEquivalent));
  CHECK(is_correct(Category::EquivalentModuloInputs));
  CHECK_FALSE(is_correct(Category::TestTimeout));
}

TEST_CASE("test map selection drops excluded tests") {
  TempDir dir;
  std::ofstream(dir / "tm.json") << R"({"units": {"a/A.java": ["t1", "t2", "t3"], "b/B.java": []}, "exclude": ["t2"]})";
  auto tm = load_testmap(dir / "tm.json");
  CHECK(tm.selection("a/A.java") == std::vector<std::string>{"t1", "t3"});
  CHECK(tm.selection("b/B.java").empty());
  CHECK(tm.selection("c/C.java").empty());
  std::ofstream(dir / "bad.json") << R"({"units": []})";
  CHECK_THROWS(load_testmap(dir / "bad.json"));
}

TEST_CASE("results round trip through the JSON lines format") {
  TempDir dir;
  ResultSet rs;
  rs.config_hash = "0123456789abcdef";
  rs.cases.push_back(sample_case());
  auto other = sample_case();
  other.key.decompiler = "aaa";
  other.category = Category::EmptyOutput;
  other.tested = false;
  other.distortion.reset();
  other.bytecode_report.reset();
  other.test_verdict.reset();
  rs.cases.push_back(other);
  rs.failures.push_back({{"p", "x/Y.java", "ecj", "cfr"}, "original sources do not compile"});
  rs.sort();
  CHECK(rs.cases.front().key.decompiler == "aaa");
  CHECK(rs.find(other.key) != nullptr);
  CHECK(rs.find({"q", "", "", ""}) == nullptr);
  resultset_store(rs, dir / "r.jsonl");
  CHECK(resultset_load(dir / "r.jsonl") == rs);
  auto text = read_text(dir / "r.jsonl");
  CHECK(text.rfind("{\"config_hash\":\"0123456789abcdef\",\"format_version\":1,\"type\":\"header\"}\n", 0) == 0);
  CHECK(without_timings(rs).find("\"decompile\":12") == std::string::npos);
}

TEST_CASE("corrupt and foreign result files are rejected") {
  TempDir dir;
  ResultSet rs;
  rs.config_hash = "h";
  rs.cases.push_back(sample_case());
  rs.cases.push_back(sample_case());
  rs.cases[1].key.unit = "z/Z.java";
  resultset_store(rs, dir / "r.jsonl");
  auto text = read_text(dir / "r.jsonl");

  std::ofstream(dir / "truncated.jsonl") << text.substr(0, text.size() - 20);
  try {
    resultset_load(dir / "truncated.jsonl");
    FAIL("expected CorruptRecord");
  } catch (const CorruptRecord& e) {
    CHECK(e.line() == 3);
  }

  auto second_nl = text.find('\n', text.find('\n') + 1);
  std::ofstream(dir / "middle.jsonl") << text.substr(0, second_nl - 5) << "\n" << text.substr(second_nl + 1);
  try {
    resultset_load(dir / "middle.jsonl");
    FAIL("expected CorruptRecord");
  } catch (const CorruptRecord& e) {
    CHECK(e.line() == 2);
  }

  std::ofstream(dir / "v2.jsonl") << R"({"type":"header","format_version":2,"config_hash":"h"})" << "\n";
  try {
    resultset_load(dir / "v2.jsonl");
    FAIL("expected VersionMismatch");
  } catch (const VersionMismatch& e) {
    CHECK(e.found() == 2);
  }
  std::ofstream(dir / "noheader.jsonl") << R"({"type":"case"})" << "\n";
  CHECK_THROWS_AS(resultset_load(dir / "noheader.jsonl"), CorruptRecord);
  std::ofstream(dir / "empty.jsonl");
  CHECK_THROWS_AS(resultset_load(dir / "empty.jsonl"), CorruptRecord);
}

TEST_CASE("result writer resumes, drops a torn record and refuses another configuration") {
  TempDir dir;
  auto path = dir / "r.jsonl";
  {
    ResultWriter w(path, "hash-a", false);
    w.append(sample_case());
  }
  {
    std::ofstream(path, std::ios::app) << R"({"type":"case","key":{"proj)";
    ResultWriter w(path, "hash-a", true);
    CHECK(w.done(sample_case().key));
    CHECK(w.existing().cases.size() == 1);
    auto more = sample_case();
    more.key.unit = "c/C.java";
    w.append(more);
    auto rs = w.finish();
    CHECK(rs.cases.size() == 2);
    CHECK(resultset_load(path) == rs);
  }
  CHECK_THROWS_AS(ResultWriter(path, "hash-b", true), ConfigHashMismatch);
  ResultWriter fresh(path, "hash-b", false);
  CHECK(fresh.existing().cases.empty());
  CHECK(resultset_load(path).config_hash == "hash-b");
}

TEST_CASE("case enumeration and filters") {
  TempDir out;
  auto cfg = stub_config(out.path());
  Evaluator ev(cfg, cli_path());
  auto all = enumerate_cases(ev);
  CHECK(all.size() == 50);
  CHECK(std::is_sorted(all.begin(), all.end()));
  CaseFilter f;
  f.decompilers = {"identity"};
  f.compilers = {"ecj"};
  auto some = enumerate_cases(ev, f);
  CHECK(some.size() == 5);
  for (const auto& k : some) CHECK((k.decompiler == "identity" && k.compiler == "ecj"));
  f.projects = {"foo", "inner"};
  CHECK(enumerate_cases(ev, f).size() == 2);
  f.units = {"dctest/Foo.java"};
  CHECK(enumerate_cases(ev, f).size() == 1);
}

TEST_CASE("stub matrix reproduces the expected categories deterministically") {
  auto expected = expected_categories();
  REQUIRE(expected.size() == 50);
  std::vector<std::string> runs;
  for (int i = 0; i < 3; ++i) {
    TempDir out;
    auto rs = run_matrix(out.path(), {}, out / "results.jsonl");
    CHECK(rs.failures.empty());
    CHECK(categories_of(rs) == expected);
    runs.push_back(without_timings(rs));
    CHECK(without_timings(resultset_load(out / "results.jsonl")) == runs.back());
    if (i == 0) {
      std::set<Category> seen;
      for (const auto& c : rs.cases) {
        seen.insert(c.category);
        CHECK(c.tested);
        for (const auto& [stage, rel] : c.diagnostics) {
          CAPTURE(rel);
          CHECK(fs::path(rel).is_relative());
          CHECK(fs::exists(out.path() / rel));
        }
        bool decompiled = c.key.decompiler != "crash";
        CHECK(c.distortion.has_value() == (decompiled && c.key.decompiler != "syntaxbreak"));
        if (c.key.decompiler == "identity") CHECK(c.distortion->counted_edits == 0);
        if (c.key.decompiler == "equiv") CHECK(c.distortion->counted_edits > 0);
        if (c.key.decompiler == "mutant") CHECK((c.distortion->counted_edits == 0) == (c.key.project == "foo"));
        if (c.category == Category::StrictlyEquivalent) CHECK(c.bytecode_report->equal);
        if (c.category == Category::EquivalentModuloInputs) {
          CHECK_FALSE(c.bytecode_report->equal);
          CHECK(c.test_verdict->verdict == dceval::toolchain::Verdict::Passed);
        }
        if (c.category == Category::Deceptive) CHECK_FALSE(c.test_verdict->failing.empty());
      }
      for (Category c : {Category::EmptyOutput, Category::SyntacticallyIncorrect, Category::Deceptive,
                         Category::StrictlyEquivalent, Category::EquivalentModuloInputs})
        CHECK(seen.count(c));
    }
  }
  CHECK(runs[0] == runs[1]);
  CHECK(runs[1] == runs[2]);
}

TEST_CASE("caching does not change results") {
  TempDir a, b;
  auto cached = run_matrix(a.path(), [](auto& c) { c.pipeline.workers = 8; });
  auto uncached = run_matrix(b.path(), [](auto& c) {
    c.pipeline.cache = false;
    c.pipeline.workers = 8;
  });
  REQUIRE(cached.cases.size() == uncached.cases.size());
  for (std::size_t i = 0; i < cached.cases.size(); ++i) {
    auto a = cached.cases[i], b = uncached.cases[i];
    CHECK(b.diagnostics.at("decompile").find("work/cases/") == 0);
    a.diagnostics.clear();
    b.diagnostics.clear();
    a.timings_ms.clear();
    b.timings_ms.clear();
    CHECK(a == b);
  }
}

TEST_CASE("forced tests keep strictly equivalent cases strict") {
  TempDir out;
  auto rs = run_matrix(out.path(), [](auto& c) {
    c.pipeline.force_tests = true;
    std::erase_if(c.tools, [](const auto& t) {
      return t.kind == dceval::toolchain::ToolKind::Decompiler && t.id != "identity";
    });
  });
  REQUIRE(rs.cases.size() == 10);
  for (const auto& c : rs.cases) {
    CHECK(c.category == Category::StrictlyEquivalent);
    CHECK(c.test_verdict.has_value());
  }
}

TEST_CASE("units without covering tests") {
  TempDir dir;
  fs::copy(fixtures_root() / "foo", dir / "foo", fs::copy_options::recursive);
  std::ofstream(dir / "foo/testmap.json") << R"({"units": {}, "exclude": []})";
  auto rs = run_matrix(dir / "out", [&](auto& c) {
    c.projects = {c.project("foo")};
    c.projects[0].root = dir / "foo";
  });
  REQUIRE(rs.cases.size() == 10);
  for (const auto& c : rs.cases) {
    CHECK_FALSE(c.tested);
    if (c.key.decompiler == "identity") CHECK(c.category == Category::StrictlyEquivalent);
    if (c.key.decompiler == "equiv" || c.key.decompiler == "mutant") CHECK(c.category == Category::NotTested);
  }
}

TEST_CASE("infrastructure errors are recorded, not categorized") {
  TempDir out;
  auto rs = run_matrix(out.path(), [](auto& c) {
    for (auto& t : c.tools)
      if (t.id == "ecj") t.command = {"/bin/sh", "-c", "echo broken >&2; exit 1", "{input}", "{output}"};
    c.projects.resize(2);
  });
  CHECK(rs.cases.size() == 10);
  CHECK(rs.failures.size() == 10);
  for (const auto& f : rs.failures) {
    CHECK(f.key.compiler == "ecj");
    CHECK(f.message.find("do not compile") != std::string::npos);
  }
  TempDir out2;
  auto missing_runner = run_matrix(out2.path(), [](auto& c) {
    for (auto& t : c.tools)
      if (t.kind == dceval::toolchain::ToolKind::TestRunner) t.command = {"/nonexistent/runner", "{filter}"};
    c.projects.resize(1);
  });
  for (const auto& f : missing_runner.failures) CHECK(f.message.find("could not start") != std::string::npos);
  CHECK(missing_runner.failures.size() == 4);  // equiv and mutant reach the tests under both compilers
}

TEST_CASE("a decompiler that cannot be started yields EmptyOutput") {
  TempDir out;
  auto rs = run_matrix(out.path(), [](auto& c) {
    for (auto& t : c.tools)
      if (t.id == "identity") t.command = {"/nonexistent/decompiler", "{input}", "{output}"};
    c.projects.resize(1);
  });
  for (const auto& c : rs.cases)
    if (c.key.decompiler == "identity") CHECK(c.category == Category::EmptyOutput);
}

TEST_CASE("an interrupted run resumes to the uninterrupted result") {
  TempDir ref_dir;
  auto reference = run_matrix(ref_dir.path(), {}, ref_dir / "results.jsonl");
  std::mt19937 rng(20240611);
  for (int trial = 0; trial < 2; ++trial) {
    TempDir out;
    auto cfg = stub_config(out.path());
    std::size_t stop_after = 1 + rng() % 45;
    CAPTURE(stop_after);
    std::atomic<bool> stop{false};
    std::atomic<std::size_t> seen{0};
    {
      Evaluator ev(cfg, cli_path());
      MatrixOptions opts;
      opts.workers = 4;
      opts.results_path = out / "results.jsonl";
      opts.stop = &stop;
      opts.on_case = [&](const CaseKey&, const CaseResult*, const std::string&) {
        if (++seen >= stop_after) stop = true;
      };
      auto partial = evaluate_matrix(ev, enumerate_cases(ev), opts);
      CHECK(partial.cases.size() < 50);
    }
    Evaluator ev(cfg, cli_path());
    MatrixOptions opts;
    opts.workers = 4;
    opts.results_path = out / "results.jsonl";
    opts.resume = true;
    std::size_t evaluated = 0;
    opts.on_case = [&](const CaseKey&, const CaseResult*, const std::string&) { ++evaluated; };
    auto resumed = evaluate_matrix(ev, enumerate_cases(ev), opts);
    CHECK(evaluated == 50 - seen.load());
    CHECK(without_timings(resumed) == without_timings(reference));
  }
}
