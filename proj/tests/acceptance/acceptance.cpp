#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <thread>

#include "../support/synthetic.hpp"
#include "../support/tree_oracle.hpp"
#include "../unit/harness.hpp"
#include "dceval/classfile.hpp"
#include "dceval/multidc.hpp"
#include "dceval/normalize.hpp"
#include "dceval/pipeline.hpp"
#include "dceval/report.hpp"
#include "dceval/srcdiff.hpp"

extern char** environ;

namespace {

namespace fs = std::filesystem;
using namespace dceval;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

pipeline::ResultSet run_stub_matrix(const fs::path& out, std::optional<fs::path> results = std::nullopt) {
  auto cfg = testing::stub_config(out);
  pipeline::Evaluator ev(cfg, testing::cli_path());
  pipeline::MatrixOptions opts;
  opts.workers = cfg.pipeline.workers;
  opts.results_path = results;
  return pipeline::evaluate_matrix(ev, pipeline::enumerate_cases(ev), opts);
}

Outcome permutation_invariance() {
  auto start = Clock::now();
  std::mt19937_64 rng(20240611);
  std::size_t binaries = 0, trials = 0, failures = 0;
  for (const auto& p : testing::committed_class_files()) {
    auto c = classfile::read_class_file(p.string());
    auto n = classfile::normalize(c);
    ++binaries;
    for (int k = 0; k < 100; ++k) {
      auto permuted = classfile::permute_constant_pool(c, classfile::random_permutation(c.constant_pool, rng));
      ++trials;
      if (!(classfile::normalize(classfile::parse_class(classfile::serialize_class(permuted))) == n)) ++failures;
    }
  }
  double secs = seconds_since(start);
  return {binaries > 0 && failures == 0 && secs < 30,
          fmt("%zu binaries x 100 permutations, %zu failures, %.1f s", binaries, failures, secs)};
}

Outcome round_trip() {
  std::size_t total = 0, identical = 0;
  for (const auto& p : testing::committed_class_files()) {
    auto bytes = classfile::read_bytes(p.string());
    ++total;
    identical += classfile::serialize_class(classfile::parse_class(bytes)) == bytes;
  }
  return {total > 0 && identical == total, fmt("%zu/%zu byte-identical", identical, total)};
}

Outcome distortion_example() {
  auto a = srcdiff::parse_source(testing::read_text(testing::fixtures_root() / "foo/src/dctest/Foo.java"));
  auto b = srcdiff::parse_source(
      testing::read_text(testing::fixtures_root() / "foo/variants/equiv/src/dctest/Foo.java"));
  auto d = srcdiff::distortion(srcdiff::diff(a, b), a);
  return {d.counted_edits == 3 && d.original_nodes == 104 && d.ratio == 3.0 / 104.0,
          fmt("%zu edits over %zu nodes", d.counted_edits, d.original_nodes)};
}

Outcome diff_optimality() {
  auto start = Clock::now();
  auto r = testing::check_optimality(3, 8, 2);
  double secs = seconds_since(start);
  return {r.pairs > 0 && r.optimal == r.pairs && r.applied_ok == r.pairs && secs < 120,
          fmt("%zu/%zu pairs optimal, %.1f s", r.optimal, r.pairs, secs)};
}

std::map<pipeline::CaseKey, std::string> expected_categories() {
  std::map<pipeline::CaseKey, std::string> out;
  for (const char* fixture : {"fastdate", "foo", "inner", "singleton", "utils"}) {
    auto j = nlohmann::json::parse(testing::read_text(testing::fixtures_root() / fixture / "expected.json"));
    for (const auto& [unit, stubs] : j.at("units").items())
      for (const auto& [stub, compilers] : stubs.items()) {
        if (stub == "empty") continue;
        for (const auto& [compiler, category] : compilers.items())
          out[{fixture, unit, compiler, stub}] = category.get<std::string>();
      }
  }
  return out;
}

Outcome cascade() {
  auto expected = expected_categories();
  std::set<std::string> runs;
  std::set<pipeline::Category> seen;
  std::size_t mismatches = 0;
  for (int i = 0; i < 3; ++i) {
    testing::TempDir out;
    auto rs = run_stub_matrix(out.path());
    std::map<pipeline::CaseKey, std::string> got;
    for (const auto& c : rs.cases) {
      got[c.key] = std::string(pipeline::to_string(c.category));
      seen.insert(c.category);
    }
    if (got != expected || !rs.failures.empty()) ++mismatches;
    runs.insert(pipeline::without_timings(rs));
  }
  using pipeline::Category;
  bool all_seen = true;
  for (Category c : {Category::EmptyOutput, Category::SyntacticallyIncorrect, Category::Deceptive,
                     Category::StrictlyEquivalent, Category::EquivalentModuloInputs})
    all_seen = all_seen && seen.count(c);
  return {mismatches == 0 && runs.size() == 1 && all_seen,
          fmt("%zu cases, %d/3 runs match, %zu distinct outputs", expected.size(), 3 - int(mismatches),
              runs.size())};
}

Outcome multidc_dominance() {
  testing::TempDir out;
  auto cfg = testing::stub_config(out.path());
  pipeline::Evaluator ev(cfg, testing::cli_path());
  pipeline::MatrixOptions opts;
  opts.workers = cfg.pipeline.workers;
  auto rs = pipeline::evaluate_matrix(ev, pipeline::enumerate_cases(ev), opts);
  using Triple = std::tuple<std::string, std::string, std::string>;
  std::set<Triple> union_set, multi;
  for (const auto& c : rs.cases)
    if (pipeline::is_recompilable(c.category)) union_set.insert({c.key.project, c.key.unit, c.key.compiler});
  auto ranking = multidc::rank_decompilers(rs);
  pipeline::CaseFilter f;
  f.decompilers = {ranking.order.front()};
  for (auto unit : pipeline::enumerate_cases(ev, f)) {
    auto r = multidc::multi_decompile(unit, ranking, ev);
    if (pipeline::is_recompilable(r.result.category)) multi.insert({unit.project, unit.unit, unit.compiler});
  }
  return {!union_set.empty() && multi == union_set,
          fmt("Multi-DC %zu recompilable, union %zu", multi.size(), union_set.size())};
}

Outcome chi_squared() {
  struct Oracle {
    report::Table2x2 table;
    double statistic, p_value;
  };
  // scipy.stats.chi2_contingency(table, correction=False)
  const std::vector<Oracle> oracles = {{{{{1609, 278}, {1532, 355}}}, 11.254124097888951, 0.0007944630262261589},
                                       {{{{10, 0}, {0, 10}}}, 20.0, 7.744216431044088e-06},
                                       {{{{50, 50}, {50, 50}}}, 0.0, 1.0}};
  auto close = [](double got, double want) {
    return want == 0 ? std::abs(got) < 1e-12 : std::abs(got - want) <= 1e-6 * std::abs(want);
  };
  bool ok = true;
  for (const auto& o : oracles) {
    auto r = report::chi_squared(o.table);
    ok = ok && close(r.statistic, o.statistic) && close(r.p_value, o.p_value);
    const auto& t = o.table;
    ok = ok && close(report::chi_squared({t[1], t[0]}).statistic, r.statistic);
    ok = ok && close(report::chi_squared({{{t[0][1], t[0][0]}, {t[1][1], t[1][0]}}}).statistic, r.statistic);
    report::Table2x2 scaled{{{t[0][0] * 4, t[0][1] * 4}, {t[1][0] * 4, t[1][1] * 4}}};
    ok = ok && close(report::chi_squared(scaled).statistic, 4 * r.statistic);
  }
  return {ok, fmt("statistic %.6f for [[1609,278],[1532,355]]", report::chi_squared(oracles[0].table).statistic)};
}

Outcome table_transcription() {
  auto rows = report::aggregate(testing::published_result_set());
  std::size_t matched = 0;
  auto two = [](double v) { return fmt("%.2f", v); };
  for (const auto& p : testing::published_summary())
    for (const auto& r : rows)
      if (r.decompiler == p.decompiler && r.n_recompilable == p.recompilable && r.n_pass_tests == p.pass &&
          r.n_deceptive == p.deceptive && two(r.recompilable_ratio) == p.recompilable_ratio &&
          two(r.pass_ratio) == p.pass_ratio && r.distortion && two(r.distortion->mean) == p.astdiff)
        ++matched;
  return {matched == testing::published_summary().size(),
          fmt("%zu/%zu rows reproduced", matched, testing::published_summary().size())};
}

Outcome resume_soundness() {
  testing::TempDir ref;
  auto reference = pipeline::without_timings(run_stub_matrix(ref.path()));
  testing::TempDir out;
  setenv("DCEVAL_FIXTURES", testing::fixtures_root().c_str(), 1);
  setenv("DCEVAL_OUT", out.path().c_str(), 1);
  std::string bin = testing::cli_path(), cfg = (testing::test_data() / "stub-config.json").string();
  std::string run = "run", c = "-c", q = "-q";
  std::vector<char*> argv = {bin.data(), run.data(), c.data(), cfg.data(), q.data(), nullptr};
  pid_t pid = 0;
  if (posix_spawn(&pid, bin.c_str(), nullptr, nullptr, argv.data(), environ) != 0) return {false, "spawn failed"};
  std::mt19937 rng(std::random_device{}());
  int delay = std::uniform_int_distribution<int>(50, 3000)(rng);
  std::this_thread::sleep_for(std::chrono::milliseconds(delay));
  kill(pid, SIGKILL);
  int status = 0;
  waitpid(pid, &status, 0);
  std::size_t lines_before = 0;
  {
    std::ifstream in(out / "results.jsonl");
    std::string l;
    while (std::getline(in, l)) ++lines_before;
  }
  auto resumed = testing::stub_config(out.path());
  pipeline::Evaluator ev(resumed, bin);
  pipeline::MatrixOptions opts;
  opts.workers = resumed.pipeline.workers;
  opts.results_path = out / "results.jsonl";
  opts.resume = true;
  pipeline::evaluate_matrix(ev, pipeline::enumerate_cases(ev), opts);
  auto got = pipeline::without_timings(pipeline::resultset_load(out / "results.jsonl"));
  return {got == reference, fmt("killed after %d ms with %zu lines written", delay, lines_before)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"permutation-invariance", permutation_invariance},
      {"round-trip", round_trip},
      {"distortion-worked-example", distortion_example},
      {"diff-optimality", diff_optimality},
      {"cascade-classification", cascade},
      {"multidc-dominance", multidc_dominance},
      {"chi-squared-oracle", chi_squared},
      {"summary-table-transcription", table_transcription},
      {"resume-soundness", resume_soundness},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
