#include <cmath>
#include <random>
#include <sstream>

#include "../support/synthetic.hpp"
#include "dceval/report.hpp"
#include "doctest.h"
#include "harness.hpp"

using namespace dceval::report;
using dceval::pipeline::CaseResult;
using dceval::pipeline::Category;
using dceval::pipeline::ResultSet;
using dceval::testing::read_text;
using dceval::testing::TempDir;

namespace {

std::string two_decimals(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

// Closed form of the 2x2 Pearson statistic and the chi-squared(1) survival
// function, independent of the library's expected-count loop and gamma code.
double closed_form_statistic(const Table2x2& t) {
  double a = t[0][0], b = t[0][1], c = t[1][0], d = t[1][1];
  double n = a + b + c + d;
  return n * (a * d - b * c) * (a * d - b * c) / ((a + b) * (c + d) * (a + c) * (b + d));
}

double chi2_survival_df1(double x) { return std::erfc(std::sqrt(x / 2)); }

bool close_rel(double got, double want, double rel = 1e-6) {
  if (want == 0) return std::abs(got) < 1e-12;
  return std::abs(got - want) <= rel * std::abs(want);
}

CaseResult make_case(const std::string& unit, const std::string& compiler, const std::string& decompiler, Category c,
                     bool tested = true) {
  CaseResult r;
  r.key = {"p", unit, compiler, decompiler};
  r.category = c;
  r.tested = tested;
  return r;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (char ch : line) {
    if (ch == '"') quoted = !quoted;
    if (ch == sep && !quoted) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

TEST_CASE("describe uses interpolated quartiles") {
  auto s = describe({4, 1, 3, 2});
  CHECK(s.count == 4);
  CHECK(s.mean == doctest::Approx(2.5));
  CHECK(s.median == doctest::Approx(2.5));
  CHECK(s.q1 == doctest::Approx(1.75));
  CHECK(s.q3 == doctest::Approx(3.25));
  CHECK(s.min == 1);
  CHECK(s.max == 4);
  auto one = describe({0.3});
  CHECK(one.q1 == one.q3);
  CHECK_THROWS_AS(describe({}), std::invalid_argument);
}

TEST_CASE("regularized upper gamma against closed forms") {
  for (double x : {0.0, 1e-4, 0.1, 0.5, 1.0, 2.5, 7.0, 20.0, 60.0}) {
    CAPTURE(x);
    CHECK(close_rel(regularized_upper_gamma(0.5, x), std::erfc(std::sqrt(x)), 1e-10));
    CHECK(close_rel(regularized_upper_gamma(1.0, x), std::exp(-x), 1e-10));
    CHECK(close_rel(regularized_upper_gamma(2.0, x), (1 + x) * std::exp(-x), 1e-10));
  }
  CHECK_THROWS_AS(regularized_upper_gamma(0, 1), std::invalid_argument);
  CHECK_THROWS_AS(regularized_upper_gamma(1, -1), std::invalid_argument);
}

TEST_CASE("chi-squared matches frozen oracle values") {
  struct Oracle {
    Table2x2 table;
    double statistic;
    double p_value;
  };
  // scipy.stats.chi2_contingency(table, correction=False)
  const std::vector<Oracle> oracles = {
      {{{{1609, 278}, {1532, 355}}}, 11.254124097888951, 0.0007944630262261589},
      {{{{10, 0}, {0, 10}}}, 20.0, 7.744216431044088e-06},
      {{{{50, 50}, {50, 50}}}, 0.0, 1.0},
  };
  for (const auto& o : oracles) {
    auto r = chi_squared(o.table);
    CHECK(close_rel(r.statistic, o.statistic));
    CHECK(close_rel(r.p_value, o.p_value));
    CHECK(r.df == 1);
  }
  CHECK(two_decimals(chi_squared(oracles[0].table).statistic) == "11.25");
}

TEST_CASE("chi-squared properties over random tables") {
  std::mt19937 rng(11);
  std::uniform_int_distribution<int> count(1, 2000);
  for (int i = 0; i < 500; ++i) {
    Table2x2 t{{{double(count(rng)), double(count(rng))}, {double(count(rng)), double(count(rng))}}};
    auto r = chi_squared(t);
    CAPTURE(nlohmann::json(t).dump());
    CHECK(close_rel(r.statistic, closed_form_statistic(t), 1e-9));
    CHECK(close_rel(r.p_value, chi2_survival_df1(r.statistic), 1e-6));
    CHECK(close_rel(chi_squared({t[1], t[0]}).statistic, r.statistic, 1e-12));
    CHECK(close_rel(chi_squared({{{t[0][1], t[0][0]}, {t[1][1], t[1][0]}}}).statistic, r.statistic, 1e-12));
    CHECK(close_rel(chi_squared({{{t[0][0], t[1][0]}, {t[0][1], t[1][1]}}}).statistic, r.statistic, 1e-12));
    Table2x2 scaled = t;
    for (auto& row : scaled)
      for (auto& v : row) v *= 3;
    CHECK(close_rel(chi_squared(scaled).statistic, 3 * r.statistic, 1e-9));
    CHECK(r.p_value >= 0);
    CHECK(r.p_value <= 1);
  }
}

TEST_CASE("degenerate and invalid tables") {
  CHECK_THROWS_AS(chi_squared({{{0, 0}, {3, 4}}}), DegenerateTable);
  CHECK_THROWS_AS(chi_squared({{{5, 0}, {3, 0}}}), DegenerateTable);
  CHECK_THROWS_AS(chi_squared({{{-1, 2}, {3, 4}}}), std::invalid_argument);

  ResultSet rs;
  rs.cases = {make_case("A.java", "javac", "d", Category::StrictlyEquivalent)};
  CHECK_THROWS_AS(chi_squared_compiler_effect(rs, "d"), DegenerateTable);
  rs.cases.push_back(make_case("A.java", "ecj", "d", Category::StrictlyEquivalent));
  CHECK_THROWS_AS(chi_squared_compiler_effect(rs, "d"), DegenerateTable);
  rs.cases.push_back(make_case("B.java", "ecj", "d", Category::EmptyOutput));
  auto r = chi_squared_compiler_effect(rs, "d");
  CHECK(r.rows == std::array<std::string, 2>{"ecj", "javac"});
  CHECK(r.table[0] == std::array<double, 2>{1, 1});
  CHECK(r.table[1] == std::array<double, 2>{1, 0});
}

TEST_CASE("the published summary totals are reproduced") {
  auto rows = aggregate(dceval::testing::published_result_set());
  const auto& published = dceval::testing::published_summary();
  REQUIRE(rows.size() == published.size());
  for (const auto& p : published) {
    CAPTURE(p.decompiler);
    auto it = std::find_if(rows.begin(), rows.end(), [&](const SummaryRow& r) { return r.decompiler == p.decompiler; });
    REQUIRE(it != rows.end());
    CHECK(it->total_cases == dceval::testing::kStudyCases);
    CHECK(it->tested_cases == dceval::testing::kStudyTested);
    CHECK(it->n_recompilable == p.recompilable);
    CHECK(it->n_pass_tests == p.pass);
    CHECK(it->n_deceptive == p.deceptive);
    CHECK(two_decimals(it->recompilable_ratio) == p.recompilable_ratio);
    CHECK(two_decimals(it->pass_ratio) == p.pass_ratio);
    REQUIRE(it->distortion.has_value());
    CHECK(two_decimals(it->distortion->mean) == p.astdiff);
    std::size_t sum = 0;
    for (const auto& [name, n] : it->categories) sum += n;
    CHECK(sum == it->total_cases);
    CHECK(it->categories.size() == dceval::pipeline::all_categories().size());
  }
  auto md = emit(rows, Format::Markdown);
  CHECK(md.find("| Procyon | 3281 (0.84) | 1869 (0.78) | 33 | 0.08 |") != std::string::npos);
  CHECK(md.find("| Multi-DC | 3734 (0.95) | 2174 (0.91) | 45 | 0.08 |") != std::string::npos);
}

TEST_CASE("coverage partition of the six-decompiler synthetic set") {
  auto rs = dceval::testing::coverage_result_set();
  auto p = coverage_partition(rs);
  CHECK(p.decompilers == dceval::testing::coverage_decompilers());
  CHECK(p.tested_total == 2397);
  CHECK(p.cell_sum() == p.tested_total);
  CHECK(p.all() == 589);
  CHECK(p.none() == 157);
  std::size_t unique = 0;
  for (const auto& [d, n] : p.unique()) {
    CHECK(n == 46);
    unique += n;
  }
  CHECK(unique == 276);
  for (const auto& [set, n] : p.cells) CHECK(n > 0);

  auto restricted = coverage_partition(rs, {"CFR", "Procyon"});
  CHECK(restricted.cell_sum() == restricted.tested_total);
  CHECK(restricted.tested_total == 2397);
  CHECK(restricted.all() >= p.all());

  auto loaded = load_partition_json(emit(p, Format::Json));
  CHECK(loaded.cells == p.cells);
  CHECK(loaded.decompilers == p.decompilers);
  CHECK(loaded.tested_total == p.tested_total);
  auto csv = emit(p, Format::Csv);
  CHECK(csv.rfind("handled_by,count\n", 0) == 0);
  CHECK_THROWS_AS(emit(p, Format::Markdown), UnsupportedFormat);
}

TEST_CASE("coverage partition conserves units across random result sets") {
  std::mt19937 rng(5);
  const std::vector<Category> cats(dceval::pipeline::all_categories());
  std::uniform_int_distribution<std::size_t> pick(0, cats.size() - 1);
  for (int trial = 0; trial < 50; ++trial) {
    ResultSet rs;
    std::size_t tested = 0;
    for (int u = 0; u < 30; ++u)
      for (const char* compiler : {"javac", "ecj"}) {
        bool is_tested = rng() % 3 != 0;
        tested += is_tested;
        for (const char* d : {"a", "b", "c", "d"})
          rs.cases.push_back(
              make_case("U" + std::to_string(u) + ".java", compiler, d, cats[pick(rng)], is_tested));
      }
    auto p = coverage_partition(rs);
    CHECK(p.tested_total == tested);
    CHECK(p.cell_sum() == tested);
    std::size_t handled_pairs = 0;
    for (const auto& [set, n] : p.cells) handled_pairs += set.size() * n;
    std::size_t correct = 0;
    for (const auto& c : rs.cases) correct += c.tested && dceval::pipeline::is_correct(c.category);
    CHECK(handled_pairs == correct);
  }
}

TEST_CASE("deceptive attribution splits by compiler") {
  ResultSet rs;
  rs.cases = {make_case("A.java", "javac", "x", Category::Deceptive),
              make_case("A.java", "ecj", "x", Category::Deceptive),
              make_case("B.java", "javac", "x", Category::Deceptive),
              make_case("B.java", "ecj", "x", Category::StrictlyEquivalent),
              make_case("C.java", "ecj", "x", Category::Deceptive),
              make_case("C.java", "javac", "y", Category::StrictlyEquivalent)};
  auto a = deceptive_attribution(rs);
  CHECK(a.compilers == std::array<std::string, 2>{"ecj", "javac"});
  CHECK(a.counts.at("x") == std::array<std::size_t, 3>{1, 1, 1});
  CHECK(a.counts.at("y") == std::array<std::size_t, 3>{0, 0, 0});
  CHECK(emit(a, Format::Csv) == "decompiler,ecj_only,javac_only,both\nx,1,1,1\ny,0,0,0\n");
  auto j = nlohmann::json::parse(emit(a, Format::Json));
  CHECK(j.at("decompilers").at("x").at("both") == 1);

  ResultSet one;
  one.cases = {make_case("A.java", "javac", "x", Category::Deceptive)};
  CHECK_THROWS_AS(deceptive_attribution(one), std::invalid_argument);
}

TEST_CASE("summary emitters") {
  auto rows = aggregate(dceval::testing::published_result_set());
  CHECK(load_summary_json(emit(rows, Format::Json)) == rows);

  std::istringstream csv(emit(rows, Format::Csv));
  std::string line;
  std::getline(csv, line);
  CHECK(split(line, ',') == summary_columns());
  std::size_t n = 0;
  while (std::getline(csv, line)) {
    CHECK(split(line, ',').size() == summary_columns().size());
    ++n;
  }
  CHECK(n == rows.size());

  CHECK(emit(rows, Format::Markdown) == read_text(dceval::testing::test_data() / "golden/summary-published.md"));

  CHECK(format_from_string("csv") == Format::Csv);
  CHECK(format_from_string("json") == Format::Json);
  CHECK(format_from_string("md") == Format::Markdown);
  CHECK(format_from_string("markdown") == Format::Markdown);
  CHECK_THROWS_AS(format_from_string("xml"), UnsupportedFormat);
}

TEST_CASE("write_report writes every artifact") {
  TempDir dir;
  ResultSet rs;
  rs.cases = {make_case("A.java", "javac", "x", Category::Deceptive),
              make_case("A.java", "ecj", "x", Category::StrictlyEquivalent),
              make_case("B.java", "javac", "x", Category::EmptyOutput),
              make_case("B.java", "ecj", "x", Category::EquivalentModuloInputs)};
  rs.cases[1].distortion = dceval::srcdiff::DistortionScore{0, 10, 0.0};
  rs.cases[3].distortion = dceval::srcdiff::DistortionScore{2, 10, 0.2};
  auto files = write_report(rs, dir / "r", {true, {}});
  for (const char* f : {"summary.csv", "summary.json", "summary.md", "partition.json", "distortion-distribution.json",
                        "deceptive.json", "chisq.json"})
    CHECK(fs::exists(dir / "r" / f));
  CHECK(files.written.size() == 7);
  CHECK(files.warnings.empty());
  auto chisq = nlohmann::json::parse(read_text(dir / "r/chisq.json"));
  CHECK(chisq.at("x").at("df") == 1);
  auto dist = nlohmann::json::parse(read_text(dir / "r/distortion-distribution.json"));
  CHECK(dist.at("x").at("ratios") == nlohmann::json::array({0.0, 0.2}));

  ResultSet single;
  single.cases = {make_case("A.java", "javac", "x", Category::Deceptive)};
  auto partial = write_report(single, dir / "s", {true, {}});
  CHECK_FALSE(fs::exists(dir / "s/deceptive.json"));
  CHECK(partial.warnings.size() == 2);
  CHECK(nlohmann::json::parse(read_text(dir / "s/chisq.json")).at("x").contains("degenerate"));
}
