#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "dceval/report.hpp"

namespace dceval::report {

using nlohmann::json;
using pipeline::Category;

namespace {

double quantile(const std::vector<double>& sorted, double q) {
  double pos = q * static_cast<double>(sorted.size() - 1);
  auto lo = static_cast<std::size_t>(std::floor(pos));
  auto hi = static_cast<std::size_t>(std::ceil(pos));
  double frac = pos - static_cast<double>(lo);
  return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}

double ratio(std::size_t num, std::size_t den) {
  return den ? static_cast<double>(num) / static_cast<double>(den) : 0.0;
}

std::string fixed(double v, int digits) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

std::string sig3(double v) {
  std::ostringstream os;
  os << std::setprecision(3) << v;
  return os.str();
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

// Series expansion of the lower regularized gamma P(a, x).
double gamma_series(double a, double x) {
  double sum = 1.0 / a, term = sum;
  for (int n = 1; n < 10000; ++n) {
    term *= x / (a + n);
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * 1e-16) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Continued fraction for Q(a, x), evaluated with the modified Lentz method.
double gamma_fraction(double a, double x) {
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 10000; ++i) {
    double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < 1e-16) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

std::string subset_label(const std::vector<std::string>& s) {
  std::string out;
  for (const auto& id : s) out += (out.empty() ? "" : "+") + id;
  return out.empty() ? "(none)" : out;
}

void write_file(const fs::path& path, const std::string& text, ReportFiles& files) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path.string());
  files.written.push_back(path);
}

}  // namespace

DistributionStats describe(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("empty sample");
  std::sort(values.begin(), values.end());
  DistributionStats s;
  s.count = values.size();
  double sum = 0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  s.median = quantile(values, 0.5);
  s.q1 = quantile(values, 0.25);
  s.q3 = quantile(values, 0.75);
  s.min = values.front();
  s.max = values.back();
  return s;
}

std::vector<SummaryRow> aggregate(const pipeline::ResultSet& results) {
  std::map<std::string, SummaryRow> rows;
  std::map<std::string, std::vector<double>> distortions;
  for (const auto& c : results.cases) {
    auto& r = rows[c.key.decompiler];
    if (r.decompiler.empty()) {
      r.decompiler = c.key.decompiler;
      for (Category k : pipeline::all_categories()) r.categories[std::string(pipeline::to_string(k))] = 0;
    }
    ++r.total_cases;
    ++r.categories[std::string(pipeline::to_string(c.category))];
    bool recompilable = pipeline::is_recompilable(c.category);
    if (recompilable) ++r.n_recompilable;
    if (c.tested) {
      ++r.tested_cases;
      if (recompilable) ++r.n_recompilable_tested;
      if (pipeline::is_correct(c.category)) ++r.n_pass_tests;
      if (c.category == Category::Deceptive) ++r.n_deceptive;
    }
    if (c.distortion) distortions[c.key.decompiler].push_back(c.distortion->ratio);
  }
  std::vector<SummaryRow> out;
  for (auto& [id, r] : rows) {
    r.recompilable_ratio = ratio(r.n_recompilable, r.total_cases);
    r.pass_ratio = ratio(r.n_pass_tests, r.tested_cases);
    if (auto it = distortions.find(id); it != distortions.end()) r.distortion = describe(it->second);
    out.push_back(std::move(r));
  }
  return out;
}

double regularized_upper_gamma(double a, double x) {
  if (!(a > 0) || !(x >= 0)) throw std::invalid_argument("regularized_upper_gamma needs a > 0 and x >= 0");
  if (x == 0) return 1.0;
  if (std::isinf(x)) return 0.0;
  if (x < a + 1.0) return 1.0 - gamma_series(a, x);
  return gamma_fraction(a, x);
}

ChiSquareResult chi_squared(const Table2x2& t) {
  double row[2] = {t[0][0] + t[0][1], t[1][0] + t[1][1]};
  double col[2] = {t[0][0] + t[1][0], t[0][1] + t[1][1]};
  double total = row[0] + row[1];
  for (const auto& r : t)
    for (double v : r)
      if (v < 0) throw std::invalid_argument("negative count in contingency table");
  if (row[0] == 0 || row[1] == 0 || col[0] == 0 || col[1] == 0)
    throw DegenerateTable("contingency table has a zero margin");
  ChiSquareResult r;
  r.table = t;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      double expected = row[i] * col[j] / total;
      double d = t[i][j] - expected;
      r.statistic += d * d / expected;
    }
  r.p_value = std::clamp(regularized_upper_gamma(0.5, r.statistic / 2.0), 0.0, 1.0);
  return r;
}

ChiSquareResult chi_squared_compiler_effect(const pipeline::ResultSet& results, const std::string& decompiler) {
  std::map<std::string, std::array<double, 2>> counts;
  for (const auto& c : results.cases) {
    if (c.key.decompiler != decompiler) continue;
    counts[c.key.compiler][pipeline::is_recompilable(c.category) ? 0 : 1] += 1;
  }
  if (counts.size() != 2)
    throw DegenerateTable("decompiler '" + decompiler + "' has results for " + std::to_string(counts.size()) +
                          " compiler(s); two are needed");
  auto first = counts.begin();
  auto second = std::next(first);
  ChiSquareResult r = chi_squared({first->second, second->second});
  r.rows = {first->first, second->first};
  return r;
}

std::map<std::string, std::size_t> CoveragePartition::unique() const {
  std::map<std::string, std::size_t> out;
  for (const auto& d : decompilers) out[d] = 0;
  for (const auto& [set, n] : cells)
    if (set.size() == 1) out[set.front()] += n;
  return out;
}

std::size_t CoveragePartition::all() const {
  auto it = cells.find(decompilers);
  return it == cells.end() ? 0 : it->second;
}

std::size_t CoveragePartition::none() const {
  auto it = cells.find({});
  return it == cells.end() ? 0 : it->second;
}

std::size_t CoveragePartition::cell_sum() const {
  std::size_t n = 0;
  for (const auto& [set, count] : cells) n += count;
  return n;
}

CoveragePartition coverage_partition(const pipeline::ResultSet& results, const std::vector<std::string>& decompilers) {
  std::set<std::string> chosen(decompilers.begin(), decompilers.end());
  if (chosen.empty())
    for (const auto& c : results.cases) chosen.insert(c.key.decompiler);
  std::map<std::tuple<std::string, std::string, std::string>, std::set<std::string>> handled;
  for (const auto& c : results.cases) {
    if (!c.tested) continue;
    auto& h = handled[{c.key.project, c.key.unit, c.key.compiler}];
    if (chosen.count(c.key.decompiler) && pipeline::is_correct(c.category)) h.insert(c.key.decompiler);
  }
  CoveragePartition p;
  p.decompilers.assign(chosen.begin(), chosen.end());
  for (const auto& [unit, set] : handled) {
    ++p.cells[std::vector<std::string>(set.begin(), set.end())];
    ++p.tested_total;
  }
  return p;
}

DeceptiveAttribution deceptive_attribution(const pipeline::ResultSet& results) {
  std::set<std::string> compilers, decompilers;
  for (const auto& c : results.cases) {
    compilers.insert(c.key.compiler);
    decompilers.insert(c.key.decompiler);
  }
  if (compilers.size() != 2)
    throw std::invalid_argument("deceptive attribution needs exactly two compilers, found " +
                                std::to_string(compilers.size()));
  DeceptiveAttribution a;
  a.compilers = {*compilers.begin(), *std::next(compilers.begin())};
  std::map<std::tuple<std::string, std::string, std::string>, std::array<bool, 2>> deceptive;
  for (const auto& d : decompilers) a.counts[d] = {0, 0, 0};
  for (const auto& c : results.cases) {
    if (c.category != Category::Deceptive) continue;
    deceptive[{c.key.decompiler, c.key.project, c.key.unit}][c.key.compiler == a.compilers[0] ? 0 : 1] = true;
  }
  for (const auto& [key, flags] : deceptive) {
    auto& n = a.counts[std::get<0>(key)];
    if (flags[0] && flags[1])
      ++n[2];
    else
      ++n[flags[0] ? 0 : 1];
  }
  return a;
}

Format format_from_string(std::string_view name) {
  if (name == "csv") return Format::Csv;
  if (name == "json") return Format::Json;
  if (name == "markdown" || name == "md") return Format::Markdown;
  throw UnsupportedFormat("unsupported format '" + std::string(name) + "'");
}

std::string_view to_string(Format f) {
  switch (f) {
    case Format::Csv: return "csv";
    case Format::Json: return "json";
    case Format::Markdown: return "markdown";
  }
  return "?";
}

const std::vector<std::string>& summary_columns() {
  static const std::vector<std::string> cols = [] {
    std::vector<std::string> c = {"decompiler",     "total_cases",        "n_recompilable", "recompilable_ratio",
                                  "tested_cases",   "n_recompilable_tested", "n_pass_tests", "pass_ratio",
                                  "n_deceptive"};
    for (Category k : pipeline::all_categories()) c.push_back("n_" + std::string(pipeline::to_string(k)));
    for (const char* s : {"distortion_count", "distortion_mean", "distortion_median", "distortion_q1",
                          "distortion_q3", "distortion_min", "distortion_max"})
      c.push_back(s);
    return c;
  }();
  return cols;
}

std::string emit(const std::vector<SummaryRow>& rows, Format format) {
  switch (format) {
    case Format::Json:
      return json(rows).dump(2) + "\n";
    case Format::Csv: {
      std::ostringstream os;
      const auto& cols = summary_columns();
      for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
      os << "\n";
      for (const auto& r : rows) {
        std::vector<std::string> f = {csv_field(r.decompiler),
                                      std::to_string(r.total_cases),
                                      std::to_string(r.n_recompilable),
                                      fixed(r.recompilable_ratio, 6),
                                      std::to_string(r.tested_cases),
                                      std::to_string(r.n_recompilable_tested),
                                      std::to_string(r.n_pass_tests),
                                      fixed(r.pass_ratio, 6),
                                      std::to_string(r.n_deceptive)};
        for (Category k : pipeline::all_categories())
          f.push_back(std::to_string(r.categories.at(std::string(pipeline::to_string(k)))));
        if (r.distortion) {
          const auto& d = *r.distortion;
          f.push_back(std::to_string(d.count));
          for (double v : {d.mean, d.median, d.q1, d.q3, d.min, d.max}) f.push_back(fixed(v, 6));
        } else {
          f.push_back("0");
          for (int i = 0; i < 6; ++i) f.push_back("");
        }
        for (std::size_t i = 0; i < f.size(); ++i) os << (i ? "," : "") << f[i];
        os << "\n";
      }
      return os.str();
    }
    case Format::Markdown: {
      std::ostringstream os;
      os << "| Decompiler | #Recompilable | #PassTest | #Deceptive | ASTDiff |\n";
      os << "|---|---|---|---|---|\n";
      for (const auto& r : rows) {
        os << "| " << r.decompiler << " | " << r.n_recompilable << " (" << fixed(r.recompilable_ratio, 2) << ") | "
           << r.n_pass_tests << " (" << fixed(r.pass_ratio, 2) << ") | " << r.n_deceptive << " | "
           << (r.distortion ? fixed(r.distortion->mean, 2) : "n/a") << " |\n";
      }
      if (!rows.empty())
        os << "\nRecompilable over " << rows.front().total_cases << " cases per decompiler; PassTest and Deceptive over "
           << rows.front().tested_cases << " tested cases.\n";
      return os.str();
    }
  }
  throw UnsupportedFormat("unsupported format");
}

std::string emit(const CoveragePartition& p, Format format) {
  if (format == Format::Json) return json(p).dump(2) + "\n";
  if (format != Format::Csv) throw UnsupportedFormat("coverage partition supports csv and json, not " +
                                                     std::string(to_string(format)));
  std::ostringstream os;
  os << "handled_by,count\n";
  for (const auto& [set, n] : p.cells) os << csv_field(subset_label(set)) << "," << n << "\n";
  return os.str();
}

std::string emit(const DeceptiveAttribution& a, Format format) {
  if (format == Format::Json) return json(a).dump(2) + "\n";
  if (format != Format::Csv) throw UnsupportedFormat("deceptive attribution supports csv and json, not " +
                                                     std::string(to_string(format)));
  std::ostringstream os;
  os << "decompiler," << csv_field(a.compilers[0] + "_only") << "," << csv_field(a.compilers[1] + "_only")
     << ",both\n";
  for (const auto& [d, n] : a.counts) os << csv_field(d) << "," << n[0] << "," << n[1] << "," << n[2] << "\n";
  return os.str();
}

std::vector<SummaryRow> load_summary_json(const std::string& text) {
  return json::parse(text).get<std::vector<SummaryRow>>();
}

CoveragePartition load_partition_json(const std::string& text) {
  json j = json::parse(text);
  CoveragePartition p;
  p.decompilers = j.at("decompilers").get<std::vector<std::string>>();
  p.tested_total = j.at("tested_total").get<std::size_t>();
  for (const auto& cell : j.at("cells")) p.cells[cell.at("handled_by").get<std::vector<std::string>>()] = cell.at("count");
  return p;
}

void to_json(json& j, const DistributionStats& s) {
  j = {{"count", s.count}, {"mean", s.mean}, {"median", s.median}, {"q1", s.q1},
       {"q3", s.q3},       {"min", s.min},   {"max", s.max}};
}

void from_json(const json& j, DistributionStats& s) {
  j.at("count").get_to(s.count);
  j.at("mean").get_to(s.mean);
  j.at("median").get_to(s.median);
  j.at("q1").get_to(s.q1);
  j.at("q3").get_to(s.q3);
  j.at("min").get_to(s.min);
  j.at("max").get_to(s.max);
}

void to_json(json& j, const SummaryRow& r) {
  j = {{"decompiler", r.decompiler},
       {"total_cases", r.total_cases},
       {"n_recompilable", r.n_recompilable},
       {"recompilable_ratio", r.recompilable_ratio},
       {"tested_cases", r.tested_cases},
       {"n_recompilable_tested", r.n_recompilable_tested},
       {"n_pass_tests", r.n_pass_tests},
       {"pass_ratio", r.pass_ratio},
       {"n_deceptive", r.n_deceptive},
       {"categories", r.categories},
       {"distortion", r.distortion ? json(*r.distortion) : json(nullptr)}};
}

void from_json(const json& j, SummaryRow& r) {
  j.at("decompiler").get_to(r.decompiler);
  j.at("total_cases").get_to(r.total_cases);
  j.at("n_recompilable").get_to(r.n_recompilable);
  j.at("recompilable_ratio").get_to(r.recompilable_ratio);
  j.at("tested_cases").get_to(r.tested_cases);
  j.at("n_recompilable_tested").get_to(r.n_recompilable_tested);
  j.at("n_pass_tests").get_to(r.n_pass_tests);
  j.at("pass_ratio").get_to(r.pass_ratio);
  j.at("n_deceptive").get_to(r.n_deceptive);
  j.at("categories").get_to(r.categories);
  if (j.at("distortion").is_null())
    r.distortion.reset();
  else
    r.distortion = j.at("distortion").get<DistributionStats>();
}

void to_json(json& j, const ChiSquareResult& r) {
  j = {{"rows", r.rows},
       {"columns", {"recompilable", "not_recompilable"}},
       {"table", r.table},
       {"statistic", r.statistic},
       {"df", r.df},
       {"p_value", r.p_value},
       {"p_value_3sig", sig3(r.p_value)}};
}

void to_json(json& j, const CoveragePartition& p) {
  json cells = json::array();
  for (const auto& [set, n] : p.cells) cells.push_back({{"handled_by", set}, {"count", n}});
  j = {{"decompilers", p.decompilers}, {"tested_total", p.tested_total}, {"cells", cells},
       {"unique", p.unique()},         {"all", p.all()},                 {"none", p.none()}};
}

void to_json(json& j, const DeceptiveAttribution& a) {
  json rows = json::object();
  for (const auto& [d, n] : a.counts)
    rows[d] = {{a.compilers[0] + "_only", n[0]}, {a.compilers[1] + "_only", n[1]}, {"both", n[2]}};
  j = {{"compilers", a.compilers}, {"decompilers", rows}};
}

ReportFiles write_report(const pipeline::ResultSet& results, const fs::path& dir, const ReportOptions& options) {
  fs::create_directories(dir);
  ReportFiles files;
  auto rows = aggregate(results);
  write_file(dir / "summary.csv", emit(rows, Format::Csv), files);
  write_file(dir / "summary.json", emit(rows, Format::Json), files);
  write_file(dir / "summary.md", emit(rows, Format::Markdown), files);
  write_file(dir / "partition.json", emit(coverage_partition(results, options.partition_decompilers), Format::Json),
             files);

  json dist = json::object();
  std::map<std::string, std::vector<double>> samples;
  for (const auto& c : results.cases)
    if (c.distortion) samples[c.key.decompiler].push_back(c.distortion->ratio);
  for (auto& [d, v] : samples) {
    auto stats = describe(v);
    std::sort(v.begin(), v.end());
    dist[d] = {{"stats", stats}, {"ratios", v}};
  }
  write_file(dir / "distortion-distribution.json", dist.dump(2) + "\n", files);

  try {
    write_file(dir / "deceptive.json", emit(deceptive_attribution(results), Format::Json), files);
  } catch (const std::invalid_argument& e) {
    files.warnings.push_back(std::string("deceptive attribution skipped: ") + e.what());
  }

  if (options.chisq) {
    json out = json::object();
    for (const auto& r : rows) {
      try {
        out[r.decompiler] = chi_squared_compiler_effect(results, r.decompiler);
      } catch (const DegenerateTable& e) {
        out[r.decompiler] = {{"degenerate", e.what()}};
        files.warnings.push_back("chi-squared for " + r.decompiler + ": " + e.what());
      }
    }
    write_file(dir / "chisq.json", out.dump(2) + "\n", files);
  }
  return files;
}

}  // namespace dceval::report
