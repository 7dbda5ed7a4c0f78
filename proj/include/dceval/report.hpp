#pragma once

// Aggregation of a ResultSet into per-decompiler summaries, compiler-effect
// chi-squared tests, coverage partitions and deceptive-case attribution.

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dceval/pipeline.hpp"
#include "json.hpp"

namespace dceval::report {

namespace fs = std::filesystem;

struct DistributionStats {
  std::size_t count = 0;
  double mean = 0, median = 0, q1 = 0, q3 = 0, min = 0, max = 0;
  bool operator==(const DistributionStats&) const = default;
};

// Quartiles use linear interpolation between order statistics. Throws
// std::invalid_argument on an empty sample.
DistributionStats describe(std::vector<double> values);

struct SummaryRow {
  std::string decompiler;
  std::size_t total_cases = 0;  // denominator of the recompilable ratio
  std::size_t n_recompilable = 0;
  double recompilable_ratio = 0;
  std::size_t tested_cases = 0;  // denominator of the pass ratio
  std::size_t n_recompilable_tested = 0;
  std::size_t n_pass_tests = 0;
  double pass_ratio = 0;
  std::size_t n_deceptive = 0;
  std::map<std::string, std::size_t> categories;  // every category, zeros included
  std::optional<DistributionStats> distortion;    // over cases with a distortion score
  bool operator==(const SummaryRow&) const = default;
};

// One row per decompiler present in the results, ordered by id.
std::vector<SummaryRow> aggregate(const pipeline::ResultSet& results);

class DegenerateTable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Q(a, x) = Gamma(a, x) / Gamma(a) for a > 0, x >= 0.
double regularized_upper_gamma(double a, double x);

using Table2x2 = std::array<std::array<double, 2>, 2>;

struct ChiSquareResult {
  std::array<std::string, 2> rows{"a", "b"};  // compilers
  Table2x2 table{};                           // rows x {correct, incorrect}
  double statistic = 0;
  double p_value = 1;
  int df = 1;
};

// Pearson statistic without continuity correction. Throws DegenerateTable
// when a row or column total is zero.
ChiSquareResult chi_squared(const Table2x2& table);

// 2x2 table of {recompilable, not} per compiler for one decompiler; the
// compilers are taken in lexicographic order. Throws DegenerateTable unless
// exactly two compilers are present.
ChiSquareResult chi_squared_compiler_effect(const pipeline::ResultSet& results, const std::string& decompiler);

// A tested case is one (project, unit, compiler) triple with covering tests.
struct CoveragePartition {
  std::vector<std::string> decompilers;
  std::map<std::vector<std::string>, std::size_t> cells;  // handled-by set -> count, non-zero cells only
  std::size_t tested_total = 0;

  std::map<std::string, std::size_t> unique() const;
  std::size_t all() const;
  std::size_t none() const;
  std::size_t cell_sum() const;
};

// "Handled" means StrictlyEquivalent or EquivalentModuloInputs. An empty
// `decompilers` list selects every decompiler in the results.
CoveragePartition coverage_partition(const pipeline::ResultSet& results,
                                     const std::vector<std::string>& decompilers = {});

struct DeceptiveAttribution {
  std::array<std::string, 2> compilers;
  std::map<std::string, std::array<std::size_t, 3>> counts;  // decompiler -> {first only, second only, both}
};

// Throws std::invalid_argument unless exactly two compilers are present.
DeceptiveAttribution deceptive_attribution(const pipeline::ResultSet& results);

enum class Format { Csv, Json, Markdown };

class UnsupportedFormat : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

Format format_from_string(std::string_view name);
std::string_view to_string(Format f);

// Columns of the summary CSV, in order.
const std::vector<std::string>& summary_columns();

std::string emit(const std::vector<SummaryRow>& rows, Format format);
std::string emit(const CoveragePartition& partition, Format format);  // Csv or Json
std::string emit(const DeceptiveAttribution& attribution, Format format);  // Csv or Json
std::vector<SummaryRow> load_summary_json(const std::string& text);
CoveragePartition load_partition_json(const std::string& text);

void to_json(nlohmann::json& j, const DistributionStats& s);
void from_json(const nlohmann::json& j, DistributionStats& s);
void to_json(nlohmann::json& j, const SummaryRow& r);
void from_json(const nlohmann::json& j, SummaryRow& r);
void to_json(nlohmann::json& j, const ChiSquareResult& r);
void to_json(nlohmann::json& j, const CoveragePartition& p);
void to_json(nlohmann::json& j, const DeceptiveAttribution& a);

struct ReportOptions {
  bool chisq = false;
  std::vector<std::string> partition_decompilers;
};

struct ReportFiles {
  std::vector<fs::path> written;
  std::vector<std::string> warnings;
};

// Writes summary.{csv,json,md}, partition.json, distortion-distribution.json,
// deceptive.json (with two compilers) and chisq.json (with `chisq`).
ReportFiles write_report(const pipeline::ResultSet& results, const fs::path& dir, const ReportOptions& options);

}  // namespace dceval::report
