#pragma once

// The evaluation cascade for one <project unit, compiler, decompiler> case:
// decompile, measure distortion, recompile, compare bytecode, run the
// covering tests. Results are persisted as JSON lines.

#include <atomic>
#include <compare>
#include <filesystem>
#include <functional>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "dceval/config.hpp"
#include "dceval/normalize.hpp"
#include "dceval/srcdiff.hpp"
#include "dceval/toolchain.hpp"
#include "json.hpp"

namespace dceval::pipeline {

namespace fs = std::filesystem;

enum class Category {
  EmptyOutput,
  SyntacticallyIncorrect,
  Deceptive,
  TestTimeout,
  NotTested,
  EquivalentModuloInputs,
  StrictlyEquivalent,
};

std::string_view to_string(Category c);
Category category_from_string(std::string_view text);
const std::vector<Category>& all_categories();
bool is_recompilable(Category c);
// StrictlyEquivalent or EquivalentModuloInputs.
bool is_correct(Category c);

struct CaseKey {
  std::string project;
  std::string unit;
  std::string compiler;
  std::string decompiler;
  auto operator<=>(const CaseKey&) const = default;
  std::string to_text() const;
};

void to_json(nlohmann::json& j, const CaseKey& k);
void from_json(const nlohmann::json& j, CaseKey& k);

struct TestMap {
  std::map<std::string, std::vector<std::string>> units;
  std::set<std::string> exclude;
  // Covering tests of the unit minus the excluded ones, in file order.
  std::vector<std::string> selection(const std::string& unit) const;
};

TestMap load_testmap(const fs::path& path);

struct CaseResult {
  CaseKey key;
  Category category = Category::EmptyOutput;
  bool tested = false;  // the unit has at least one covering test
  std::optional<srcdiff::DistortionScore> distortion;
  std::optional<classfile::EquivalenceReport> bytecode_report;
  std::optional<toolchain::TestVerdict> test_verdict;
  std::map<std::string, long long> timings_ms;
  std::map<std::string, std::string> diagnostics;  // stage -> log path relative to the run root
  bool operator==(const CaseResult&) const = default;
};

void to_json(nlohmann::json& j, const CaseResult& r);
void from_json(const nlohmann::json& j, CaseResult& r);

// The original sources could not be compiled (or the harness itself failed);
// affected cases are excluded rather than categorized.
class InfrastructureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct InfrastructureFailure {
  CaseKey key;
  std::string message;
  bool operator==(const InfrastructureFailure&) const = default;
};

inline constexpr int kFormatVersion = 1;

struct ResultSet {
  int format_version = kFormatVersion;
  std::string config_hash;
  std::vector<CaseResult> cases;
  std::vector<InfrastructureFailure> failures;
  bool operator==(const ResultSet&) const = default;

  // Cases and failures in key order.
  void sort();
  const CaseResult* find(const CaseKey& key) const;
};

class VersionMismatch : public std::runtime_error {
 public:
  VersionMismatch(int found, int expected);
  int found() const noexcept { return found_; }

 private:
  int found_;
};

class CorruptRecord : public std::runtime_error {
 public:
  CorruptRecord(std::size_t line, const std::string& message);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class ConfigHashMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

ResultSet resultset_load(const fs::path& path);
void resultset_store(const ResultSet& results, const fs::path& path);
// The persisted text with per-stage timings removed.
std::string without_timings(const ResultSet& results);

// Appends one record per line; safe to call from several workers.
class ResultWriter {
 public:
  // With `resume`, an existing file with the same config hash is kept (a
  // truncated last line is dropped) and its keys are reported by done().
  ResultWriter(const fs::path& path, const std::string& config_hash, bool resume);
  void append(const CaseResult& result);
  void append(const InfrastructureFailure& failure);
  const ResultSet& existing() const { return existing_; }
  bool done(const CaseKey& key) const;
  // Rewrites the file in key order.
  ResultSet finish();

 private:
  void write_line(const std::string& line);
  fs::path path_;
  ResultSet existing_;
  std::set<CaseKey> done_;
  std::mutex mutex_;
};

// Evaluates cases against a run configuration, caching original
// compilations and decompiler outputs.
class Evaluator {
 public:
  Evaluator(config::RunConfig config, std::string self_path);

  CaseResult evaluate_case(const CaseKey& key);
  const config::RunConfig& config() const { return config_; }
  std::vector<std::string> units(const std::string& project) const;
  fs::path run_root() const { return config_.output_root; }
  // Where evaluate_case leaves the decompiler output for `key`.
  fs::path decompiled_output(const CaseKey& key) const;

 private:
  struct Original {
    fs::path classes;
    std::map<std::string, std::vector<std::string>> unit_classes;
  };
  struct Decompiled {
    toolchain::ToolOutcome outcome;
    fs::path dir;
    long long millis = 0;
  };

  std::shared_ptr<const Original> original(const std::string& project, const std::string& compiler,
                                           const fs::path& private_dir);
  Decompiled decompiled(const CaseKey& key, const Original& original, const fs::path& case_dir);
  const TestMap& testmap(const std::string& project);
  std::string log(const fs::path& case_dir, const std::string& stage, const toolchain::ToolOutcome& outcome);

  config::RunConfig config_;
  std::string self_;
  std::mutex mutex_;
  std::map<std::pair<std::string, std::string>, std::shared_future<std::shared_ptr<const Original>>> originals_;
  std::map<CaseKey, std::shared_future<Decompiled>> decompilations_;
  std::map<std::string, TestMap> testmaps_;
};

struct CaseFilter {
  std::set<std::string> projects, compilers, decompilers, units;
  bool accepts(const CaseKey& key) const;
};

std::vector<CaseKey> enumerate_cases(const Evaluator& evaluator, const CaseFilter& filter = {});

struct MatrixOptions {
  std::optional<fs::path> results_path;
  bool resume = false;
  int workers = 1;
  std::function<void(const CaseKey&, const CaseResult*, const std::string& error)> on_case;
  const std::atomic<bool>* stop = nullptr;
};

// Evaluates every case not already present in the results file. Per-case
// failures are recorded, never thrown.
ResultSet evaluate_matrix(Evaluator& evaluator, const std::vector<CaseKey>& cases, const MatrixOptions& options);

}  // namespace dceval::pipeline
