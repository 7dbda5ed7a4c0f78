#pragma once

// Meta-decompiler: tries decompilers in ranked order and keeps the first
// output that recompiles.

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "dceval/pipeline.hpp"
#include "json.hpp"

namespace dceval::multidc {

inline constexpr const char* kMultiDcId = "Multi-DC";

enum class Provenance { FromResultSet, Explicit };

struct DecompilerRanking {
  std::vector<std::string> order;
  Provenance provenance = Provenance::Explicit;
  std::map<std::string, double> rates;  // correct / tested, FromResultSet only
  bool operator==(const DecompilerRanking&) const = default;
};

class EmptyResultSet : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Orders decompilers by the rate of StrictlyEquivalent or
// EquivalentModuloInputs cases among tested cases, highest first; equal
// rates fall back to the id in lexicographic order.
DecompilerRanking rank_decompilers(const pipeline::ResultSet& results);

// Throws std::invalid_argument on an empty list or duplicates.
DecompilerRanking explicit_ranking(const std::vector<std::string>& order);

struct Options {
  // Keep trying past recompilable results whose tests fail or time out. When
  // no later decompiler does better, the first recompilable result is kept.
  bool fallback_on_tests = false;
};

struct MultiDcResult {
  pipeline::CaseResult result;  // key.decompiler is the chosen decompiler
  std::string chosen;
  std::vector<std::string> attempts;
};

// `unit.decompiler` is ignored. Only InfrastructureError escapes.
MultiDcResult multi_decompile(const pipeline::CaseKey& unit, const DecompilerRanking& ranking,
                              pipeline::Evaluator& evaluator, const Options& options = {});

// The chosen case relabelled with the Multi-DC id, for aggregation beside
// the individual decompilers.
pipeline::CaseResult as_multidc_case(const MultiDcResult& r);

void to_json(nlohmann::json& j, const DecompilerRanking& r);
void to_json(nlohmann::json& j, const MultiDcResult& r);

}  // namespace dceval::multidc
