#include <algorithm>
#include <optional>
#include <set>

#include "dceval/multidc.hpp"

namespace dceval::multidc {

using pipeline::Category;

DecompilerRanking rank_decompilers(const pipeline::ResultSet& results) {
  if (results.cases.empty()) throw EmptyResultSet("no cases to rank decompilers by");
  std::map<std::string, std::pair<std::size_t, std::size_t>> counts;  // correct, tested
  for (const auto& c : results.cases) {
    auto& [correct, tested] = counts[c.key.decompiler];
    if (!c.tested) continue;
    ++tested;
    if (pipeline::is_correct(c.category)) ++correct;
  }
  DecompilerRanking r;
  r.provenance = Provenance::FromResultSet;
  for (const auto& [id, ct] : counts) {
    r.order.push_back(id);
    r.rates[id] = ct.second ? static_cast<double>(ct.first) / static_cast<double>(ct.second) : 0.0;
  }
  std::stable_sort(r.order.begin(), r.order.end(), [&](const std::string& a, const std::string& b) {
    if (r.rates[a] != r.rates[b]) return r.rates[a] > r.rates[b];
    return a < b;
  });
  return r;
}

DecompilerRanking explicit_ranking(const std::vector<std::string>& order) {
  if (order.empty()) throw std::invalid_argument("empty decompiler ranking");
  std::set<std::string> seen;
  for (const auto& id : order)
    if (!seen.insert(id).second) throw std::invalid_argument("decompiler '" + id + "' ranked twice");
  return {order, Provenance::Explicit, {}};
}

MultiDcResult multi_decompile(const pipeline::CaseKey& unit, const DecompilerRanking& ranking,
                              pipeline::Evaluator& evaluator, const Options& options) {
  if (ranking.order.empty()) throw std::invalid_argument("empty decompiler ranking");
  MultiDcResult out;
  std::optional<std::pair<pipeline::CaseResult, std::string>> first_recompilable;
  for (const auto& id : ranking.order) {
    pipeline::CaseKey key = unit;
    key.decompiler = id;
    out.attempts.push_back(id);
    out.result = evaluator.evaluate_case(key);
    out.chosen = id;
    Category c = out.result.category;
    if (!pipeline::is_recompilable(c)) continue;
    if (options.fallback_on_tests && (c == Category::Deceptive || c == Category::TestTimeout)) {
      if (!first_recompilable) first_recompilable.emplace(out.result, id);
      continue;
    }
    return out;
  }
  if (first_recompilable) {
    out.result = std::move(first_recompilable->first);
    out.chosen = std::move(first_recompilable->second);
  }
  return out;
}

pipeline::CaseResult as_multidc_case(const MultiDcResult& r) {
  pipeline::CaseResult c = r.result;
  c.key.decompiler = kMultiDcId;
  c.diagnostics["chosen"] = r.chosen;
  return c;
}

void to_json(nlohmann::json& j, const DecompilerRanking& r) {
  j = {{"order", r.order},
       {"provenance", r.provenance == Provenance::FromResultSet ? "FromResultSet" : "Explicit"},
       {"rates", r.rates}};
}

void to_json(nlohmann::json& j, const MultiDcResult& r) {
  j = {{"key", r.result.key},
       {"chosen", r.chosen},
       {"attempts", r.attempts},
       {"category", pipeline::to_string(r.result.category)}};
}

}  // namespace dceval::multidc
