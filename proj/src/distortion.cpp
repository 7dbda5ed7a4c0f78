#include <string>

#include "dceval/srcdiff.hpp"

namespace dceval::srcdiff {

namespace {

constexpr std::size_t kRecordedActions = 20;

}  // namespace

DistortionScore distortion(const EditScript& script, const SourceTree& original) {
  DistortionScore s;
  for (const auto& a : script.actions)
    if (!(a.type == ActionType::Update && has_identifier_label(a.kind))) ++s.counted_edits;
  s.original_nodes = std::max<std::size_t>(1, original.node_count());
  s.ratio = static_cast<double>(s.counted_edits) / static_cast<double>(s.original_nodes);
  return s;
}

DistortionRecord score_sources(const std::string& path, std::string_view original, std::string_view decompiled,
                               const DiffOptions& options) {
  DistortionRecord r;
  r.path = path;
  SourceTree a, b;
  try {
    a = parse_source(original);
  } catch (const ParseError& e) {
    r.error = std::string("original: ") + e.what();
    return r;
  }
  try {
    b = parse_source(decompiled);
  } catch (const ParseError& e) {
    r.error = std::string("decompiled: ") + e.what();
    return r;
  }
  EditScript script = diff(a, b, options);
  for (const auto& act : script.actions) {
    switch (act.type) {
      case ActionType::Insert: ++r.inserts; break;
      case ActionType::Delete: ++r.deletes; break;
      case ActionType::Update:
        ++r.updates;
        if (has_identifier_label(act.kind)) ++r.renames;
        break;
      case ActionType::Move: ++r.moves; break;
    }
    if (r.actions.size() < kRecordedActions) r.actions.push_back(act.to_text());
  }
  r.score = distortion(script, a);
  return r;
}

void to_json(nlohmann::json& j, const DistortionScore& s) {
  j = {{"counted_edits", s.counted_edits}, {"original_nodes", s.original_nodes}, {"ratio", s.ratio}};
}

void from_json(const nlohmann::json& j, DistortionScore& s) {
  j.at("counted_edits").get_to(s.counted_edits);
  j.at("original_nodes").get_to(s.original_nodes);
  j.at("ratio").get_to(s.ratio);
}

void to_json(nlohmann::json& j, const DistortionRecord& r) {
  j = {{"path", r.path},         {"inserts", r.inserts}, {"deletes", r.deletes}, {"updates", r.updates},
       {"moves", r.moves},       {"renames", r.renames}, {"actions", r.actions}};
  j["score"] = r.score ? nlohmann::json(*r.score) : nlohmann::json(nullptr);
  if (!r.error.empty()) j["error"] = r.error;
}

void from_json(const nlohmann::json& j, DistortionRecord& r) {
  j.at("path").get_to(r.path);
  j.at("inserts").get_to(r.inserts);
  j.at("deletes").get_to(r.deletes);
  j.at("updates").get_to(r.updates);
  j.at("moves").get_to(r.moves);
  j.at("renames").get_to(r.renames);
  j.at("actions").get_to(r.actions);
  if (j.at("score").is_null()) r.score.reset();
  else r.score = j.at("score").get<DistortionScore>();
  r.error = j.value("error", std::string());
}

}  // namespace dceval::srcdiff
