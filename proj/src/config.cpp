#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "dceval/config.hpp"
#include "dceval/stubs.hpp"

namespace dceval::config {

namespace {

using nlohmann::json;

std::string index_path(const std::string& field, std::size_t i) { return field + "[" + std::to_string(i) + "]"; }

void check_keys(const json& j, const std::string& field, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(field, "must be an object");
  for (const auto& [k, v] : j.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || k == a;
    if (!known) throw ConfigError(field.empty() ? k : field + "." + k, "unknown field");
  }
}

template <typename T>
T get_field(const json& j, const std::string& key, const std::string& field) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(field.empty() ? key : field + "." + key,
                      j.contains(key) ? "has the wrong type" : "is required");
  }
}

std::string expand_env(const std::string& text, const std::string& field) {
  std::string out;
  for (std::size_t i = 0; i < text.size();) {
    if (text.compare(i, 2, "${") == 0) {
      auto close = text.find('}', i);
      if (close == std::string::npos) throw ConfigError(field, "unterminated ${ in path");
      std::string name = text.substr(i + 2, close - i - 2);
      const char* value = std::getenv(name.c_str());
      if (!value) throw ConfigError(field, "environment variable " + name + " is not set");
      out += value;
      i = close + 1;
    } else {
      out += text[i++];
    }
  }
  return out;
}

fs::path resolve(const fs::path& base, const std::string& text, const std::string& field) {
  fs::path p = expand_env(text, field);
  return p.is_absolute() ? p.lexically_normal() : (base / p).lexically_normal();
}

json pipeline_json(const PipelineOptions& p, bool for_hash) {
  json j = {{"ignore_attributes", std::vector<std::string>(p.ignore_attributes.begin(), p.ignore_attributes.end())},
            {"diff",
             {{"min_height", p.diff.min_height},
              {"min_dice", p.diff.min_dice},
              {"max_recovery_size", p.diff.max_recovery_size},
              {"refine_limit", p.diff.refine_limit},
              {"exact_limit", p.diff.exact_limit}}},
            {"force_tests", p.force_tests},
            {"test_timeout_ms", p.test_timeout.count()},
            {"testrunner", p.testrunner}};
  if (!for_hash) {
    j["workers"] = p.workers;
    j["cache"] = p.cache;
  }
  return j;
}

json project_json(const ProjectConfig& p) {
  std::vector<std::string> cp;
  for (const auto& c : p.classpath) cp.push_back(c.string());
  return {{"id", p.id},
          {"root", p.root.string()},
          {"source_root", p.source_root.string()},
          {"classpath", cp},
          {"testmap", p.testmap.string()}};
}

}  // namespace

bool PipelineOptions::operator==(const PipelineOptions& o) const {
  return pipeline_json(*this, false) == pipeline_json(o, false);
}

std::vector<fs::path> ProjectConfig::classpath_dirs() const {
  std::vector<fs::path> out;
  for (const auto& c : classpath) out.push_back(root / c);
  return out;
}

const ProjectConfig& RunConfig::project(const std::string& id) const {
  for (const auto& p : projects)
    if (p.id == id) return p;
  throw std::out_of_range("unknown project '" + id + "'");
}

const toolchain::ToolSpec& RunConfig::tool(const std::string& id) const {
  for (const auto& t : tools)
    if (t.id == id) return t;
  throw std::out_of_range("unknown tool '" + id + "'");
}

std::vector<std::string> RunConfig::tool_ids(toolchain::ToolKind kind) const {
  std::vector<std::string> out;
  for (const auto& t : tools)
    if (t.kind == kind) out.push_back(t.id);
  return out;
}

RunConfig parse_config(const json& j, const fs::path& base) {
  RunConfig c;
  check_keys(j, "", {"projects", "tools", "pipeline", "multidc", "output_root"});
  const json& projects = j.contains("projects") ? j.at("projects") : json::array();
  if (!projects.is_array()) throw ConfigError("projects", "must be an array");
  for (std::size_t i = 0; i < projects.size(); ++i) {
    std::string f = index_path("projects", i);
    const json& pj = projects[i];
    check_keys(pj, f, {"id", "root", "source_root", "classpath", "testmap"});
    ProjectConfig p;
    p.id = get_field<std::string>(pj, "id", f);
    p.root = resolve(base, get_field<std::string>(pj, "root", f), f + ".root");
    p.source_root = pj.contains("source_root") ? get_field<std::string>(pj, "source_root", f) : "src";
    if (pj.contains("classpath"))
      for (const auto& s : get_field<std::vector<std::string>>(pj, "classpath", f)) p.classpath.push_back(s);
    p.testmap = get_field<std::string>(pj, "testmap", f);
    c.projects.push_back(std::move(p));
  }
  const json& tools = j.contains("tools") ? j.at("tools") : json::array();
  if (!tools.is_array()) throw ConfigError("tools", "must be an array");
  for (std::size_t i = 0; i < tools.size(); ++i) {
    std::string f = index_path("tools", i);
    check_keys(tools[i], f, {"id", "kind", "command", "workdir", "environment", "timeout_ms", "version_probe"});
    try {
      c.tools.push_back(tools[i].get<toolchain::ToolSpec>());
    } catch (const json::exception&) {
      for (const char* k : {"id", "kind", "command"})
        if (!tools[i].contains(k)) throw ConfigError(f + "." + k, "is required");
      throw ConfigError(f, "has a field of the wrong type");
    } catch (const std::invalid_argument& e) {
      throw ConfigError(f + ".kind", e.what());
    }
  }
  if (j.contains("pipeline")) {
    const json& pj = j.at("pipeline");
    std::string f = "pipeline";
    check_keys(pj, f, {"workers", "ignore_attributes", "diff", "force_tests", "cache", "test_timeout_ms", "testrunner"});
    auto& p = c.pipeline;
    if (pj.contains("workers")) p.workers = get_field<int>(pj, "workers", f);
    if (pj.contains("ignore_attributes")) {
      auto names = get_field<std::vector<std::string>>(pj, "ignore_attributes", f);
      p.ignore_attributes = classfile::AttributeIgnoreSet(names.begin(), names.end());
    }
    if (pj.contains("diff")) {
      const json& d = pj.at("diff");
      std::string df = f + ".diff";
      check_keys(d, df, {"min_height", "min_dice", "max_recovery_size", "refine_limit", "exact_limit"});
      if (d.contains("min_height")) p.diff.min_height = get_field<int>(d, "min_height", df);
      if (d.contains("min_dice")) p.diff.min_dice = get_field<double>(d, "min_dice", df);
      if (d.contains("max_recovery_size")) p.diff.max_recovery_size = get_field<int>(d, "max_recovery_size", df);
      if (d.contains("refine_limit")) p.diff.refine_limit = get_field<std::size_t>(d, "refine_limit", df);
      if (d.contains("exact_limit")) p.diff.exact_limit = get_field<std::size_t>(d, "exact_limit", df);
    }
    if (pj.contains("force_tests")) p.force_tests = get_field<bool>(pj, "force_tests", f);
    if (pj.contains("cache")) p.cache = get_field<bool>(pj, "cache", f);
    if (pj.contains("test_timeout_ms"))
      p.test_timeout = toolchain::Millis(get_field<long long>(pj, "test_timeout_ms", f));
    if (pj.contains("testrunner")) p.testrunner = get_field<std::string>(pj, "testrunner", f);
  }
  if (j.contains("multidc")) {
    const json& mj = j.at("multidc");
    check_keys(mj, "multidc", {"ranking", "fallback_on_tests"});
    if (mj.contains("ranking")) c.multidc.ranking = get_field<std::vector<std::string>>(mj, "ranking", "multidc");
    if (mj.contains("fallback_on_tests"))
      c.multidc.fallback_on_tests = get_field<bool>(mj, "fallback_on_tests", "multidc");
  }
  if (j.contains("output_root"))
    c.output_root = resolve(base, get_field<std::string>(j, "output_root", ""), "output_root");
  else
    c.output_root = (base / "out").lexically_normal();
  return c;
}

RunConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot read " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config", std::string("invalid JSON: ") + e.what());
  }
  return parse_config(j, fs::absolute(path).parent_path());
}

json to_json_value(const RunConfig& c) {
  json projects = json::array();
  for (const auto& p : c.projects) projects.push_back(project_json(p));
  json tools = json::array();
  for (const auto& t : c.tools) tools.push_back(t);
  return {{"projects", projects},
          {"tools", tools},
          {"pipeline", pipeline_json(c.pipeline, false)},
          {"multidc", {{"ranking", c.multidc.ranking}, {"fallback_on_tests", c.multidc.fallback_on_tests}}},
          {"output_root", c.output_root.string()}};
}

void save_config(const RunConfig& config, const fs::path& path) {
  std::ofstream out(path);
  out << to_json_value(config).dump(2) << "\n";
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

void validate(const RunConfig& c) {
  std::set<std::string> ids;
  for (std::size_t i = 0; i < c.projects.size(); ++i) {
    const auto& p = c.projects[i];
    std::string f = index_path("projects", i);
    if (p.id.empty()) throw ConfigError(f + ".id", "must not be empty");
    if (!ids.insert("project:" + p.id).second) throw ConfigError(f + ".id", "duplicate project id '" + p.id + "'");
    if (!fs::is_directory(p.root)) throw ConfigError(f + ".root", "directory does not exist: " + p.root.string());
    if (!fs::is_directory(p.source_dir()))
      throw ConfigError(f + ".source_root", "directory does not exist: " + p.source_dir().string());
    if (!fs::is_regular_file(p.testmap_path()))
      throw ConfigError(f + ".testmap", "file does not exist: " + p.testmap_path().string());
    for (std::size_t k = 0; k < p.classpath.size(); ++k)
      if (!fs::exists(p.root / p.classpath[k]))
        throw ConfigError(index_path(f + ".classpath", k), "path does not exist: " + (p.root / p.classpath[k]).string());
  }
  for (std::size_t i = 0; i < c.tools.size(); ++i) {
    std::string f = index_path("tools", i);
    toolchain::validate(c.tools[i], f);
    if (!ids.insert("tool:" + c.tools[i].id).second)
      throw ConfigError(f + ".id", "duplicate tool id '" + c.tools[i].id + "'");
  }
  if (c.pipeline.workers < 1) throw ConfigError("pipeline.workers", "must be at least 1");
  if (!c.pipeline.testrunner.empty()) {
    bool found = false;
    for (const auto& t : c.tools) found = found || (t.id == c.pipeline.testrunner && t.kind == toolchain::ToolKind::TestRunner);
    if (!found) throw ConfigError("pipeline.testrunner", "no test runner named '" + c.pipeline.testrunner + "'");
  }
  std::set<std::string> seen;
  for (std::size_t i = 0; i < c.multidc.ranking.size(); ++i) {
    const auto& id = c.multidc.ranking[i];
    std::string f = index_path("multidc.ranking", i);
    if (!seen.insert(id).second) throw ConfigError(f, "duplicate decompiler '" + id + "'");
    bool found = false;
    for (const auto& t : c.tools) found = found || (t.id == id && t.kind == toolchain::ToolKind::Decompiler);
    if (!found) throw ConfigError(f, "no decompiler named '" + id + "'");
  }
}

std::string config_hash(const RunConfig& c) {
  json projects = json::array();
  for (const auto& p : c.projects) projects.push_back(project_json(p));
  json tools = json::array();
  for (const auto& t : c.tools) tools.push_back(t);
  json semantic = {{"projects", projects}, {"tools", tools}, {"pipeline", pipeline_json(c.pipeline, true)}};
  return stubs::fnv1a64_hex(semantic.dump());
}

}  // namespace dceval::config
