#pragma once

// Run configuration: the project/compiler/decompiler matrix, tool
// descriptions and pipeline options, read from one JSON file.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dceval/normalize.hpp"
#include "dceval/srcdiff.hpp"
#include "dceval/toolchain.hpp"
#include "json.hpp"

namespace dceval::config {

namespace fs = std::filesystem;
using toolchain::ConfigError;

struct ProjectConfig {
  std::string id;
  fs::path root;
  fs::path source_root;             // relative to root
  std::vector<fs::path> classpath;  // relative to root
  fs::path testmap;                 // relative to root
  bool operator==(const ProjectConfig&) const = default;

  fs::path source_dir() const { return root / source_root; }
  fs::path testmap_path() const { return root / testmap; }
  std::vector<fs::path> classpath_dirs() const;
};

struct PipelineOptions {
  int workers = 1;
  classfile::AttributeIgnoreSet ignore_attributes = classfile::default_ignore_set();
  srcdiff::DiffOptions diff;
  bool force_tests = false;
  bool cache = true;
  toolchain::Millis test_timeout{0};  // zero keeps the test runner's own timeout
  std::string testrunner;             // empty selects the first test runner
  bool operator==(const PipelineOptions& o) const;
};

struct MultiDcOptions {
  std::vector<std::string> ranking;
  bool fallback_on_tests = false;
  bool operator==(const MultiDcOptions&) const = default;
};

struct RunConfig {
  std::vector<ProjectConfig> projects;
  std::vector<toolchain::ToolSpec> tools;
  PipelineOptions pipeline;
  MultiDcOptions multidc;
  fs::path output_root = "out";
  bool operator==(const RunConfig&) const = default;

  const ProjectConfig& project(const std::string& id) const;
  const toolchain::ToolSpec& tool(const std::string& id) const;
  std::vector<std::string> tool_ids(toolchain::ToolKind kind) const;
};

// Parses without touching the file system. Relative paths are resolved
// against `base`; `${NAME}` in a path is replaced by the environment variable.
RunConfig parse_config(const nlohmann::json& j, const fs::path& base);
RunConfig load_config(const fs::path& path);
nlohmann::json to_json_value(const RunConfig& config);
void save_config(const RunConfig& config, const fs::path& path);

// Throws ConfigError with a field path such as "projects[1].testmap".
void validate(const RunConfig& config);

// Hash of the settings that can change results (not workers, caching or
// output location).
std::string config_hash(const RunConfig& config);

}  // namespace dceval::config
