#pragma once

// External compilers, decompilers and test runners described declaratively
// and run as subprocesses in their own process group.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace dceval::toolchain {

namespace fs = std::filesystem;
using Millis = std::chrono::milliseconds;

enum class ToolKind { Compiler, Decompiler, TestRunner };
std::string_view to_string(ToolKind kind);
ToolKind tool_kind_from_string(std::string_view text);

inline constexpr Millis kDefaultCompileTimeout{5 * 60 * 1000};
inline constexpr Millis kDefaultTestTimeout{20 * 60 * 1000};
inline constexpr std::size_t kCaptureLimit = 1 << 20;

Millis default_timeout(ToolKind kind);

// Thrown for a malformed tool description; `field` is a path such as
// "tools[2].command".
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message);
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

// Placeholders in a command template: {input} {output} {classpath} {filter}
// {self} {project_root}. A placeholder standing alone as an argument expands
// to one argument per value; embedded in a larger argument, values are joined
// with ':' for {classpath} and ',' otherwise. No shell is involved.
struct ToolSpec {
  std::string id;
  ToolKind kind = ToolKind::Compiler;
  std::vector<std::string> command;
  std::optional<std::string> workdir;  // relative to the invocation scratch directory
  std::map<std::string, std::string> environment;
  Millis timeout{0};  // zero selects the per-kind default
  std::vector<std::string> version_probe;

  Millis effective_timeout() const { return timeout.count() > 0 ? timeout : default_timeout(kind); }
  bool operator==(const ToolSpec&) const = default;
};

// Splits a command line on whitespace, honouring single and double quotes.
std::vector<std::string> split_command(std::string_view text);

// Throws ConfigError naming `field_prefix` + the offending field.
void validate(const ToolSpec& spec, const std::string& field_prefix = "tool");

void to_json(nlohmann::json& j, const ToolSpec& s);
void from_json(const nlohmann::json& j, ToolSpec& s);

struct Substitutions {
  std::vector<std::string> input;
  std::string output;
  std::vector<std::string> classpath;
  std::vector<std::string> filter;
  std::string self;
  std::string project_root;
};

std::vector<std::string> expand(const std::vector<std::string>& command, const Substitutions& subs);

enum class ToolStatus { Ok, NonZeroExit, Timeout, SpawnFailure };
std::string_view to_string(ToolStatus status);
ToolStatus tool_status_from_string(std::string_view text);

struct ProcessResult {
  ToolStatus status = ToolStatus::Ok;
  int exit_code = 0;  // exit status, or the terminating signal number negated
  std::string stdout_text;
  std::string stderr_text;
  bool stdout_truncated = false;
  bool stderr_truncated = false;
  int process_group = 0;
  Millis wall_time{0};
  std::string spawn_error;
};

struct ProcessRequest {
  std::vector<std::string> argv;
  fs::path workdir;
  std::map<std::string, std::string> environment;
  Millis timeout{0};
  std::size_t capture_limit = kCaptureLimit;
};

// Runs argv[0] (searched in PATH) as the leader of a new process group. On
// timeout, and again after a normal exit, the whole group is killed, so no
// descendant outlives the call.
ProcessResult run_process(const ProcessRequest& request);

struct ToolOutcome {
  ToolStatus status = ToolStatus::Ok;
  int exit_code = 0;
  std::string stdout_text;
  std::string stderr_text;
  std::vector<std::string> produced_files;  // relative to the output directory, sorted
  Millis wall_time{0};
  bool ok() const { return status == ToolStatus::Ok; }
};

void to_json(nlohmann::json& j, const ToolOutcome& o);
void from_json(const nlohmann::json& j, ToolOutcome& o);

// Values the harness supplies for {self} and {project_root}.
struct InvocationContext {
  std::string self;
  std::string project_root;
  fs::path scratch;  // private working directory of this invocation
};

ToolOutcome compile(const std::vector<fs::path>& sources, const std::vector<fs::path>& classpath,
                    const ToolSpec& spec, const fs::path& out, const InvocationContext& ctx);
ToolOutcome decompile(const std::vector<fs::path>& classes, const ToolSpec& spec, const fs::path& out,
                      const InvocationContext& ctx);
ToolOutcome recompile(const fs::path& source, const std::vector<fs::path>& classpath, const ToolSpec& spec,
                      const fs::path& out, const InvocationContext& ctx);

enum class Verdict { Passed, Failed, Timeout };
std::string_view to_string(Verdict verdict);
Verdict verdict_from_string(std::string_view text);

struct TestVerdict {
  Verdict verdict = Verdict::Passed;
  std::vector<std::string> failing;
  bool operator==(const TestVerdict&) const = default;
};

void to_json(nlohmann::json& j, const TestVerdict& v);
void from_json(const nlohmann::json& j, TestVerdict& v);

struct TestRun {
  ToolOutcome outcome;
  TestVerdict verdict;
};

// The runner reports one `PASS <id>` or `FAIL <id>` line per test on stdout.
// Selected tests the runner does not report as passing count as failing.
TestRun run_tests(const std::vector<std::string>& selection, const std::vector<fs::path>& classpath,
                  const ToolSpec& spec, Millis timeout, const InvocationContext& ctx);

// Files under `dir` with the given extension, relative and sorted.
std::vector<std::string> list_files(const fs::path& dir, std::string_view extension);

}  // namespace dceval::toolchain
