#include <algorithm>
#include <set>
#include <sstream>
#include <string>

#include "dceval/toolchain.hpp"

namespace dceval::toolchain {

namespace {

const char* const kPlaceholders[] = {"{input}", "{output}", "{classpath}", "{filter}", "{self}", "{project_root}"};

bool mentions(const std::vector<std::string>& command, std::string_view placeholder) {
  return std::any_of(command.begin(), command.end(),
                     [&](const std::string& a) { return a.find(placeholder) != std::string::npos; });
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::vector<std::string> to_strings(const std::vector<fs::path>& paths) {
  std::vector<std::string> out;
  for (const auto& p : paths) out.push_back(p.string());
  return out;
}

ToolOutcome run_tool(const ToolSpec& spec, const Substitutions& subs, const InvocationContext& ctx, Millis timeout,
                     const fs::path& out_dir, std::string_view produced_extension) {
  ProcessRequest req;
  req.argv = expand(spec.command, subs);
  req.workdir = spec.workdir ? ctx.scratch / *spec.workdir : ctx.scratch;
  req.environment = spec.environment;
  req.timeout = timeout;
  std::error_code ec;
  fs::create_directories(req.workdir, ec);
  if (!out_dir.empty()) fs::create_directories(out_dir, ec);
  ProcessResult pr = run_process(req);
  ToolOutcome o;
  o.status = pr.status;
  o.exit_code = pr.exit_code;
  o.stdout_text = std::move(pr.stdout_text);
  o.stderr_text = pr.status == ToolStatus::SpawnFailure ? pr.spawn_error : std::move(pr.stderr_text);
  o.wall_time = pr.wall_time;
  if ((o.status == ToolStatus::Ok || o.status == ToolStatus::NonZeroExit) && !out_dir.empty())
    o.produced_files = list_files(out_dir, produced_extension);
  return o;
}

}  // namespace

std::string_view to_string(ToolKind kind) {
  switch (kind) {
    case ToolKind::Compiler: return "compiler";
    case ToolKind::Decompiler: return "decompiler";
    case ToolKind::TestRunner: return "testrunner";
  }
  return "?";
}

ToolKind tool_kind_from_string(std::string_view text) {
  if (text == "compiler") return ToolKind::Compiler;
  if (text == "decompiler") return ToolKind::Decompiler;
  if (text == "testrunner") return ToolKind::TestRunner;
  throw std::invalid_argument("unknown tool kind '" + std::string(text) + "'");
}

Millis default_timeout(ToolKind kind) {
  return kind == ToolKind::TestRunner ? kDefaultTestTimeout : kDefaultCompileTimeout;
}

ConfigError::ConfigError(std::string field, const std::string& message)
    : std::runtime_error(field + ": " + message), field_(std::move(field)) {}

std::vector<std::string> split_command(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  bool in_token = false;
  char quote = 0;
  for (char c : text) {
    if (quote) {
      if (c == quote) quote = 0;
      else cur += c;
      continue;
    }
    if (c == '\'' || c == '"') {
      quote = c;
      in_token = true;
    } else if (c == ' ' || c == '\t' || c == '\n') {
      if (in_token) out.push_back(std::move(cur));
      cur.clear();
      in_token = false;
    } else {
      cur += c;
      in_token = true;
    }
  }
  if (quote) throw std::invalid_argument("unterminated quote in command");
  if (in_token) out.push_back(std::move(cur));
  return out;
}

void validate(const ToolSpec& spec, const std::string& prefix) {
  if (spec.id.empty()) throw ConfigError(prefix + ".id", "must not be empty");
  if (spec.command.empty()) throw ConfigError(prefix + ".command", "must not be empty");
  if (!mentions(spec.command, "{input}") && spec.kind != ToolKind::TestRunner)
    throw ConfigError(prefix + ".command", "must contain {input}");
  if (spec.kind == ToolKind::TestRunner && !mentions(spec.command, "{filter}"))
    throw ConfigError(prefix + ".command", "must contain {filter}");
  if (spec.kind == ToolKind::Decompiler && !mentions(spec.command, "{output}"))
    throw ConfigError(prefix + ".command", "must contain {output}");
  if (spec.timeout.count() < 0) throw ConfigError(prefix + ".timeout_ms", "must not be negative");
  for (const auto& arg : spec.command) {
    for (std::size_t open = arg.find('{'); open != std::string::npos; open = arg.find('{', open + 1)) {
      auto close = arg.find('}', open);
      if (close == std::string::npos) continue;
      std::string name = arg.substr(open, close - open + 1);
      if (std::none_of(std::begin(kPlaceholders), std::end(kPlaceholders), [&](const char* p) { return name == p; }))
        throw ConfigError(prefix + ".command", "unknown placeholder " + name);
    }
  }
}

void to_json(nlohmann::json& j, const ToolSpec& s) {
  j = {{"id", s.id}, {"kind", to_string(s.kind)}, {"command", s.command}};
  if (s.workdir) j["workdir"] = *s.workdir;
  if (!s.environment.empty()) j["environment"] = s.environment;
  if (s.timeout.count() > 0) j["timeout_ms"] = s.timeout.count();
  if (!s.version_probe.empty()) j["version_probe"] = s.version_probe;
}

void from_json(const nlohmann::json& j, ToolSpec& s) {
  s = ToolSpec{};
  j.at("id").get_to(s.id);
  s.kind = tool_kind_from_string(j.at("kind").get<std::string>());
  const auto& cmd = j.at("command");
  s.command = cmd.is_string() ? split_command(cmd.get<std::string>()) : cmd.get<std::vector<std::string>>();
  if (j.contains("workdir")) s.workdir = j.at("workdir").get<std::string>();
  if (j.contains("environment")) j.at("environment").get_to(s.environment);
  if (j.contains("timeout_ms")) s.timeout = Millis(j.at("timeout_ms").get<long long>());
  if (j.contains("version_probe")) {
    const auto& p = j.at("version_probe");
    s.version_probe = p.is_string() ? split_command(p.get<std::string>()) : p.get<std::vector<std::string>>();
  }
}

std::vector<std::string> expand(const std::vector<std::string>& command, const Substitutions& subs) {
  auto values = [&](std::string_view name) -> std::vector<std::string> {
    if (name == "{input}") return subs.input;
    if (name == "{output}") return {subs.output};
    if (name == "{classpath}") return {join(subs.classpath, ":")};
    if (name == "{filter}") return subs.filter;
    if (name == "{self}") return {subs.self};
    return {subs.project_root};
  };
  std::vector<std::string> out;
  for (const auto& arg : command) {
    auto whole = std::find(std::begin(kPlaceholders), std::end(kPlaceholders), arg);
    if (whole != std::end(kPlaceholders)) {
      auto v = values(arg);
      if (arg == "{classpath}" && subs.classpath.empty()) v = {""};
      out.insert(out.end(), v.begin(), v.end());
      continue;
    }
    std::string result;
    for (std::size_t i = 0; i < arg.size();) {
      bool replaced = false;
      for (const char* p : kPlaceholders) {
        std::string_view ph(p);
        if (arg.compare(i, ph.size(), ph) == 0) {
          auto v = values(ph);
          result += join(v, ph == "{classpath}" ? ":" : ",");
          i += ph.size();
          replaced = true;
          break;
        }
      }
      if (!replaced) result += arg[i++];
    }
    out.push_back(std::move(result));
  }
  return out;
}

std::string_view to_string(ToolStatus status) {
  switch (status) {
    case ToolStatus::Ok: return "Ok";
    case ToolStatus::NonZeroExit: return "NonZeroExit";
    case ToolStatus::Timeout: return "Timeout";
    case ToolStatus::SpawnFailure: return "SpawnFailure";
  }
  return "?";
}

ToolStatus tool_status_from_string(std::string_view text) {
  for (auto s : {ToolStatus::Ok, ToolStatus::NonZeroExit, ToolStatus::Timeout, ToolStatus::SpawnFailure})
    if (to_string(s) == text) return s;
  throw std::invalid_argument("unknown tool status '" + std::string(text) + "'");
}

void to_json(nlohmann::json& j, const ToolOutcome& o) {
  j = {{"status", to_string(o.status)},
       {"exit_code", o.exit_code},
       {"stdout", o.stdout_text},
       {"stderr", o.stderr_text},
       {"produced_files", o.produced_files},
       {"wall_time_ms", o.wall_time.count()}};
}

void from_json(const nlohmann::json& j, ToolOutcome& o) {
  o.status = tool_status_from_string(j.at("status").get<std::string>());
  j.at("exit_code").get_to(o.exit_code);
  j.at("stdout").get_to(o.stdout_text);
  j.at("stderr").get_to(o.stderr_text);
  j.at("produced_files").get_to(o.produced_files);
  o.wall_time = Millis(j.at("wall_time_ms").get<long long>());
}

std::vector<std::string> list_files(const fs::path& dir, std::string_view extension) {
  std::vector<std::string> out;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) return out;
  for (const auto& e : fs::recursive_directory_iterator(dir, ec))
    if (e.is_regular_file() && e.path().extension() == extension) out.push_back(fs::relative(e.path(), dir).string());
  std::sort(out.begin(), out.end());
  return out;
}

ToolOutcome compile(const std::vector<fs::path>& sources, const std::vector<fs::path>& classpath,
                    const ToolSpec& spec, const fs::path& out, const InvocationContext& ctx) {
  if (spec.kind != ToolKind::Compiler) throw std::invalid_argument("tool '" + spec.id + "' is not a compiler");
  for (const auto& s : sources)
    if (!fs::exists(s)) throw std::invalid_argument("source does not exist: " + s.string());
  Substitutions subs{to_strings(sources), out.string(), to_strings(classpath), {}, ctx.self, ctx.project_root};
  return run_tool(spec, subs, ctx, spec.effective_timeout(), out, ".class");
}

ToolOutcome decompile(const std::vector<fs::path>& classes, const ToolSpec& spec, const fs::path& out,
                      const InvocationContext& ctx) {
  if (spec.kind != ToolKind::Decompiler) throw std::invalid_argument("tool '" + spec.id + "' is not a decompiler");
  Substitutions subs{to_strings(classes), out.string(), {}, {}, ctx.self, ctx.project_root};
  return run_tool(spec, subs, ctx, spec.effective_timeout(), out, ".java");
}

ToolOutcome recompile(const fs::path& source, const std::vector<fs::path>& classpath, const ToolSpec& spec,
                      const fs::path& out, const InvocationContext& ctx) {
  return compile({source}, classpath, spec, out, ctx);
}

std::string_view to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::Passed: return "Passed";
    case Verdict::Failed: return "Failed";
    case Verdict::Timeout: return "Timeout";
  }
  return "?";
}

Verdict verdict_from_string(std::string_view text) {
  for (auto v : {Verdict::Passed, Verdict::Failed, Verdict::Timeout})
    if (to_string(v) == text) return v;
  throw std::invalid_argument("unknown verdict '" + std::string(text) + "'");
}

void to_json(nlohmann::json& j, const TestVerdict& v) {
  j = {{"verdict", to_string(v.verdict)}, {"failing", v.failing}};
}

void from_json(const nlohmann::json& j, TestVerdict& v) {
  v.verdict = verdict_from_string(j.at("verdict").get<std::string>());
  j.at("failing").get_to(v.failing);
}

TestRun run_tests(const std::vector<std::string>& selection, const std::vector<fs::path>& classpath,
                  const ToolSpec& spec, Millis timeout, const InvocationContext& ctx) {
  if (spec.kind != ToolKind::TestRunner) throw std::invalid_argument("tool '" + spec.id + "' is not a test runner");
  if (selection.empty()) throw std::invalid_argument("empty test selection");
  Substitutions subs{{}, "", to_strings(classpath), selection, ctx.self, ctx.project_root};
  TestRun run;
  run.outcome = run_tool(spec, subs, ctx, timeout.count() > 0 ? timeout : spec.effective_timeout(), {}, "");
  if (run.outcome.status == ToolStatus::Timeout) {
    run.verdict = {Verdict::Timeout, {}};
    return run;
  }
  std::set<std::string> passed;
  std::istringstream lines(run.outcome.stdout_text);
  for (std::string line; std::getline(lines, line);)
    if (line.rfind("PASS ", 0) == 0) passed.insert(line.substr(5));
  std::vector<std::string> failing;
  for (const auto& id : selection)
    if (!passed.count(id)) failing.push_back(id);
  if (run.outcome.status != ToolStatus::Ok && failing.empty()) failing = selection;
  run.verdict = {failing.empty() ? Verdict::Passed : Verdict::Failed, failing};
  return run;
}

}  // namespace dceval::toolchain
