#include <algorithm>
#include <chrono>
#include <fstream>
#include <sstream>
#include <thread>

#include "dceval/classfile.hpp"
#include "dceval/pipeline.hpp"
#include "dceval/stubs.hpp"

namespace dceval::pipeline {

namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

long long millis_since(Clock::time_point t) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - t).count();
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void reset_dir(const fs::path& dir) {
  std::error_code ec;
  fs::remove_all(dir, ec);
  fs::create_directories(dir);
}

std::string first_line(const std::string& text) {
  auto nl = text.find('\n');
  return text.substr(0, nl);
}

json header_json(int version, const std::string& hash) {
  return {{"type", "header"}, {"format_version", version}, {"config_hash", hash}};
}

json record_json(const CaseResult& r) {
  json j = r;
  j["type"] = "case";
  return j;
}

json record_json(const InfrastructureFailure& f) {
  return {{"type", "infrastructure_error"}, {"key", f.key}, {"message", f.message}};
}

// Parses the lines of a results file. `lines` excludes line terminators.
ResultSet parse_lines(const std::vector<std::string>& lines) {
  ResultSet rs;
  if (lines.empty()) throw CorruptRecord(1, "missing header");
  json header;
  try {
    header = json::parse(lines[0]);
    if (header.at("type") != "header") throw CorruptRecord(1, "first record is not a header");
    rs.format_version = header.at("format_version").get<int>();
    rs.config_hash = header.at("config_hash").get<std::string>();
  } catch (const json::exception& e) {
    throw CorruptRecord(1, e.what());
  }
  if (rs.format_version != kFormatVersion) throw VersionMismatch(rs.format_version, kFormatVersion);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    try {
      json j = json::parse(lines[i]);
      const std::string type = j.at("type").get<std::string>();
      if (type == "case") rs.cases.push_back(j.get<CaseResult>());
      else if (type == "infrastructure_error")
        rs.failures.push_back({j.at("key").get<CaseKey>(), j.at("message").get<std::string>()});
      else throw CorruptRecord(i + 1, "unknown record type '" + type + "'");
    } catch (const json::exception& e) {
      throw CorruptRecord(i + 1, e.what());
    } catch (const std::invalid_argument& e) {
      throw CorruptRecord(i + 1, e.what());
    }
  }
  return rs;
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start < text.size()) {
    auto nl = text.find('\n', start);
    if (nl == std::string::npos) {
      out.push_back(text.substr(start));
      break;
    }
    out.push_back(text.substr(start, nl - start));
    start = nl + 1;
  }
  return out;
}

std::string render(const ResultSet& rs) {
  std::string out = header_json(rs.format_version, rs.config_hash).dump() + "\n";
  for (const auto& c : rs.cases) out += record_json(c).dump() + "\n";
  for (const auto& f : rs.failures) out += record_json(f).dump() + "\n";
  return out;
}

void write_atomically(const fs::path& path, const std::string& text) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << text;
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
}

}  // namespace

std::string_view to_string(Category c) {
  switch (c) {
    case Category::EmptyOutput: return "EmptyOutput";
    case Category::SyntacticallyIncorrect: return "SyntacticallyIncorrect";
    case Category::Deceptive: return "Deceptive";
    case Category::TestTimeout: return "TestTimeout";
    case Category::NotTested: return "NotTested";
    case Category::EquivalentModuloInputs: return "EquivalentModuloInputs";
    case Category::StrictlyEquivalent: return "StrictlyEquivalent";
  }
  return "?";
}

const std::vector<Category>& all_categories() {
  static const std::vector<Category> all{Category::EmptyOutput,          Category::SyntacticallyIncorrect,
                                         Category::Deceptive,            Category::TestTimeout,
                                         Category::NotTested,            Category::EquivalentModuloInputs,
                                         Category::StrictlyEquivalent};
  return all;
}

Category category_from_string(std::string_view text) {
  for (Category c : all_categories())
    if (to_string(c) == text) return c;
  throw std::invalid_argument("unknown category '" + std::string(text) + "'");
}

bool is_recompilable(Category c) { return c != Category::EmptyOutput && c != Category::SyntacticallyIncorrect; }

bool is_correct(Category c) { return c == Category::StrictlyEquivalent || c == Category::EquivalentModuloInputs; }

std::string CaseKey::to_text() const { return project + ":" + unit + " [" + compiler + ", " + decompiler + "]"; }

void to_json(json& j, const CaseKey& k) {
  j = {{"project", k.project}, {"unit", k.unit}, {"compiler", k.compiler}, {"decompiler", k.decompiler}};
}

void from_json(const json& j, CaseKey& k) {
  j.at("project").get_to(k.project);
  j.at("unit").get_to(k.unit);
  j.at("compiler").get_to(k.compiler);
  j.at("decompiler").get_to(k.decompiler);
}

std::vector<std::string> TestMap::selection(const std::string& unit) const {
  std::vector<std::string> out;
  auto it = units.find(unit);
  if (it == units.end()) return out;
  for (const auto& id : it->second)
    if (!exclude.count(id)) out.push_back(id);
  return out;
}

TestMap load_testmap(const fs::path& path) {
  TestMap tm;
  json j = json::parse(read_text(path));
  if (j.contains("units")) j.at("units").get_to(tm.units);
  if (j.contains("exclude")) {
    auto ex = j.at("exclude").get<std::vector<std::string>>();
    tm.exclude.insert(ex.begin(), ex.end());
  }
  return tm;
}

void to_json(json& j, const CaseResult& r) {
  j = {{"key", r.key},
       {"category", to_string(r.category)},
       {"tested", r.tested},
       {"distortion", r.distortion ? json(*r.distortion) : json(nullptr)},
       {"bytecode_report", r.bytecode_report ? json(*r.bytecode_report) : json(nullptr)},
       {"test_verdict", r.test_verdict ? json(*r.test_verdict) : json(nullptr)},
       {"timings_ms", r.timings_ms},
       {"diagnostics", r.diagnostics}};
}

void from_json(const json& j, CaseResult& r) {
  r = CaseResult{};
  j.at("key").get_to(r.key);
  r.category = category_from_string(j.at("category").get<std::string>());
  j.at("tested").get_to(r.tested);
  if (!j.at("distortion").is_null()) r.distortion = j.at("distortion").get<srcdiff::DistortionScore>();
  if (!j.at("bytecode_report").is_null()) r.bytecode_report = j.at("bytecode_report").get<classfile::EquivalenceReport>();
  if (!j.at("test_verdict").is_null()) r.test_verdict = j.at("test_verdict").get<toolchain::TestVerdict>();
  j.at("timings_ms").get_to(r.timings_ms);
  j.at("diagnostics").get_to(r.diagnostics);
}

void ResultSet::sort() {
  std::sort(cases.begin(), cases.end(), [](const CaseResult& a, const CaseResult& b) { return a.key < b.key; });
  std::sort(failures.begin(), failures.end(),
            [](const InfrastructureFailure& a, const InfrastructureFailure& b) { return a.key < b.key; });
}

const CaseResult* ResultSet::find(const CaseKey& key) const {
  for (const auto& c : cases)
    if (c.key == key) return &c;
  return nullptr;
}

VersionMismatch::VersionMismatch(int found, int expected)
    : std::runtime_error("results format version " + std::to_string(found) + " is not the supported version " +
                         std::to_string(expected)),
      found_(found) {}

CorruptRecord::CorruptRecord(std::size_t line, const std::string& message)
    : std::runtime_error("corrupt record at line " + std::to_string(line) + ": " + message), line_(line) {}

ResultSet resultset_load(const fs::path& path) {
  std::string text = read_text(path);
  auto lines = split_lines(text);
  if (!text.empty() && text.back() != '\n') {
    // A record without its terminator is a truncated write.
    if (!json::accept(lines.back())) throw CorruptRecord(lines.size(), "truncated record");
  }
  return parse_lines(lines);
}

void resultset_store(const ResultSet& results, const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  write_atomically(path, render(results));
}

std::string without_timings(const ResultSet& results) {
  ResultSet copy = results;
  for (auto& c : copy.cases) c.timings_ms.clear();
  return render(copy);
}

ResultWriter::ResultWriter(const fs::path& path, const std::string& config_hash, bool resume) : path_(path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  if (resume && fs::exists(path)) {
    std::string text = read_text(path);
    auto lines = split_lines(text);
    if (!text.empty() && text.back() != '\n') {
      lines.pop_back();
      std::string kept;
      for (const auto& l : lines) kept += l + "\n";
      write_atomically(path, kept);
    }
    if (lines.empty()) {
      write_atomically(path, header_json(kFormatVersion, config_hash).dump() + "\n");
      existing_.config_hash = config_hash;
    } else {
      existing_ = parse_lines(lines);
      if (existing_.config_hash != config_hash)
        throw ConfigHashMismatch("results file " + path.string() + " was written with configuration " +
                                 existing_.config_hash + ", current configuration is " + config_hash);
    }
    for (const auto& c : existing_.cases) done_.insert(c.key);
    for (const auto& f : existing_.failures) done_.insert(f.key);
  } else {
    write_atomically(path, header_json(kFormatVersion, config_hash).dump() + "\n");
    existing_.config_hash = config_hash;
  }
}

bool ResultWriter::done(const CaseKey& key) const { return done_.count(key) > 0; }

void ResultWriter::write_line(const std::string& line) {
  std::lock_guard lock(mutex_);
  std::ofstream out(path_, std::ios::binary | std::ios::app);
  out << line << "\n";
  out.flush();
  if (!out) throw std::runtime_error("cannot append to " + path_.string());
}

void ResultWriter::append(const CaseResult& result) { write_line(record_json(result).dump()); }

void ResultWriter::append(const InfrastructureFailure& failure) { write_line(record_json(failure).dump()); }

ResultSet ResultWriter::finish() {
  std::lock_guard lock(mutex_);
  ResultSet rs = resultset_load(path_);
  rs.sort();
  write_atomically(path_, render(rs));
  return rs;
}

Evaluator::Evaluator(config::RunConfig config, std::string self_path)
    : config_(std::move(config)), self_(std::move(self_path)) {}

std::vector<std::string> Evaluator::units(const std::string& project) const {
  return toolchain::list_files(config_.project(project).source_dir(), ".java");
}

const TestMap& Evaluator::testmap(const std::string& project) {
  std::lock_guard lock(mutex_);
  auto it = testmaps_.find(project);
  if (it == testmaps_.end()) {
    try {
      it = testmaps_.emplace(project, load_testmap(config_.project(project).testmap_path())).first;
    } catch (const std::exception& e) {
      throw InfrastructureError("cannot load test map of " + project + ": " + e.what());
    }
  }
  return it->second;
}

std::string Evaluator::log(const fs::path& dir, const std::string& stage, const toolchain::ToolOutcome& o) {
  fs::create_directories(dir);
  fs::path file = dir / (stage + ".log");
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  out << "status: " << toolchain::to_string(o.status) << "\nexit: " << o.exit_code << "\n--- stdout\n"
      << o.stdout_text << "\n--- stderr\n"
      << o.stderr_text << "\n";
  return fs::relative(file, config_.output_root).string();
}

std::shared_ptr<const Evaluator::Original> Evaluator::original(const std::string& project_id,
                                                               const std::string& compiler,
                                                               const fs::path& private_dir) {
  auto build = [this, project_id, compiler](const fs::path& dir) {
    const auto& project = config_.project(project_id);
    const auto& tool = config_.tool(compiler);
    reset_dir(dir);
    std::vector<fs::path> sources;
    for (const auto& u : units(project_id)) sources.push_back(project.source_dir() / u);
    if (sources.empty()) throw InfrastructureError("project " + project_id + " has no sources");
    toolchain::InvocationContext ctx{self_, project.root.string(), dir / "scratch"};
    auto outcome = toolchain::compile(sources, project.classpath_dirs(), tool, dir / "classes", ctx);
    log(dir, "compile", outcome);
    if (!outcome.ok())
      throw InfrastructureError("original sources of " + project_id + " do not compile with " + compiler + " (" +
                                std::string(toolchain::to_string(outcome.status)) + "): " +
                                first_line(outcome.stderr_text));
    auto result = std::make_shared<Original>();
    result->classes = dir / "classes";
    for (const auto& rel : outcome.produced_files) {
      try {
        result->unit_classes[stubs::unit_of_class(result->classes / rel)].push_back(rel);
      } catch (const std::exception& e) {
        throw InfrastructureError("unreadable class file " + rel + ": " + e.what());
      }
    }
    return std::shared_ptr<const Original>(result);
  };
  if (!config_.pipeline.cache) return build(private_dir / "original");
  std::shared_future<std::shared_ptr<const Original>> fut;
  std::promise<std::shared_ptr<const Original>> promise;
  bool owner = false;
  {
    std::lock_guard lock(mutex_);
    auto key = std::make_pair(project_id, compiler);
    auto it = originals_.find(key);
    if (it == originals_.end()) {
      fut = promise.get_future().share();
      originals_.emplace(key, fut);
      owner = true;
    } else {
      fut = it->second;
    }
  }
  if (owner) {
    try {
      promise.set_value(build(config_.output_root / "work" / "original" / project_id / compiler));
    } catch (...) {
      promise.set_exception(std::current_exception());
    }
  }
  return fut.get();
}

Evaluator::Decompiled Evaluator::decompiled(const CaseKey& key, const Original& original, const fs::path& case_dir) {
  auto build = [this, &key, &original](const fs::path& dir) {
    const auto& project = config_.project(key.project);
    const auto& tool = config_.tool(key.decompiler);
    reset_dir(dir);
    std::vector<fs::path> classes;
    for (const auto& rel : original.unit_classes.at(key.unit)) classes.push_back(original.classes / rel);
    toolchain::InvocationContext ctx{self_, project.root.string(), dir / "scratch"};
    auto start = Clock::now();
    Decompiled d{toolchain::decompile(classes, tool, dir / "out", ctx), dir, 0};
    d.millis = millis_since(start);
    return d;
  };
  if (!config_.pipeline.cache) return build(case_dir / "decompile");
  std::shared_future<Decompiled> fut;
  std::promise<Decompiled> promise;
  bool owner = false;
  {
    std::lock_guard lock(mutex_);
    auto it = decompilations_.find(key);
    if (it == decompilations_.end()) {
      fut = promise.get_future().share();
      decompilations_.emplace(key, fut);
      owner = true;
    } else {
      fut = it->second;
    }
  }
  if (owner) {
    try {
      promise.set_value(build(config_.output_root / "work" / "decompiled" / key.project / key.compiler /
                              key.decompiler / key.unit));
    } catch (...) {
      promise.set_exception(std::current_exception());
    }
  }
  return fut.get();
}

CaseResult Evaluator::evaluate_case(const CaseKey& key) {
  using toolchain::ToolKind;
  CaseResult r;
  r.key = key;
  const config::ProjectConfig* project = nullptr;
  try {
    project = &config_.project(key.project);
    if (config_.tool(key.compiler).kind != ToolKind::Compiler)
      throw InfrastructureError("tool " + key.compiler + " is not a compiler");
    if (config_.tool(key.decompiler).kind != ToolKind::Decompiler)
      throw InfrastructureError("tool " + key.decompiler + " is not a decompiler");
  } catch (const std::out_of_range& e) {
    throw InfrastructureError(e.what());
  }
  fs::path case_dir = config_.output_root / "work" / "cases" / key.project / key.compiler / key.decompiler / key.unit;
  reset_dir(case_dir);

  auto start = Clock::now();
  auto orig = original(key.project, key.compiler, case_dir);
  r.timings_ms["compile"] = millis_since(start);
  auto unit_it = orig->unit_classes.find(key.unit);
  if (unit_it == orig->unit_classes.end())
    throw InfrastructureError("compiling " + key.project + " with " + key.compiler + " produced no class for " +
                              key.unit);
  auto selection = testmap(key.project).selection(key.unit);
  r.tested = !selection.empty();

  auto dec = decompiled(key, *orig, case_dir);
  r.timings_ms["decompile"] = dec.millis;
  r.diagnostics["decompile"] = log(dec.dir, "decompile", dec.outcome);
  std::vector<std::string> java;
  if (dec.outcome.ok()) java = dec.outcome.produced_files;
  if (java.empty()) {
    r.category = Category::EmptyOutput;
    return r;
  }
  std::string chosen = std::find(java.begin(), java.end(), key.unit) != java.end() ? key.unit : java.front();
  fs::path decompiled_source = dec.dir / "out" / chosen;
  r.diagnostics["decompiled_source"] = fs::relative(decompiled_source, config_.output_root).string();

  start = Clock::now();
  auto record = srcdiff::score_sources(key.unit, read_text(project->source_dir() / key.unit),
                                       read_text(decompiled_source), config_.pipeline.diff);
  r.distortion = record.score;
  r.timings_ms["distortion"] = millis_since(start);

  start = Clock::now();
  std::vector<fs::path> classpath{orig->classes};
  for (const auto& c : project->classpath_dirs()) classpath.push_back(c);
  toolchain::InvocationContext rctx{self_, project->root.string(), case_dir / "scratch-recompile"};
  auto recompiled =
      toolchain::recompile(decompiled_source, classpath, config_.tool(key.compiler), case_dir / "recompiled", rctx);
  r.timings_ms["recompile"] = millis_since(start);
  r.diagnostics["recompile"] = log(case_dir, "recompile", recompiled);
  if (!recompiled.ok() || recompiled.produced_files.empty()) {
    r.category = Category::SyntacticallyIncorrect;
    return r;
  }

  start = Clock::now();
  classfile::EquivalenceReport report;
  const auto& originals = unit_it->second;
  for (const auto& rel : originals) {
    fs::path other = case_dir / "recompiled" / rel;
    if (!fs::exists(other)) {
      report.equal = false;
      report.differences.push_back({rel, "missing-class", rel, ""});
      continue;
    }
    try {
      auto a = classfile::normalize(classfile::read_class_file((orig->classes / rel).string()),
                                    config_.pipeline.ignore_attributes);
      auto b = classfile::normalize(classfile::read_class_file(other.string()), config_.pipeline.ignore_attributes);
      auto one = classfile::strict_equivalence(a, b);
      if (!one.equal) report.equal = false;
      for (auto d : one.differences) {
        d.location = rel + " " + d.location;
        report.differences.push_back(std::move(d));
      }
    } catch (const classfile::ClassFileError& e) {
      report.equal = false;
      report.differences.push_back({rel, "unreadable-class", "", e.what()});
    }
  }
  for (const auto& rel : recompiled.produced_files)
    if (std::find(originals.begin(), originals.end(), rel) == originals.end()) {
      report.equal = false;
      report.differences.push_back({rel, "extra-class", "", rel});
    }
  r.bytecode_report = report;
  r.timings_ms["bytecode"] = millis_since(start);
  if (report.equal && !config_.pipeline.force_tests) {
    r.category = Category::StrictlyEquivalent;
    return r;
  }
  if (selection.empty()) {
    r.category = report.equal ? Category::StrictlyEquivalent : Category::NotTested;
    return r;
  }

  std::string runner = config_.pipeline.testrunner;
  if (runner.empty()) {
    auto ids = config_.tool_ids(ToolKind::TestRunner);
    if (ids.empty()) throw InfrastructureError("no test runner configured");
    runner = ids.front();
  }
  start = Clock::now();
  std::vector<fs::path> staged{case_dir / "recompiled", orig->classes};
  for (const auto& c : project->classpath_dirs()) staged.push_back(c);
  toolchain::InvocationContext tctx{self_, project->root.string(), case_dir / "scratch-tests"};
  auto run = toolchain::run_tests(selection, staged, config_.tool(runner), config_.pipeline.test_timeout, tctx);
  r.timings_ms["tests"] = millis_since(start);
  r.diagnostics["tests"] = log(case_dir, "tests", run.outcome);
  if (run.outcome.status == toolchain::ToolStatus::SpawnFailure)
    throw InfrastructureError("test runner " + runner + " could not start: " + run.outcome.stderr_text);
  r.test_verdict = run.verdict;
  switch (run.verdict.verdict) {
    case toolchain::Verdict::Passed:
      r.category = report.equal ? Category::StrictlyEquivalent : Category::EquivalentModuloInputs;
      break;
    case toolchain::Verdict::Failed: r.category = Category::Deceptive; break;
    case toolchain::Verdict::Timeout: r.category = Category::TestTimeout; break;
  }
  return r;
}

fs::path Evaluator::decompiled_output(const CaseKey& key) const {
  if (!config_.pipeline.cache)
    return config_.output_root / "work" / "cases" / key.project / key.compiler / key.decompiler / key.unit /
           "decompile" / "out";
  return config_.output_root / "work" / "decompiled" / key.project / key.compiler / key.decompiler / key.unit / "out";
}

bool CaseFilter::accepts(const CaseKey& key) const {
  auto ok = [](const std::set<std::string>& s, const std::string& v) { return s.empty() || s.count(v) > 0; };
  return ok(projects, key.project) && ok(compilers, key.compiler) && ok(decompilers, key.decompiler) &&
         ok(units, key.unit);
}

std::vector<CaseKey> enumerate_cases(const Evaluator& evaluator, const CaseFilter& filter) {
  const auto& cfg = evaluator.config();
  std::vector<CaseKey> out;
  for (const auto& p : cfg.projects) {
    if (!filter.projects.empty() && !filter.projects.count(p.id)) continue;
    for (const auto& u : evaluator.units(p.id))
      for (const auto& c : cfg.tool_ids(toolchain::ToolKind::Compiler))
        for (const auto& d : cfg.tool_ids(toolchain::ToolKind::Decompiler)) {
          CaseKey k{p.id, u, c, d};
          if (filter.accepts(k)) out.push_back(std::move(k));
        }
  }
  std::sort(out.begin(), out.end());
  return out;
}

ResultSet evaluate_matrix(Evaluator& evaluator, const std::vector<CaseKey>& cases, const MatrixOptions& options) {
  std::unique_ptr<ResultWriter> writer;
  if (options.results_path)
    writer = std::make_unique<ResultWriter>(*options.results_path, config::config_hash(evaluator.config()),
                                            options.resume);
  std::vector<CaseKey> pending;
  for (const auto& k : cases)
    if (!writer || !writer->done(k)) pending.push_back(k);

  ResultSet memory;
  memory.config_hash = config::config_hash(evaluator.config());
  std::mutex memory_mutex;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      if (options.stop && options.stop->load()) return;
      std::size_t i = next.fetch_add(1);
      if (i >= pending.size()) return;
      const CaseKey& key = pending[i];
      std::optional<CaseResult> result;
      std::string error;
      try {
        result = evaluator.evaluate_case(key);
      } catch (const InfrastructureError& e) {
        error = e.what();
      } catch (const std::exception& e) {
        error = std::string("harness error: ") + e.what();
      }
      if (result) {
        if (writer) writer->append(*result);
        std::lock_guard lock(memory_mutex);
        memory.cases.push_back(*result);
      } else {
        InfrastructureFailure f{key, error};
        if (writer) writer->append(f);
        std::lock_guard lock(memory_mutex);
        memory.failures.push_back(f);
      }
      if (options.on_case) options.on_case(key, result ? &*result : nullptr, error);
    }
  };
  int workers = std::max(1, std::min<int>(options.workers, static_cast<int>(std::max<std::size_t>(1, pending.size()))));
  std::vector<std::thread> threads;
  for (int t = 1; t < workers; ++t) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();
  if (writer) return writer->finish();
  memory.sort();
  return memory;
}

}  // namespace dceval::pipeline
