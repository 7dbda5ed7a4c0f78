#include <unistd.h>

#include <atomic>
#include <csignal>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <thread>

#include "CLI11.hpp"
#include "dceval/config.hpp"
#include "dceval/fixture_verify.hpp"
#include "dceval/multidc.hpp"
#include "dceval/pipeline.hpp"
#include "dceval/report.hpp"
#include "dceval/stubs.hpp"
#include "json.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using namespace dceval;

constexpr int kOk = 0;
constexpr int kFailures = 1;
constexpr int kUsage = 2;

std::atomic<bool> g_stop{false};

extern "C" void on_signal(int) { g_stop.store(true); }

void install_signal_handlers() {
  struct sigaction sa {};
  sa.sa_handler = on_signal;
  sigemptyset(&sa.sa_mask);
  sigaction(SIGINT, &sa, nullptr);
  sigaction(SIGTERM, &sa, nullptr);
}

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string self_path() {
  std::error_code ec;
  auto p = fs::read_symlink("/proc/self/exe", ec);
  if (ec) throw std::runtime_error("cannot resolve /proc/self/exe: " + ec.message());
  return p.string();
}

std::vector<fs::path> split_classpath(const std::string& text) {
  std::vector<fs::path> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find(':', start);
    if (end == std::string::npos) end = text.size();
    if (end > start) out.emplace_back(text.substr(start, end - start));
    start = end + 1;
  }
  return out;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find(',', start);
    if (end == std::string::npos) end = text.size();
    if (end > start) out.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  return out;
}

struct Filters {
  std::vector<std::string> only, projects, compilers, decompilers, units;

  void add_to(CLI::App* app, bool with_decompiler) {
    app->add_option("--only", only, "Restrict cases, as key=value with key in project|compiler|decompiler|unit")
        ->type_name("KEY=VALUE");
    app->add_option("--project", projects, "Restrict to a project id (repeatable)");
    app->add_option("--compiler", compilers, "Restrict to a compiler id (repeatable)");
    if (with_decompiler) app->add_option("--decompiler", decompilers, "Restrict to a decompiler id (repeatable)");
    app->add_option("--unit", units, "Restrict to a source unit such as pkg/A.java (repeatable)");
  }

  pipeline::CaseFilter build() const {
    pipeline::CaseFilter f;
    f.projects.insert(projects.begin(), projects.end());
    f.compilers.insert(compilers.begin(), compilers.end());
    f.decompilers.insert(decompilers.begin(), decompilers.end());
    f.units.insert(units.begin(), units.end());
    for (const auto& kv : only) {
      auto eq = kv.find('=');
      if (eq == std::string::npos) throw UsageError("--only expects key=value, got '" + kv + "'");
      std::string key = kv.substr(0, eq), value = kv.substr(eq + 1);
      if (key == "project")
        f.projects.insert(value);
      else if (key == "compiler")
        f.compilers.insert(value);
      else if (key == "decompiler")
        f.decompilers.insert(value);
      else if (key == "unit")
        f.units.insert(value);
      else
        throw UsageError("--only: unknown key '" + key + "'");
    }
    return f;
  }
};

config::RunConfig load_valid_config(const std::string& path) {
  auto cfg = config::load_config(path);
  config::validate(cfg);
  return cfg;
}

class Progress {
 public:
  Progress(bool quiet, bool json_mode, std::size_t total) : quiet_(quiet), json_(json_mode), total_(total) {}

  void report(const pipeline::CaseKey& key, const std::string& outcome, bool failure) {
    std::lock_guard lock(mutex_);
    ++done_;
    if (quiet_) return;
    if (json_)
      std::cout << json{{"done", done_}, {"total", total_}, {"key", key}, {"outcome", outcome}, {"failure", failure}}
                       .dump()
                << std::endl;
    else
      std::cout << "[" << done_ << "/" << total_ << "] " << key.to_text() << ": " << outcome << std::endl;
  }

  void message(const std::string& text) {
    if (quiet_) return;
    std::lock_guard lock(mutex_);
    if (json_)
      std::cout << json{{"message", text}}.dump() << std::endl;
    else
      std::cout << text << std::endl;
  }

 private:
  bool quiet_, json_;
  std::size_t total_, done_ = 0;
  std::mutex mutex_;
};

struct RunArgs {
  std::string config;
  std::string results;
  bool fresh = false;
  bool resume = false;
  int workers = 0;
  bool force_tests = false;
  bool no_cache = false;
  bool quiet = false;
  bool json_progress = false;
  bool fail_on_deceptive = false;
  Filters filters;
};

int cmd_run(const RunArgs& a) {
  auto cfg = load_valid_config(a.config);
  if (a.workers > 0) cfg.pipeline.workers = a.workers;
  if (a.force_tests) cfg.pipeline.force_tests = true;
  if (a.no_cache) cfg.pipeline.cache = false;
  fs::path results = a.results.empty() ? cfg.output_root / "results.jsonl" : fs::path(a.results);
  fs::create_directories(results.parent_path().empty() ? fs::path(".") : results.parent_path());
  if (a.fresh) fs::remove(results);

  pipeline::Evaluator evaluator(cfg, self_path());
  auto cases = pipeline::enumerate_cases(evaluator, a.filters.build());
  if (cases.empty()) throw UsageError("the configuration and filters select no cases");

  Progress progress(a.quiet, a.json_progress, cases.size());
  pipeline::MatrixOptions options;
  options.results_path = results;
  options.resume = true;
  options.workers = cfg.pipeline.workers;
  options.stop = &g_stop;
  options.on_case = [&](const pipeline::CaseKey& key, const pipeline::CaseResult* r, const std::string& error) {
    progress.report(key, r ? std::string(pipeline::to_string(r->category)) : "InfrastructureError: " + error, !r);
  };
  install_signal_handlers();
  auto set = pipeline::evaluate_matrix(evaluator, cases, options);

  std::size_t deceptive = 0;
  for (const auto& c : set.cases) deceptive += c.category == pipeline::Category::Deceptive;
  progress.message(std::to_string(set.cases.size()) + " case(s), " + std::to_string(set.failures.size()) +
                   " infrastructure error(s), " + std::to_string(deceptive) + " deceptive; results in " +
                   results.string());
  if (g_stop.load()) {
    std::cerr << "interrupted: partial results kept in " << results.string() << "; rerun to resume\n";
    return kFailures;
  }
  if (!set.failures.empty()) return kFailures;
  if (a.fail_on_deceptive && deceptive > 0) return kFailures;
  return kOk;
}

struct ReportArgs {
  std::string results;
  std::string out;
  std::string format = "markdown";
  bool chisq = false;
  std::string partition;
  bool quiet = false;
  bool fail_on_deceptive = false;
};

int cmd_report(const ReportArgs& a) {
  if (!fs::exists(a.results)) throw UsageError("results file not found: " + a.results);
  auto format = report::format_from_string(a.format);
  pipeline::ResultSet set = pipeline::resultset_load(a.results);
  if (set.cases.empty()) throw UsageError("results file has no cases: " + a.results);
  fs::path out = a.out.empty() ? fs::path(a.results).parent_path() / "report" : fs::path(a.out);
  report::ReportOptions options;
  options.chisq = a.chisq;
  options.partition_decompilers = split_list(a.partition);
  auto files = report::write_report(set, out, options);
  for (const auto& w : files.warnings) std::cerr << "warning: " << w << "\n";
  auto rows = report::aggregate(set);
  if (!a.quiet) {
    std::cout << report::emit(rows, format);
    std::cerr << "wrote " << files.written.size() << " file(s) to " << out.string() << "\n";
  }
  if (a.fail_on_deceptive)
    for (const auto& r : rows)
      if (r.n_deceptive > 0) return kFailures;
  return kOk;
}

struct MultiDcArgs {
  std::string config;
  std::optional<std::string> ranking;
  std::string ranking_from;
  std::string out;
  bool fallback_on_tests = false;
  int workers = 0;
  bool quiet = false;
  bool json_progress = false;
  Filters filters;
};

int cmd_multidc(const MultiDcArgs& a) {
  auto cfg = load_valid_config(a.config);
  if (a.workers > 0) cfg.pipeline.workers = a.workers;
  if (a.ranking && !a.ranking_from.empty()) throw UsageError("give --ranking or --ranking-from, not both");

  multidc::DecompilerRanking ranking;
  try {
    if (!a.ranking_from.empty()) {
      if (!fs::exists(a.ranking_from)) throw UsageError("results file not found: " + a.ranking_from);
      ranking = multidc::rank_decompilers(pipeline::resultset_load(a.ranking_from));
    } else {
      ranking = multidc::explicit_ranking(a.ranking ? split_list(*a.ranking) : cfg.multidc.ranking);
    }
  } catch (const multidc::EmptyResultSet& e) {
    throw UsageError(e.what());
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  auto decompilers = cfg.tool_ids(toolchain::ToolKind::Decompiler);
  for (const auto& id : ranking.order)
    if (std::find(decompilers.begin(), decompilers.end(), id) == decompilers.end())
      throw UsageError("ranking names '" + id + "', which is not a configured decompiler");

  multidc::Options options{a.fallback_on_tests || cfg.multidc.fallback_on_tests};
  pipeline::Evaluator evaluator(cfg, self_path());
  auto filter = a.filters.build();
  filter.decompilers = {ranking.order.front()};
  auto units = pipeline::enumerate_cases(evaluator, filter);
  if (units.empty()) throw UsageError("the configuration and filters select no units");

  fs::path out = a.out.empty() ? cfg.output_root / "multidc" : fs::path(a.out);
  fs::remove_all(out / "sources");
  fs::create_directories(out / "sources");

  Progress progress(a.quiet, a.json_progress, units.size());
  std::vector<std::optional<multidc::MultiDcResult>> chosen(units.size());
  std::vector<std::string> errors(units.size());
  std::atomic<std::size_t> next{0};
  install_signal_handlers();
  auto worker = [&] {
    for (;;) {
      if (g_stop.load()) return;
      std::size_t i = next.fetch_add(1);
      if (i >= units.size()) return;
      try {
        chosen[i] = multidc::multi_decompile(units[i], ranking, evaluator, options);
        progress.report(units[i], chosen[i]->chosen + " " + std::string(pipeline::to_string(chosen[i]->result.category)),
                        false);
      } catch (const std::exception& e) {
        errors[i] = e.what();
        progress.report(units[i], std::string("InfrastructureError: ") + e.what(), true);
      }
    }
  };
  std::vector<std::thread> threads;
  for (int t = 1; t < std::max(1, cfg.pipeline.workers); ++t) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();

  pipeline::ResultSet set;
  set.config_hash = config::config_hash(cfg);
  json entries = json::array();
  for (std::size_t i = 0; i < units.size(); ++i) {
    pipeline::CaseKey key = units[i];
    key.decompiler = multidc::kMultiDcId;
    if (!chosen[i]) {
      if (!errors[i].empty()) set.failures.push_back({key, errors[i]});
      continue;
    }
    const auto& r = *chosen[i];
    set.cases.push_back(multidc::as_multidc_case(r));
    json entry = r;
    entry["key"] = {{"project", key.project}, {"unit", key.unit}, {"compiler", key.compiler}};
    json files = json::array();
    if (pipeline::is_recompilable(r.result.category)) {
      fs::path src = evaluator.decompiled_output(r.result.key);
      for (const auto& rel : toolchain::list_files(src, ".java")) {
        fs::path dest = out / "sources" / key.project / key.compiler / rel;
        fs::create_directories(dest.parent_path());
        fs::copy_file(src / rel, dest, fs::copy_options::overwrite_existing);
        files.push_back(fs::relative(dest, out).string());
      }
    }
    entry["sources"] = files;
    entries.push_back(entry);
  }
  set.sort();
  pipeline::resultset_store(set, out / "results.jsonl");
  json manifest = {{"ranking", ranking},
                   {"fallback_on_tests", options.fallback_on_tests},
                   {"config_hash", set.config_hash},
                   {"units", entries}};
  std::ofstream(out / "manifest.json") << manifest.dump(2) << "\n";
  progress.message("multidc: " + std::to_string(set.cases.size()) + " unit(s), manifest in " +
                   (out / "manifest.json").string());
  if (g_stop.load()) {
    std::cerr << "interrupted: " << set.cases.size() << " of " << units.size() << " unit(s) processed\n";
    return kFailures;
  }
  return set.failures.empty() ? kOk : kFailures;
}

struct FixtureArgs {
  std::string fixtures = "fixtures";
  std::string json_out;
  bool no_jdk = false;
  long timeout_ms = 10000;
  bool quiet = false;
};

int cmd_fixture_verify(const FixtureArgs& a) {
  if (!fs::is_directory(a.fixtures)) throw UsageError("fixture directory not found: " + a.fixtures);
  fixtures::VerifyOptions options{self_path(), toolchain::Millis(a.timeout_ms), !a.no_jdk};
  auto r = fixtures::fixture_verify(a.fixtures, options);
  if (!a.json_out.empty()) std::ofstream(a.json_out) << json(r).dump(2) << "\n";
  if (!a.quiet) {
    for (const auto& f : r.fixtures) {
      std::size_t n = 0;
      for (const auto& v : r.violations) n += v.fixture == f;
      std::cout << (n ? "FAIL " : "ok   ") << f << "\n";
    }
    for (const auto& v : r.violations) std::cout << "  " << v.fixture << " [" << v.check << "] " << v.detail << "\n";
    for (const auto& n : r.notes) std::cout << "note: " << n << "\n";
  }
  return r.ok() ? kOk : kFailures;
}

void add_stub_commands(CLI::App& app) {
  auto* stub = app.add_subcommand("stub", "Hermetic stand-ins for compilers, decompilers and test runners");
  stub->require_subcommand(1);

  auto cc = std::make_shared<stubs::CompileCopyArgs>();
  auto cc_inputs = std::make_shared<std::vector<std::string>>();
  auto* compile = stub->add_subcommand("compile-copy", "Copy the catalogued binaries of the given sources");
  compile->add_option("--project", cc->project_root, "Fixture project root")->required();
  compile->add_option("--flavor", cc->flavor, "Binary flavor: javac or ecj")->required();
  compile->add_option("--out", cc->output, "Output directory")->required();
  compile->add_option("--classpath", "Ignored; accepted for command-line compatibility");
  compile->add_option("inputs", *cc_inputs, "Source files")->required();
  compile->callback([cc, cc_inputs] {
    for (const auto& i : *cc_inputs) cc->inputs.emplace_back(i);
    throw CLI::RuntimeError(stubs::compile_copy(*cc, std::cout, std::cerr));
  });

  for (const auto& name : stubs::stub_names()) {
    if (name.rfind("decomp-", 0) != 0) continue;
    auto args = std::make_shared<stubs::DecompileArgs>();
    auto inputs = std::make_shared<std::vector<std::string>>();
    args->kind = stubs::decompiler_stub_from_string(name.substr(7));
    auto* d = stub->add_subcommand(name, "Stub decompiler " + name.substr(7));
    d->add_option("--project", args->project_root, "Fixture project root")->required();
    d->add_option("--out", args->output, "Output directory")->required();
    d->add_option("inputs", *inputs, "Class files")->required();
    d->callback([args, inputs] {
      for (const auto& i : *inputs) args->inputs.emplace_back(i);
      throw CLI::RuntimeError(stubs::decompile(*args, std::cout, std::cerr));
    });
  }

  auto tr = std::make_shared<stubs::TestRunnerArgs>();
  auto tr_cp = std::make_shared<std::string>();
  auto* runner = stub->add_subcommand("testrunner", "Report PASS/FAIL for the selected tests");
  runner->add_option("--project", tr->project_root, "Fixture project root")->required();
  runner->add_option("--classpath", *tr_cp, "Colon-separated class directories");
  runner->add_option("--sleep-ms", tr->sleep_ms, "Sleep before reporting");
  runner->add_flag("--spawn-child", tr->spawn_child, "Fork a child that never exits");
  runner->add_option("tests", tr->tests, "Test ids");
  runner->callback([tr, tr_cp] {
    tr->classpath = split_classpath(*tr_cp);
    throw CLI::RuntimeError(stubs::test_runner(*tr, std::cout, std::cerr));
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Differential testing harness for Java decompilers"};
  app.require_subcommand(1);

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "Evaluate the project x compiler x decompiler matrix");
  run->add_option("-c,--config", run_args.config, "Run configuration (JSON)")->required();
  run->add_option("--results", run_args.results, "Results file (default: <output_root>/results.jsonl)");
  auto* fresh = run->add_flag("--fresh", run_args.fresh, "Discard an existing results file");
  run->add_flag("--resume", run_args.resume, "Continue an existing results file (the default)")->excludes(fresh);
  run->add_option("-j,--workers", run_args.workers, "Worker threads (overrides the configuration)");
  run->add_flag("--force-tests", run_args.force_tests, "Run tests even for strictly equivalent bytecode");
  run->add_flag("--no-cache", run_args.no_cache, "Decompile once per case instead of sharing outputs");
  run->add_flag("-q,--quiet", run_args.quiet, "No progress output");
  run->add_flag("--json-progress", run_args.json_progress, "Progress as JSON lines");
  run->add_flag("--fail-on-deceptive", run_args.fail_on_deceptive, "Exit 1 when a deceptive case is found");
  run_args.filters.add_to(run, true);

  ReportArgs report_args;
  auto* rep = app.add_subcommand("report", "Aggregate a results file into tables and analyses");
  rep->add_option("-r,--results", report_args.results, "Results file")->required();
  rep->add_option("-o,--out", report_args.out, "Output directory (default: <results dir>/report)");
  rep->add_option("--format", report_args.format, "Summary printed to stdout: markdown, csv or json");
  rep->add_flag("--chisq", report_args.chisq, "Also test the compiler effect per decompiler");
  rep->add_option("--partition", report_args.partition, "Comma-separated decompilers for the coverage partition");
  rep->add_flag("-q,--quiet", report_args.quiet, "Print nothing on success");
  rep->add_flag("--fail-on-deceptive", report_args.fail_on_deceptive, "Exit 1 when a deceptive case is present");

  MultiDcArgs mdc_args;
  auto* mdc = app.add_subcommand("multidc", "Run the ranked meta-decompiler over every unit");
  mdc->add_option("-c,--config", mdc_args.config, "Run configuration (JSON)")->required();
  mdc->add_option("--ranking", mdc_args.ranking, "Comma-separated decompiler order");
  mdc->add_option("--ranking-from", mdc_args.ranking_from, "Rank decompilers by their results in this file");
  mdc->add_option("-o,--out", mdc_args.out, "Output directory (default: <output_root>/multidc)");
  mdc->add_flag("--fallback-on-tests", mdc_args.fallback_on_tests, "Also fall back past failing or hanging tests");
  mdc->add_option("-j,--workers", mdc_args.workers, "Worker threads (overrides the configuration)");
  mdc->add_flag("-q,--quiet", mdc_args.quiet, "No progress output");
  mdc->add_flag("--json-progress", mdc_args.json_progress, "Progress as JSON lines");
  mdc_args.filters.add_to(mdc, false);

  FixtureArgs fx_args;
  auto* fx = app.add_subcommand("fixture-verify", "Check the fixture corpus invariants");
  fx->add_option("--fixtures", fx_args.fixtures, "Fixture root directory");
  fx->add_option("--json", fx_args.json_out, "Write the report as JSON");
  fx->add_flag("--no-jdk", fx_args.no_jdk, "Skip the javac and JUnit checks");
  fx->add_option("--timeout-ms", fx_args.timeout_ms, "Per test-run timeout");
  fx->add_flag("-q,--quiet", fx_args.quiet, "Print nothing");

  add_stub_commands(app);

  try {
    app.parse(argc, argv);
    if (run->parsed()) return cmd_run(run_args);
    if (rep->parsed()) return cmd_report(report_args);
    if (mdc->parsed()) return cmd_multidc(mdc_args);
    if (fx->parsed()) return cmd_fixture_verify(fx_args);
  } catch (const CLI::RuntimeError& e) {
    return e.get_exit_code();
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  } catch (const config::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kUsage;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const pipeline::ConfigHashMismatch& e) {
    std::cerr << "error: " << e.what() << " (use --fresh or another --results path)\n";
    return kUsage;
  } catch (const pipeline::CorruptRecord& e) {
    std::cerr << "error: corrupt results file: " << e.what() << "\n";
    return kUsage;
  } catch (const pipeline::VersionMismatch& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const report::UnsupportedFormat& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailures;
  }
  return kOk;
}
