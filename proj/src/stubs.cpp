#include <signal.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "dceval/classfile.hpp"
#include "dceval/srcdiff.hpp"
#include "dceval/stubs.hpp"
#include "json.hpp"

namespace dceval::stubs {

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + p.string());
}

nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(read_file(p)); }

fs::path source_root(const fs::path& project_root) {
  auto manifest = project_root / "project.json";
  std::string rel = "src";
  if (fs::exists(manifest)) rel = read_json(manifest).value("source_root", rel);
  return project_root / rel;
}

std::vector<Hunk> hunks_for(const fs::path& project_root, std::string_view variant, const std::string& unit) {
  std::vector<Hunk> out;
  auto path = project_root / "stub-variants.json";
  if (!fs::exists(path)) return out;
  auto j = read_json(path);
  if (!j.contains(variant) || !j.at(variant).contains(unit)) return out;
  for (const auto& h : j.at(variant).at(unit))
    out.push_back({h.at("at").get<std::size_t>(), h.at("delete").get<std::size_t>(),
                   h.at("insert").get<std::vector<std::string>>()});
  return out;
}

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string fnv1a64_hex(std::string_view bytes) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(bytes)));
  return buf;
}

std::string apply_hunks(const std::string& text, std::vector<Hunk> hunks) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  for (;;) {
    auto nl = text.find('\n', start);
    lines.push_back(text.substr(start, nl == std::string::npos ? std::string::npos : nl - start));
    if (nl == std::string::npos) break;
    start = nl + 1;
  }
  std::sort(hunks.begin(), hunks.end(), [](const Hunk& a, const Hunk& b) { return a.at > b.at; });
  for (const auto& h : hunks) {
    if (h.at == 0 || h.at - 1 + h.remove > lines.size()) throw std::invalid_argument("hunk outside the text");
    auto first = lines.begin() + static_cast<std::ptrdiff_t>(h.at - 1);
    lines.erase(first, first + static_cast<std::ptrdiff_t>(h.remove));
    lines.insert(lines.begin() + static_cast<std::ptrdiff_t>(h.at - 1), h.insert.begin(), h.insert.end());
  }
  std::string out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i) out += '\n';
    out += lines[i];
  }
  return out;
}

std::string_view to_string(DecompilerStub kind) {
  switch (kind) {
    case DecompilerStub::Identity: return "identity";
    case DecompilerStub::Equiv: return "equiv";
    case DecompilerStub::Mutant: return "mutant";
    case DecompilerStub::Crash: return "crash";
    case DecompilerStub::SyntaxBreak: return "syntaxbreak";
    case DecompilerStub::Empty: return "empty";
  }
  return "?";
}

DecompilerStub decompiler_stub_from_string(std::string_view name) {
  for (auto k : {DecompilerStub::Identity, DecompilerStub::Equiv, DecompilerStub::Mutant, DecompilerStub::Crash,
                 DecompilerStub::SyntaxBreak, DecompilerStub::Empty})
    if (to_string(k) == name) return k;
  throw std::invalid_argument("unknown decompiler stub '" + std::string(name) + "'");
}

const std::vector<std::string>& stub_names() {
  static const std::vector<std::string> names{"compile-copy",    "decomp-identity", "decomp-equiv",
                                              "decomp-mutant",   "decomp-crash",    "decomp-syntaxbreak",
                                              "decomp-empty",    "testrunner"};
  return names;
}

std::string unit_of_class(const fs::path& class_file) {
  auto cls = classfile::read_class_file(class_file.string());
  std::string name = cls.name();
  auto slash = name.rfind('/');
  std::string package = slash == std::string::npos ? "" : name.substr(0, slash + 1);
  std::string simple = slash == std::string::npos ? name : name.substr(slash + 1);
  for (const auto& a : cls.attributes) {
    if (cls.constant_pool.utf8(a.name_index) != "SourceFile") continue;
    const auto* raw = std::get_if<std::vector<std::uint8_t>>(&a.body);
    if (raw && raw->size() == 2) return package + cls.constant_pool.utf8(static_cast<std::uint32_t>((*raw)[0] << 8 | (*raw)[1]));
  }
  return package + simple.substr(0, simple.find('$')) + ".java";
}

int compile_copy(const CompileCopyArgs& args, std::ostream& out, std::ostream& err) {
  nlohmann::json catalog;
  try {
    catalog = read_json(args.project_root / "catalog.json").at("entries");
  } catch (const std::exception& e) {
    err << "error: cannot load catalog: " << e.what() << "\n";
    return 2;
  }
  if (args.inputs.empty()) {
    err << "error: no source files\n";
    return 2;
  }
  std::vector<std::pair<fs::path, fs::path>> copies;
  int errors = 0;
  for (const auto& input : args.inputs) {
    std::string text;
    try {
      text = read_file(input);
    } catch (const std::exception& e) {
      err << "error: " << e.what() << "\n";
      ++errors;
      continue;
    }
    try {
      srcdiff::parse_source(text);
    } catch (const srcdiff::ParseError& e) {
      err << input.string() << ":" << e.line() << ":" << e.column() << ": error: " << e.what() << "\n";
      ++errors;
      continue;
    }
    std::string key = fnv1a64_hex(text);
    if (!catalog.contains(key) || !catalog.at(key).contains(args.flavor)) {
      err << input.string() << ": error: no catalogued " << args.flavor << " binary for this source (" << key
          << ")\n";
      ++errors;
      continue;
    }
    const auto& entry = catalog.at(key).at(args.flavor);
    fs::path root = args.project_root / entry.at("root").get<std::string>();
    for (const auto& f : entry.at("files")) copies.push_back({root / f.get<std::string>(), args.output / f.get<std::string>()});
  }
  if (errors) {
    err << errors << (errors == 1 ? " error\n" : " errors\n");
    return 1;
  }
  for (const auto& [from, to] : copies) {
    fs::create_directories(to.parent_path());
    fs::copy_file(from, to, fs::copy_options::overwrite_existing);
    out << "wrote " << to.string() << "\n";
  }
  return 0;
}

int decompile(const DecompileArgs& args, std::ostream& out, std::ostream& err) {
  if (args.kind == DecompilerStub::Crash) {
    err << "Exception in thread \"main\" java.lang.IllegalStateException: stub decompiler crash\n";
    return 3;
  }
  std::set<std::string> units;
  for (const auto& input : args.inputs) {
    try {
      units.insert(unit_of_class(input));
    } catch (const std::exception& e) {
      err << input.string() << ": " << e.what() << "\n";
      return 1;
    }
  }
  if (args.kind == DecompilerStub::Empty) return 0;
  for (const auto& unit : units) {
    std::string text;
    try {
      text = read_file(source_root(args.project_root) / unit);
    } catch (const std::exception& e) {
      err << e.what() << "\n";
      return 1;
    }
    switch (args.kind) {
      case DecompilerStub::Equiv: text = apply_hunks(text, hunks_for(args.project_root, "equiv", unit)); break;
      case DecompilerStub::Mutant: text = apply_hunks(text, hunks_for(args.project_root, "mutant", unit)); break;
      case DecompilerStub::SyntaxBreak: {
        std::size_t lines = static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
        std::size_t keep = lines / 2, pos = 0;
        for (std::size_t i = 0; i < keep; ++i) pos = text.find('\n', pos) + 1;
        text.resize(pos);
        break;
      }
      default: break;
    }
    write_file(args.output / unit, text);
    out << "decompiled " << unit << "\n";
  }
  return 0;
}

int test_runner(const TestRunnerArgs& args, std::ostream& out, std::ostream& err) {
  if (args.spawn_child) {
    pid_t child = fork();
    if (child == 0) {
      for (;;) pause();
    }
  }
  if (args.sleep_ms > 0) std::this_thread::sleep_for(std::chrono::milliseconds(args.sleep_ms));
  std::set<std::string> failing, hanging;
  auto behavior = args.project_root / "tests" / "behavior.json";
  if (fs::exists(behavior)) {
    nlohmann::json rules;
    try {
      rules = read_json(behavior).at("rules");
    } catch (const std::exception& e) {
      err << "cannot load " << behavior.string() << ": " << e.what() << "\n";
      return 2;
    }
    for (const auto& rule : rules) {
      std::string rel = rule.at("class").get<std::string>();
      for (const auto& dir : args.classpath) {
        if (!fs::exists(dir / rel)) continue;
        if (fnv1a64_hex(read_file(dir / rel)) == rule.at("hash").get<std::string>()) {
          for (const auto& id : rule.value("fail", nlohmann::json::array())) failing.insert(id.get<std::string>());
          for (const auto& id : rule.value("hang", nlohmann::json::array())) hanging.insert(id.get<std::string>());
        }
        break;
      }
    }
  }
  int failed = 0;
  for (const auto& id : args.tests) {
    if (hanging.count(id)) {
      out.flush();
      for (;;) pause();
    }
    bool fail = failing.count(id) > 0;
    failed += fail;
    out << (fail ? "FAIL " : "PASS ") << id << "\n";
  }
  return failed ? 1 : 0;
}

}  // namespace dceval::stubs
