#pragma once

// Hermetic stand-ins for compilers, decompilers and test runners. They read
// the per-fixture catalogs (catalog.json, stub-variants.json,
// tests/behavior.json) and need no Java installation.

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace dceval::stubs {

namespace fs = std::filesystem;

std::uint64_t fnv1a64(std::string_view bytes);
std::string fnv1a64_hex(std::string_view bytes);

struct Hunk {
  std::size_t at = 1;  // 1-based first line replaced
  std::size_t remove = 0;
  std::vector<std::string> insert;
};

// Hunks are applied from the highest line number down, so each `at` refers to
// the original text.
std::string apply_hunks(const std::string& text, std::vector<Hunk> hunks);

enum class DecompilerStub { Identity, Equiv, Mutant, Crash, SyntaxBreak, Empty };
std::string_view to_string(DecompilerStub kind);
DecompilerStub decompiler_stub_from_string(std::string_view name);
const std::vector<std::string>& stub_names();

// Source unit ("pkg/Outer.java") a class binary belongs to.
std::string unit_of_class(const fs::path& class_file);

struct CompileCopyArgs {
  fs::path project_root;
  std::string flavor;
  fs::path output;
  std::vector<fs::path> inputs;
};
int compile_copy(const CompileCopyArgs& args, std::ostream& out, std::ostream& err);

struct DecompileArgs {
  DecompilerStub kind = DecompilerStub::Identity;
  fs::path project_root;
  fs::path output;
  std::vector<fs::path> inputs;
};
int decompile(const DecompileArgs& args, std::ostream& out, std::ostream& err);

struct TestRunnerArgs {
  fs::path project_root;
  std::vector<fs::path> classpath;
  std::vector<std::string> tests;
  long sleep_ms = 0;
  bool spawn_child = false;
};
// Prints `PASS id` / `FAIL id` per selected test. A selected test marked as
// hanging for the staged binaries makes the runner block until killed.
int test_runner(const TestRunnerArgs& args, std::ostream& out, std::ostream& err);

}  // namespace dceval::stubs
