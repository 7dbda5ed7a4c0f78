#pragma once

// Self-check of the fixture corpus: committed binaries parse and round-trip,
// every unit is covered by the test map, the tests pass on the original
// binaries and detect the seeded mutants. With a JDK on the PATH (or under
// JAVA_HOME) fresh javac builds are also compared with the committed
// binaries.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dceval/toolchain.hpp"
#include "json.hpp"

namespace dceval::fixtures {

namespace fs = std::filesystem;

struct Violation {
  std::string fixture;
  std::string check;
  std::string detail;
  bool operator==(const Violation&) const = default;
};

struct VerifyOptions {
  std::string self;  // executable providing `stub testrunner`
  toolchain::Millis test_timeout{10000};
  bool use_jdk = true;
};

struct VerifyReport {
  std::vector<std::string> fixtures;
  std::vector<Violation> violations;
  std::vector<std::string> notes;
  bool ok() const { return violations.empty(); }
};

// Fixtures are the subdirectories of `root` holding a project.json.
VerifyReport fixture_verify(const fs::path& root, const VerifyOptions& options);

std::optional<fs::path> find_jdk_tool(const std::string& name);

void to_json(nlohmann::json& j, const Violation& v);
void to_json(nlohmann::json& j, const VerifyReport& r);

}  // namespace dceval::fixtures
