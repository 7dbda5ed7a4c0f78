#pragma once

#include <stdlib.h>

#include <filesystem>
#include <string>

#include "dceval/config.hpp"
#include "fixture_paths.hpp"

namespace dceval::testing {

inline std::string cli_path() { return DCEVAL_CLI_PATH; }
inline std::filesystem::path test_data() { return DCEVAL_TEST_DATA_DIR; }

class TempDir {
 public:
  TempDir() {
    std::string tmpl = (std::filesystem::temp_directory_path() / "dceval-test-XXXXXX").string();
    if (!mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
    path_ = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  std::filesystem::path path_;
};

// The hermetic configuration: stub compilers, the five stub decompilers of
// the acceptance matrix and the stub test runner over the five fixtures.
inline config::RunConfig stub_config(const std::filesystem::path& output_root) {
  setenv("DCEVAL_FIXTURES", fixtures_root().c_str(), 1);
  setenv("DCEVAL_OUT", output_root.c_str(), 1);
  return config::load_config(test_data() / "stub-config.json");
}

}  // namespace dceval::testing
