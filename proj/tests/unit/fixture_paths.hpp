#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace dceval::testing {

inline std::filesystem::path fixtures_root() { return DCEVAL_FIXTURES_DIR; }

// Every committed file with the given extension under fixtures/, in a stable
// order.
inline std::vector<std::filesystem::path> committed_files(const std::string& extension) {
  std::vector<std::filesystem::path> out;
  for (const auto& e : std::filesystem::recursive_directory_iterator(fixtures_root())) {
    if (e.is_regular_file() && e.path().extension() == extension) out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline std::vector<std::filesystem::path> committed_class_files() { return committed_files(".class"); }

inline std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// (original, variant) source pairs: each variant source next to the original
// it was derived from.
inline std::vector<std::pair<std::filesystem::path, std::filesystem::path>> variant_source_pairs() {
  std::vector<std::pair<std::filesystem::path, std::filesystem::path>> out;
  for (const auto& v : committed_files(".java")) {
    auto rel = std::filesystem::relative(v, fixtures_root());
    auto it = rel.begin();
    std::filesystem::path fixture = *it++;
    if (it == rel.end() || *it != "variants") continue;
    ++it;
    ++it;
    std::filesystem::path rest;
    for (; it != rel.end(); ++it) rest /= *it;
    auto original = fixtures_root() / fixture / rest;
    if (std::filesystem::exists(original)) out.push_back({original, v});
  }
  return out;
}

}  // namespace dceval::testing
