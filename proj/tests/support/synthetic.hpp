#pragma once

// Synthetic result sets shaped after the published study totals.

#include <cstdio>
#include <string>
#include <vector>

#include "dceval/pipeline.hpp"

namespace dceval::testing {

struct PublishedRow {
  std::string decompiler;
  std::size_t recompilable;
  std::string recompilable_ratio;
  std::size_t pass;
  std::string pass_ratio;
  std::size_t deceptive;
  std::string astdiff;
};

inline constexpr std::size_t kStudyCases = 3928;
inline constexpr std::size_t kStudyTested = 2397;

inline const std::vector<PublishedRow>& published_summary() {
  static const std::vector<PublishedRow> rows = {
      {"CFR", 3097, "0.79", 1713, "0.71", 22, "0.05"},
      {"Dava", 1747, "0.44", 762, "0.32", 36, "0.17"},
      {"Fernflower", 2663, "0.68", 1435, "0.60", 21, "0.08"},
      {"JADX", 2736, "0.70", 1408, "0.59", 78, "0.07"},
      {"JD-Core", 2726, "0.69", 1375, "0.57", 82, "0.06"},
      {"Jode", 2569, "0.65", 1161, "0.48", 142, "0.09"},
      {"Krakatau", 1746, "0.44", 724, "0.30", 97, "0.20"},
      {"Procyon", 3281, "0.84", 1869, "0.78", 33, "0.08"},
      {"Multi-DC", 3734, "0.95", 2174, "0.91", 45, "0.08"},
  };
  return rows;
}

inline std::string synthetic_unit(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "u/C%04zu.java", i);
  return buf;
}

// One project, one compiler, kStudyCases units of which the first
// kStudyTested have tests. Per decompiler the tested units are, in order,
// `pass` EquivalentModuloInputs, `deceptive` Deceptive, then
// SyntacticallyIncorrect; the untested units hold the remaining recompilable
// cases as NotTested, then SyntacticallyIncorrect. Recompilable cases carry
// a distortion equal to the published ASTDiff.
inline pipeline::ResultSet published_result_set(bool with_multidc = true) {
  using pipeline::Category;
  pipeline::ResultSet rs;
  rs.config_hash = "synthetic";
  for (const auto& row : published_summary()) {
    if (!with_multidc && row.decompiler == "Multi-DC") continue;
    double ast = std::stod(row.astdiff);
    std::size_t untested_recompilable = row.recompilable - row.pass - row.deceptive;
    for (std::size_t i = 0; i < kStudyCases; ++i) {
      pipeline::CaseResult c;
      c.key = {"study", synthetic_unit(i), "javac", row.decompiler};
      c.tested = i < kStudyTested;
      if (c.tested) {
        c.category = i < row.pass                   ? Category::EquivalentModuloInputs
                     : i < row.pass + row.deceptive ? Category::Deceptive
                                                    : Category::SyntacticallyIncorrect;
      } else {
        c.category = i - kStudyTested < untested_recompilable ? Category::NotTested : Category::SyntacticallyIncorrect;
      }
      if (pipeline::is_recompilable(c.category)) c.distortion = srcdiff::DistortionScore{1, 1, ast};
      rs.cases.push_back(std::move(c));
    }
  }
  rs.sort();
  return rs;
}

// Six decompilers over kStudyTested tested units: 589 handled by all, 157
// by none, 276 by exactly one (46 each) and the rest by exactly two.
inline const std::vector<std::string>& coverage_decompilers() {
  static const std::vector<std::string> ids = {"CFR", "Fernflower", "JADX", "JD-Core", "Jode", "Procyon"};
  return ids;
}

inline pipeline::ResultSet coverage_result_set() {
  using pipeline::Category;
  const auto& ids = coverage_decompilers();
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t a = 0; a < ids.size(); ++a)
    for (std::size_t b = a + 1; b < ids.size(); ++b) pairs.push_back({a, b});
  pipeline::ResultSet rs;
  rs.config_hash = "synthetic";
  for (std::size_t i = 0; i < kStudyTested; ++i) {
    std::vector<bool> handled(ids.size(), false);
    if (i < 589) {
      handled.assign(ids.size(), true);
    } else if (i < 589 + 157) {
    } else if (i < 589 + 157 + 276) {
      handled[(i - 589 - 157) % ids.size()] = true;
    } else {
      auto [a, b] = pairs[(i - 589 - 157 - 276) % pairs.size()];
      handled[a] = handled[b] = true;
    }
    for (std::size_t d = 0; d < ids.size(); ++d) {
      pipeline::CaseResult c;
      c.key = {"study", synthetic_unit(i), "javac", ids[d]};
      c.tested = true;
      c.category = handled[d] ? Category::StrictlyEquivalent : Category::SyntacticallyIncorrect;
      rs.cases.push_back(std::move(c));
    }
  }
  rs.sort();
  return rs;
}

}  // namespace dceval::testing
