#include <algorithm>
#include <random>
#include <set>

#include "../support/synthetic.hpp"
#include "dceval/multidc.hpp"
#include "doctest.h"
#include "harness.hpp"

using namespace dceval::multidc;
using dceval::pipeline::CaseKey;
using dceval::pipeline::CaseResult;
using dceval::pipeline::Category;
using dceval::pipeline::Evaluator;
using dceval::pipeline::ResultSet;
using dceval::testing::cli_path;
using dceval::testing::stub_config;
using dceval::testing::TempDir;

namespace {

using Triple = std::tuple<std::string, std::string, std::string>;

Triple triple(const CaseKey& k) { return {k.project, k.unit, k.compiler}; }

std::vector<CaseKey> units_of(const Evaluator& ev) {
  dceval::pipeline::CaseFilter f;
  f.decompilers = {"identity"};
  auto keys = dceval::pipeline::enumerate_cases(ev, f);
  for (auto& k : keys) k.decompiler.clear();
  return keys;
}

CaseResult tested_case(const std::string& decompiler, const std::string& unit, Category c) {
  CaseResult r;
  r.key = {"p", unit, "javac", decompiler};
  r.category = c;
  r.tested = true;
  return r;
}

}  // namespace

TEST_CASE("ranking from the published totals") {
  auto r = rank_decompilers(dceval::testing::published_result_set(false));
  CHECK(r.provenance == Provenance::FromResultSet);
  CHECK(r.order == std::vector<std::string>{"Procyon", "CFR", "Fernflower", "JADX", "JD-Core", "Jode", "Dava",
                                            "Krakatau"});
  CHECK(r.rates.at("Procyon") == doctest::Approx(1869.0 / 2397));
}

TEST_CASE("ranking ties fall back to the id") {
  ResultSet rs;
  rs.cases = {tested_case("zeta", "A.java", Category::StrictlyEquivalent),
              tested_case("alpha", "A.java", Category::EquivalentModuloInputs),
              tested_case("mid", "A.java", Category::Deceptive)};
  auto untested = tested_case("mid", "B.java", Category::NotTested);
  untested.tested = false;
  rs.cases.push_back(untested);
  auto r = rank_decompilers(rs);
  CHECK(r.order == std::vector<std::string>{"alpha", "zeta", "mid"});
  CHECK(r.rates.at("mid") == 0.0);

  ResultSet single;
  single.cases = {tested_case("only", "A.java", Category::SyntacticallyIncorrect)};
  CHECK(rank_decompilers(single).order == std::vector<std::string>{"only"});
  CHECK_THROWS_AS(rank_decompilers(ResultSet{}), EmptyResultSet);
}

TEST_CASE("explicit rankings are validated") {
  auto r = explicit_ranking({"b", "a"});
  CHECK(r.order == std::vector<std::string>{"b", "a"});
  CHECK(r.provenance == Provenance::Explicit);
  CHECK_THROWS_AS(explicit_ranking({}), std::invalid_argument);
  CHECK_THROWS_AS(explicit_ranking({"a", "b", "a"}), std::invalid_argument);
  nlohmann::json j = r;
  CHECK(j.at("provenance") == "Explicit");
}

TEST_CASE("the first recompilable decompiler is chosen") {
  TempDir out;
  Evaluator ev(stub_config(out.path()), cli_path());
  CaseKey foo{"foo", "dctest/Foo.java", "javac", ""};
  auto r = multi_decompile(foo, explicit_ranking({"crash", "syntaxbreak", "identity", "equiv"}), ev);
  CHECK(r.chosen == "identity");
  CHECK(r.attempts == std::vector<std::string>{"crash", "syntaxbreak", "identity"});
  CHECK(r.result.category == Category::StrictlyEquivalent);
  auto relabelled = as_multidc_case(r);
  CHECK(relabelled.key.decompiler == kMultiDcId);
  CHECK(relabelled.diagnostics.at("chosen") == "identity");
  nlohmann::json j = r;
  CHECK(j.at("attempts").size() == 3);

  CaseKey singleton{"singleton", "org/bukkit/Bukkit.java", "javac", ""};
  auto deceptive = multi_decompile(singleton, explicit_ranking({"mutant", "identity"}), ev);
  CHECK(deceptive.chosen == "mutant");
  CHECK(deceptive.result.category == Category::Deceptive);
  CHECK(deceptive.attempts.size() == 1);

  auto fallback = multi_decompile(singleton, explicit_ranking({"mutant", "identity"}), ev, {true});
  CHECK(fallback.chosen == "identity");
  CHECK(fallback.result.category == Category::StrictlyEquivalent);

  auto kept = multi_decompile(singleton, explicit_ranking({"crash", "mutant", "syntaxbreak"}), ev, {true});
  CHECK(kept.chosen == "mutant");
  CHECK(kept.result.category == Category::Deceptive);
  CHECK(kept.attempts.size() == 3);

  auto none = multi_decompile(foo, explicit_ranking({"syntaxbreak", "crash"}), ev);
  CHECK(none.chosen == "crash");
  CHECK(none.result.category == Category::EmptyOutput);
}

TEST_CASE("Multi-DC recompiles exactly the union of the individual decompilers") {
  TempDir out;
  auto cfg = stub_config(out.path());
  Evaluator ev(cfg, cli_path());
  dceval::pipeline::MatrixOptions opts;
  opts.workers = cfg.pipeline.workers;
  auto rs = dceval::pipeline::evaluate_matrix(ev, dceval::pipeline::enumerate_cases(ev), opts);
  REQUIRE(rs.failures.empty());
  std::set<Triple> union_set;
  for (const auto& c : rs.cases)
    if (dceval::pipeline::is_recompilable(c.category)) union_set.insert(triple(c.key));
  REQUIRE_FALSE(union_set.empty());

  auto ranking = rank_decompilers(rs);
  std::vector<std::vector<std::string>> orders = {ranking.order};
  std::mt19937 rng(7);
  for (int i = 0; i < 3; ++i) {
    auto o = ranking.order;
    std::shuffle(o.begin(), o.end(), rng);
    orders.push_back(o);
  }
  for (const auto& order : orders) {
    CAPTURE(nlohmann::json(order).dump());
    std::set<Triple> multi;
    for (const auto& unit : units_of(ev)) {
      auto r = multi_decompile(unit, explicit_ranking(order), ev);
      auto individual = std::find_if(order.begin(), order.end(), [&](const std::string& d) {
        CaseKey k = unit;
        k.decompiler = d;
        return dceval::pipeline::is_recompilable(rs.find(k)->category);
      });
      CHECK(r.attempts.size() == (individual == order.end() ? order.size() : individual - order.begin() + 1));
      if (dceval::pipeline::is_recompilable(r.result.category)) multi.insert(triple(r.result.key));
    }
    CHECK(multi == union_set);
  }
}
