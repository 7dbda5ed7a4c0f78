#include <algorithm>
#include <map>
#include <random>
#include <regex>
#include <set>

#include "dceval/srcdiff.hpp"
#include "doctest.h"
#include "fixture_paths.hpp"
#include "../support/tree_oracle.hpp"

using namespace dceval::srcdiff;
using dceval::testing::fixtures_root;
using dceval::testing::read_text;

namespace {

std::size_t count_kind(const SourceTree& t, NodeKind k) {
  return static_cast<std::size_t>(
      std::count_if(t.nodes.begin(), t.nodes.end(), [&](const Node& n) { return n.kind == k; }));
}

std::string foo_original() { return read_text(fixtures_root() / "foo/src/dctest/Foo.java"); }
std::string foo_equiv() { return read_text(fixtures_root() / "foo/variants/equiv/src/dctest/Foo.java"); }

std::string rename_words(std::string text, const std::map<std::string, std::string>& renames) {
  for (const auto& [from, to] : renames) text = std::regex_replace(text, std::regex("\\b" + from + "\\b"), to);
  return text;
}

SourceTree random_tree(std::mt19937& rng, int nodes) {
  static const NodeKind kinds[] = {NodeKind::Block, NodeKind::ExpressionStatement, NodeKind::SimpleName};
  static const char* labels[] = {"", "a", "b", "c"};
  SourceTree t;
  for (int i = 0; i < nodes; ++i) {
    int parent = i == 0 ? -1 : static_cast<int>(rng() % static_cast<unsigned>(i));
    t.add(kinds[rng() % 3], labels[rng() % 4], parent);
  }
  return t;
}

}  // namespace

TEST_CASE("a class declaration is labeled with its name") {
  auto t = parse_source("class A {}");
  REQUIRE(t.node_count() == 3);
  CHECK(t.at(t.root).kind == NodeKind::CompilationUnit);
  const Node& decl = t.at(t.at(t.root).children.at(0));
  CHECK(decl.kind == NodeKind::TypeDeclaration);
  CHECK(decl.label == "A");
  CHECK(t.at(decl.children.at(0)).kind == NodeKind::SimpleName);
}

TEST_CASE("Utils parses into the expected statement kinds") {
  auto t = parse_source(read_text(fixtures_root() / "utils/src/org/apache/commons/codec/net/Utils.java"));
  CHECK(count_kind(t, NodeKind::IfStatement) >= 1);
  CHECK(count_kind(t, NodeKind::ThrowStatement) >= 1);
  CHECK(count_kind(t, NodeKind::MethodDeclaration) == 1);
}

TEST_CASE("Foo has 104 nodes by hand count") {
  auto t = parse_source(foo_original());
  CHECK(t.node_count() == 104);
  CHECK(count_kind(t, NodeKind::MethodDeclaration) == 3);
  CHECK(count_kind(t, NodeKind::SwitchCase) == 4);
}

TEST_CASE("Foo equivalent rewrite costs one move and two deletes") {
  auto a = parse_source(foo_original());
  auto b = parse_source(foo_equiv());
  auto script = diff(a, b);
  std::multiset<std::pair<ActionType, NodeKind>> got;
  for (const auto& act : script.actions) got.insert({act.type, act.kind});
  std::multiset<std::pair<ActionType, NodeKind>> want{{ActionType::Move, NodeKind::ReturnStatement},
                                                      {ActionType::Delete, NodeKind::BreakStatement},
                                                      {ActionType::Delete, NodeKind::ContinueStatement}};
  CHECK(got == want);
  auto d = distortion(script, a);
  CHECK(d.counted_edits == 3);
  CHECK(d.original_nodes == 104);
  CHECK(d.ratio == doctest::Approx(3.0 / 104.0));
}

TEST_CASE("every fixture source reprints to an isomorphic tree") {
  auto files = dceval::testing::committed_files(".java");
  REQUIRE(files.size() >= 15);
  for (const auto& f : files) {
    CAPTURE(f);
    auto t = parse_source(read_text(f));
    auto again = parse_source(reprint(t));
    CHECK(isomorphic(t, again));
    CHECK(reprint(again) == reprint(t));
  }
}

TEST_CASE("node spans nest inside their parents in order") {
  for (const auto& f : dceval::testing::committed_files(".java")) {
    CAPTURE(f);
    std::string text = read_text(f);
    auto t = parse_source(text);
    for (int id : t.preorder()) {
      const Node& n = t.at(id);
      REQUIRE(n.begin <= n.end);
      REQUIRE(n.end <= text.size());
      std::size_t cursor = n.begin;
      for (int c : n.children) {
        CHECK(t.at(c).begin >= cursor);
        CHECK(t.at(c).end <= n.end);
        CHECK(t.at(c).parent == id);
        cursor = t.at(c).end;
      }
    }
  }
}

TEST_CASE("parse errors carry line and column") {
  try {
    parse_source("class A {\n  int x = ;\n}");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
    CHECK(e.column() == 11);
  }
  CHECK_THROWS_AS(parse_source("class A { /* open"), ParseError);
  CHECK_THROWS_AS(parse_source("class A { String s = \"x; }"), ParseError);
}

TEST_CASE("formatting and comments do not change the tree") {
  auto a = parse_source("class A { int f(int x) { return x + 1; } }");
  auto b = parse_source("// lead\nclass A {\n  int f(int x) {\n    /* c */ return x+1;\n  }\n}\n");
  CHECK(isomorphic(a, b));
  CHECK(diff(a, b).empty());
}

TEST_CASE("a tree diffed against itself yields an empty script") {
  for (const auto& f : dceval::testing::committed_files(".java")) {
    CAPTURE(f);
    auto t = parse_source(read_text(f));
    CHECK(diff(t, t).empty());
  }
}

TEST_CASE("scripts transform the original into the decompiled tree") {
  auto pairs = dceval::testing::variant_source_pairs();
  REQUIRE(pairs.size() >= 10);
  for (const auto& [o, v] : pairs) {
    CAPTURE(v);
    auto a = parse_source(read_text(o));
    auto b = parse_source(read_text(v));
    for (int dir = 0; dir < 2; ++dir) {
      const auto& from = dir == 0 ? a : b;
      const auto& to = dir == 0 ? b : a;
      auto mapping = match_trees(from, to);
      auto script = generate_script(from, to, mapping);
      CHECK(script.size() == script_cost(from, to, mapping));
      CHECK(isomorphic(apply_script(from, script), to));
      CHECK(diff(from, to) == script);
    }
  }
}

TEST_CASE("scripts replay on random tree pairs and match their cost") {
  std::mt19937 rng(7);
  for (int round = 0; round < 300; ++round) {
    auto a = random_tree(rng, 1 + static_cast<int>(rng() % 30));
    auto b = random_tree(rng, 1 + static_cast<int>(rng() % 30));
    auto mapping = match_trees(a, b);
    auto script = generate_script(a, b, mapping);
    CHECK(script.size() == script_cost(a, b, mapping));
    CHECK(isomorphic(apply_script(a, script), b));
  }
}

TEST_CASE("renaming locals and parameters costs only identifier updates") {
  std::string original = foo_original();
  std::string renamed =
      rename_words(original, {{"i", "p"}, {"j", "q"}, {"k", "r"}, {"re", "ex"}, {"values", "xs"}, {"total", "acc"},
                              {"v", "w"}});
  auto a = parse_source(original);
  auto b = parse_source(renamed);
  auto script = diff(a, b);
  CHECK_FALSE(script.empty());
  for (const auto& act : script.actions) {
    CHECK(act.type == ActionType::Update);
    CHECK(act.kind == NodeKind::SimpleName);
  }
  CHECK(distortion(script, a).ratio == 0.0);
  auto record = score_sources("dctest/Foo.java", original, renamed);
  REQUIRE(record.score);
  CHECK(record.renames == script.size());
  CHECK(record.score->counted_edits == 0);
}

TEST_CASE("distortion is zero in both directions exactly for isomorphic trees") {
  auto a = parse_source(foo_original());
  auto b = parse_source(foo_equiv());
  CHECK(distortion(diff(a, a), a).ratio == 0.0);
  CHECK(distortion(diff(a, b), a).ratio > 0.0);
  CHECK(distortion(diff(b, a), b).ratio > 0.0);
}

TEST_CASE("apply_script rejects actions that do not fit the tree") {
  auto t = parse_source("class A { int x; }");
  EditScript bad_delete{{Action{ActionType::Delete, t.root, NodeKind::CompilationUnit, "", "", -1, 0}}};
  CHECK_THROWS_AS(apply_script(t, bad_delete), std::invalid_argument);
  int decl = t.at(t.root).children.at(0);
  EditScript cycle{{Action{ActionType::Move, t.root, NodeKind::CompilationUnit, "", "", decl, 0}}};
  CHECK_THROWS_AS(apply_script(t, cycle), std::invalid_argument);
  EditScript second_root{{Action{ActionType::Insert, static_cast<int>(t.nodes.size()), NodeKind::Block, "", "", -1, 1}}};
  CHECK_THROWS_AS(apply_script(t, second_root), std::invalid_argument);
  EditScript unknown{{Action{ActionType::Update, 999, NodeKind::SimpleName, "y", "x", -1, 0}}};
  CHECK_THROWS_AS(apply_script(t, unknown), std::invalid_argument);
}

TEST_CASE("unparsable decompiled source yields an error record") {
  auto r = score_sources("A.java", "class A {}", "class A {");
  CHECK_FALSE(r.score.has_value());
  CHECK(r.error.rfind("decompiled:", 0) == 0);
  nlohmann::json j = r;
  CHECK(j.at("score").is_null());
  CHECK(j.get<DistortionRecord>() == r);
  auto ok = score_sources("dctest/Foo.java", foo_original(), foo_equiv());
  nlohmann::json k = ok;
  CHECK(k.get<DistortionRecord>() == ok);
  CHECK(ok.moves == 1);
  CHECK(ok.deletes == 2);
}

TEST_CASE("scripts are minimal on all small tree pairs") {
  auto r = dceval::testing::check_optimality(3, 8, 2);
  CAPTURE(r.failures.empty() ? std::string() : r.failures.front());
  CHECK(r.pairs > 50000);
  CHECK(r.optimal == r.pairs);
  CHECK(r.applied_ok == r.pairs);
}

TEST_CASE("node kind names round trip") {
  for (NodeKind k : all_node_kinds()) CHECK(node_kind_from_string(to_string(k)) == k);
  CHECK_FALSE(node_kind_from_string("Nope").has_value());
  CHECK(has_identifier_label(NodeKind::SimpleName));
  CHECK_FALSE(has_identifier_label(NodeKind::StringLiteral));
}
