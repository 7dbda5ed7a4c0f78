#include "dceval/config.hpp"
#include "doctest.h"
#include "harness.hpp"

using namespace dceval::config;
using dceval::testing::fixtures_root;
using dceval::testing::stub_config;
using dceval::testing::TempDir;
using nlohmann::json;

namespace {

std::string field_of(const json& j) {
  try {
    auto c = parse_config(j, "/base");
    validate(c);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "";
}

json minimal() {
  return json::parse(R"({
    "projects": [{"id": "foo", "root": ")" + (fixtures_root() / "foo").string() + R"(", "testmap": "testmap.json"}],
    "tools": [
      {"id": "javac", "kind": "compiler", "command": "javac -d {output} {input}"},
      {"id": "cfr", "kind": "decompiler", "command": ["java", "-jar", "cfr.jar", "{input}", "--outputdir", "{output}"]},
      {"id": "junit", "kind": "testrunner", "command": "java -cp {classpath} Runner {filter}"}
    ]
  })");
}

}  // namespace

TEST_CASE("the hermetic configuration loads and validates") {
  TempDir out;
  auto cfg = stub_config(out.path());
  CHECK_NOTHROW(validate(cfg));
  CHECK(cfg.projects.size() == 5);
  CHECK(cfg.tool_ids(dceval::toolchain::ToolKind::Compiler) == std::vector<std::string>{"javac", "ecj"});
  CHECK(cfg.tool_ids(dceval::toolchain::ToolKind::Decompiler).size() == 5);
  CHECK(cfg.output_root == out.path());
  CHECK(cfg.project("singleton").classpath_dirs() == std::vector<fs::path>{fixtures_root() / "singleton/lib"});
  CHECK(cfg.pipeline.workers == 4);
  CHECK_THROWS_AS(cfg.project("nope"), std::out_of_range);
  CHECK_THROWS_AS(cfg.tool("nope"), std::out_of_range);
}

TEST_CASE("save then load is lossless") {
  TempDir out;
  auto cfg = stub_config(out.path());
  cfg.pipeline.force_tests = true;
  cfg.pipeline.diff.min_dice = 0.4;
  cfg.pipeline.ignore_attributes = {"LineNumberTable"};
  cfg.multidc.fallback_on_tests = true;
  save_config(cfg, out / "saved.json");
  CHECK(load_config(out / "saved.json") == cfg);
}

TEST_CASE("relative paths resolve against the config directory") {
  auto j = minimal();
  j["projects"][0]["root"] = "fixtures/foo";
  j["output_root"] = "runs/out";
  auto cfg = parse_config(j, "/srv/eval");
  CHECK(cfg.projects[0].root == "/srv/eval/fixtures/foo");
  CHECK(cfg.output_root == "/srv/eval/runs/out");
  CHECK(cfg.projects[0].source_root == "src");
  setenv("DCEVAL_CFG_TEST_HOME", "/opt/tools", 1);
  j["projects"][0]["root"] = "${DCEVAL_CFG_TEST_HOME}/p";
  CHECK(parse_config(j, "/srv").projects[0].root == "/opt/tools/p");
  unsetenv("DCEVAL_CFG_TEST_UNSET");
  j["projects"][0]["root"] = "${DCEVAL_CFG_TEST_UNSET}/p";
  CHECK(field_of(j) == "projects[0].root");
}

TEST_CASE("validation errors name the offending field") {
  CHECK(field_of(minimal()) == "");

  auto j = minimal();
  j["projects"][0]["testmap"] = "missing.json";
  CHECK(field_of(j) == "projects[0].testmap");

  j = minimal();
  j["projects"].push_back(j["projects"][0]);
  CHECK(field_of(j) == "projects[1].id");

  j = minimal();
  j["projects"][0]["classpath"] = {"nolib"};
  CHECK(field_of(j) == "projects[0].classpath[0]");

  j = minimal();
  j["projects"][0].erase("testmap");
  CHECK(field_of(j) == "projects[0].testmap");

  j = minimal();
  j["projects"][0]["colour"] = "red";
  CHECK(field_of(j) == "projects[0].colour");

  j = minimal();
  j["tools"][1]["command"] = "cfr {input}";
  CHECK(field_of(j) == "tools[1].command");

  j = minimal();
  j["tools"][2]["kind"] = "linker";
  CHECK(field_of(j) == "tools[2].kind");

  j = minimal();
  j["tools"][0].erase("id");
  CHECK(field_of(j) == "tools[0].id");

  j = minimal();
  j["pipeline"] = {{"workers", 0}};
  CHECK(field_of(j) == "pipeline.workers");

  j = minimal();
  j["pipeline"] = {{"workers", "many"}};
  CHECK(field_of(j) == "pipeline.workers");

  j = minimal();
  j["pipeline"] = {{"testrunner", "cfr"}};
  CHECK(field_of(j) == "pipeline.testrunner");

  j = minimal();
  j["pipeline"] = {{"diff", {{"min_dice", 0.5}, {"bogus", 1}}}};
  CHECK(field_of(j) == "pipeline.diff.bogus");

  j = minimal();
  j["multidc"] = {{"ranking", {"cfr", "javac"}}};
  CHECK(field_of(j) == "multidc.ranking[1]");

  j = minimal();
  j["multidc"] = {{"ranking", {"cfr", "cfr"}}};
  CHECK(field_of(j) == "multidc.ranking[1]");

  j = minimal();
  j["extra"] = true;
  CHECK(field_of(j) == "extra");

  TempDir dir;
  std::ofstream(dir / "bad.json") << "{ not json";
  CHECK_THROWS_AS(load_config(dir / "bad.json"), ConfigError);
  CHECK_THROWS_AS(load_config(dir / "absent.json"), ConfigError);
}

TEST_CASE("config hash covers semantics only") {
  TempDir out;
  auto cfg = stub_config(out.path());
  auto h = config_hash(cfg);
  CHECK(h.size() == 16);
  CHECK(config_hash(cfg) == h);
  auto other = cfg;
  other.pipeline.workers = 1;
  other.pipeline.cache = false;
  other.output_root = "/elsewhere";
  CHECK(config_hash(other) == h);
  other.pipeline.force_tests = true;
  CHECK(config_hash(other) != h);
  other = cfg;
  other.tools[2].command.push_back("--flag");
  CHECK(config_hash(other) != h);
  other = cfg;
  other.pipeline.ignore_attributes.clear();
  CHECK(config_hash(other) != h);
}
