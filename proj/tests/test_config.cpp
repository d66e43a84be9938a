#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "shadowkit/config.hpp"
#include "shadowkit/errors.hpp"
#include "shadowkit/models.hpp"

using namespace shadowkit;
using nlohmann::json;

namespace {

ExperimentConfig from_yaml(const std::string& text) { return config_from_json(yaml_text_to_json(text)); }

}  // namespace

TEST_CASE("minimal config fills defaults") {
  const auto c = from_yaml("experiment: shadowing\nseed: 3\nmodel: {name: scaling-zk}\n");
  CHECK(c.experiment == "shadowing");
  CHECK(c.seed == 3);
  CHECK(c.ball_radius == 10);
  CHECK(c.delta == 1e-3);
  CHECK(c.sample_count == 100);
  REQUIRE(c.sample_box.size() == 2);
  CHECK(c.sample_box[0] == std::pair(-1.0, 1.0));
  CHECK(c.oracle.cells == 64);
  CHECK(c.oracle.rounds == 4);
  CHECK(c.oracle.factor == 8);
  CHECK(c.audit_tolerance == 1e-9);
  CHECK(c.equivariance_tolerance == 1e-6);
  CHECK(c.radii.front() == 0);
  CHECK(c.radii.back() == 10);
}

TEST_CASE("yaml and json describe the same config") {
  const std::string yaml =
      "experiment: stability\nseed: 9\nmodel:\n  name: scaling-z\n  params: {lambda: 2}\n"
      "perturbation: {generators: [b], amplitude: 0.01}\nentourages: {epsilon_e: 0.011}\n"
      "stability: {test_elements: [\"b\", \"b^-1\"]}\n";
  const json j = {{"experiment", "stability"},
                  {"seed", 9},
                  {"model", {{"name", "scaling-z"}, {"params", {{"lambda", 2}}}}},
                  {"perturbation", {{"generators", {"b"}}, {"amplitude", 0.01}}},
                  {"entourages", {{"epsilon_e", 0.011}}},
                  {"stability", {{"test_elements", {"b", "b^-1"}}}}};
  CHECK(to_json(from_yaml(yaml)) == to_json(config_from_json(j)));
}

TEST_CASE("resolved config round-trips") {
  const auto c = from_yaml(
      "experiment: genset-conversion\nseed: 1\nmodel: {name: scaling-zk}\n"
      "conversion:\n  source_generators:\n    - {name: u, element: [1, 0]}\n    - {name: v, element: [1, 1]}\n");
  const json once = to_json(c);
  CHECK(to_json(config_from_json(once)) == once);
}

TEST_CASE("invalid configs are rejected") {
  const std::string head = "experiment: shadowing\nseed: 1\nmodel: {name: scaling-z}\n";
  CHECK_THROWS_AS(from_yaml(head + "bogus: 1\n"), InputError);
  CHECK_THROWS_AS(from_yaml(head + "entourages: {delta: -1}\n"), InputError);
  CHECK_THROWS_AS(from_yaml(head + "entourages: {deltaa: 1}\n"), InputError);
  CHECK_THROWS_AS(from_yaml("experiment: nope\nseed: 1\nmodel: {name: scaling-z}\n"), InputError);
  CHECK_THROWS_AS(from_yaml("seed: 1\nmodel: {name: scaling-z}\n"), InputError);
  CHECK_THROWS_AS(from_yaml("experiment: shadowing\nseed: 1\nmodel: {name: nope}\n"), InputError);
  CHECK_THROWS_AS(from_yaml("experiment: stability\nseed: 1\nmodel: {name: scaling-z}\n"), InputError);
  CHECK_THROWS_AS(from_yaml(head + "windows: {radii: [3, 2]}\n"), InputError);
  CHECK_THROWS_AS(from_yaml(head + "shadowing: {solver: magic}\n"), InputError);
  CHECK_THROWS_AS(from_yaml(head + "samples: {box: [[1, 0]]}\n"), InputError);
  CHECK_THROWS_AS(yaml_text_to_json("a: [1, 2\n"), InputError);
  CHECK_THROWS_AS(from_yaml(head + "seed: 2\n"), InputError);
}

TEST_CASE("custom generators resolve to a symmetric set") {
  const auto c = from_yaml(
      "experiment: shadowing\nseed: 1\n"
      "model:\n  name: bs-affine\n  generators:\n    - {name: p, element: \"a b\"}\n    - {name: q, element: b}\n");
  const auto p = resolve_model_params(c.model, c.params);
  const auto s = resolve_generators(model_family(c.model, p), model_generators(c.model, p), c.generators);
  CHECK(s.size() == 4);
  CHECK(s.index_of("p").has_value());
  CHECK(s.index_of("q^-1").has_value());
}

TEST_CASE("load_config reads files by extension") {
  const auto dir = std::filesystem::temp_directory_path() / "shadowkit_config_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream(dir / "c.json") << R"({"experiment": "expansivity", "seed": 4, "model": {"name": "scaling-z"}})";
    std::ofstream(dir / "c.yaml") << "experiment: expansivity\nseed: 4\nmodel: {name: scaling-z}\n";
  }
  CHECK(to_json(load_config((dir / "c.json").string())) == to_json(load_config((dir / "c.yaml").string())));
  CHECK_THROWS_AS(load_config((dir / "missing.yaml").string()), InputError);
}

TEST_CASE("shipped configs parse") {
  for (const auto& entry : std::filesystem::directory_iterator(SHADOWKIT_CONFIG_DIR)) {
    CAPTURE(entry.path().string());
    CHECK_NOTHROW(load_config(entry.path().string()));
  }
}
