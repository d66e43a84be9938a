#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "shadowkit/config.hpp"
#include "shadowkit/errors.hpp"
#include "shadowkit/runner.hpp"

using namespace shadowkit;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

ExperimentConfig small(const std::string& yaml) { return config_from_json(yaml_text_to_json(yaml)); }

}  // namespace

TEST_CASE("property: format_number round-trips") {
  std::mt19937_64 rng(61);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int trial = 0; trial < 10000; ++trial) {
    const double v = trial % 2 ? u(rng) : std::ldexp(u(rng), -40);
    CHECK(std::strtod(format_number(v).c_str(), nullptr) == v);
  }
  CHECK(format_number(0.5) == "0.5");
  CHECK(format_number(std::numeric_limits<double>::infinity()) == "inf");
}

TEST_CASE("reports are written and deterministic across job counts") {
  const auto cfg = small("experiment: shadowing\nseed: 12\nmodel: {name: scaling-zk}\nball_radius: 5\n"
                         "samples: {count: 30}\noracle: {enabled: false}\n");
  const auto a = run_experiment(cfg, 1);
  const auto b = run_experiment(cfg, 4);
  CHECK(a.detail_csv() == b.detail_csv());
  CHECK(a.summary() == b.summary());
  CHECK(a.csv_rows.size() == 30);
  CHECK(a.passed());

  const auto dir = std::filesystem::temp_directory_path() / "shadowkit_runner_test";
  std::filesystem::remove_all(dir);
  write_reports(a, dir.string());
  CHECK(slurp(dir / "detail.csv") == a.detail_csv());
  const auto summary = nlohmann::json::parse(slurp(dir / "summary.json"));
  CHECK(summary["passed"] == true);
  CHECK(summary["config"]["seed"] == 12);
  CHECK(config_from_json(summary["config"]).sample_count == 30);
}

TEST_CASE("a different seed changes the samples") {
  auto cfg = small("experiment: expansivity\nseed: 1\nmodel: {name: scaling-z}\nsamples: {count: 5}\n");
  const auto a = run_experiment(cfg);
  cfg.seed = 2;
  CHECK(run_experiment(cfg).detail_csv() != a.detail_csv());
}

TEST_CASE("a violated bound is reported, not hidden") {
  const auto cfg = small("experiment: shadowing\nseed: 3\nmodel: {name: scaling-z}\nsamples: {count: 20}\n"
                         "shadowing: {bound_factor: 0.01}\noracle: {enabled: false}\n");
  const auto r = run_experiment(cfg);
  CHECK_FALSE(r.passed());
  bool found = false;
  for (const auto& c : r.checks) {
    if (c.name == "tracing_radius_within_bound") {
      found = true;
      CHECK_FALSE(c.passed);
      CHECK(c.value > 1);
    }
  }
  CHECK(found);
}

TEST_CASE("every experiment kind runs on a small config") {
  const std::string pert = "perturbation: {generators: [b], amplitude: 0.01}\n";
  const std::vector<std::string> yamls = {
      "experiment: persistence\nseed: 1\nmodel: {name: scaling-z}\nsamples: {count: 5}\n" + pert,
      "experiment: mu-expansivity\nseed: 1\nmodel: {name: bs-affine}\nsamples: {count: 3}\nball_radius: 12\n",
      "experiment: stability\nseed: 1\nmodel: {name: scaling-z}\nsamples: {count: 5}\nball_radius: 20\n" + pert,
      "experiment: mu-stability\nseed: 1\nmodel: {name: scaling-z}\nsamples: {count: 5}\n"
      "entourages: {epsilon_e: 0.02}\n" + pert,
      "experiment: conjugacy-transport\nseed: 1\nmodel: {name: scaling-zk}\nsamples: {count: 5}\n"
      "conjugacy: {scale: [2, -2], perm: [1, 0]}\n",
  };
  for (const auto& y : yamls) {
    CAPTURE(y);
    const auto r = run_experiment(small(y), 2);
    CHECK(r.passed());
    CHECK_FALSE(r.checks.empty());
    CHECK(r.csv_rows.size() >= 3);
  }
}
