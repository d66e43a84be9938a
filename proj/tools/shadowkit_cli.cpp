#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "shadowkit/config.hpp"
#include "shadowkit/errors.hpp"
#include "shadowkit/models.hpp"
#include "shadowkit/runner.hpp"

using namespace shadowkit;

namespace {

int run(const std::string& path, const std::optional<std::string>& out,
        const std::optional<std::uint64_t>& seed, unsigned jobs) {
  ExperimentConfig cfg = load_config(path);
  if (seed) cfg.seed = *seed;
  if (out) cfg.output_dir = *out;
  ExperimentResult res = run_experiment(cfg, jobs);
  write_reports(res, cfg.output_dir);
  for (const Check& c : res.checks) {
    std::printf("%-4s %s value=%s bound=%s\n", c.passed ? "ok" : "FAIL", c.name.c_str(),
                format_number(c.value).c_str(), format_number(c.bound).c_str());
  }
  std::printf("%s: %s (reports in %s)\n", cfg.experiment.c_str(),
              res.passed() ? "passed" : "FAILED", cfg.output_dir.c_str());
  return res.passed() ? 0 : 1;
}

void list_models() {
  for (const ModelInfo& m : builtin_models()) {
    std::printf("%s\n  %s\n  params:", m.name.c_str(), m.summary.c_str());
    for (const auto& [k, v] : m.defaults) std::printf(" %s=%s", k.c_str(), format_number(v).c_str());
    std::printf("\n  experiments:");
    for (const auto& e : m.experiments) std::printf(" %s", e.c_str());
    std::printf("\n");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"shadowkit: numerical shadowing and stability experiments for group actions"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  unsigned jobs = 1;

  auto* run_cmd = app.add_subcommand("run", "run one experiment and write summary.json and detail.csv");
  run_cmd->add_option("--config", config_path, "YAML or JSON experiment file")->required();
  run_cmd->add_option("--out", out, "output directory (overrides output.dir)");
  run_cmd->add_option("--seed", seed, "random seed (overrides seed)");
  run_cmd->add_option("--jobs", jobs, "worker threads")->check(CLI::Range(1u, 1024u));

  auto* list_cmd = app.add_subcommand("list-models", "list builtin models and their parameters");

  auto* validate_cmd = app.add_subcommand("validate-config", "parse a config and print it resolved");
  validate_cmd->add_option("--config", config_path, "YAML or JSON experiment file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*list_cmd) {
      list_models();
      return 0;
    }
    if (*validate_cmd) {
      std::cout << to_json(load_config(config_path)).dump(2) << '\n';
      return 0;
    }
    return run(config_path, out, seed, jobs);
  } catch (const InputError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}
