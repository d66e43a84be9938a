#pragma once

// Experiment configuration.  Files are YAML, or JSON when the name ends in
// ".json"; both encode the same schema (see README).  Every field has a
// default except `experiment`, `seed` and `model.name`.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "shadowkit/action.hpp"
#include "shadowkit/group.hpp"
#include "shadowkit/shadowing.hpp"

namespace shadowkit {

inline const std::vector<std::string>& experiment_kinds() {
  static const std::vector<std::string> kinds = {
      "shadowing",  "persistence",  "expansivity",       "mu-expansivity",
      "stability",  "mu-stability", "genset-conversion", "conjugacy-transport"};
  return kinds;
}

struct GeneratorSpec {
  std::string name;
  nlohmann::json element;  // exponent list, [k, num, exp] affine triple, or word string
};

struct ExperimentConfig {
  std::string experiment;
  std::uint64_t seed = 0;

  std::string model;
  std::map<std::string, double> params;
  std::vector<std::string> generator_names;     // rename the standard set
  std::vector<GeneratorSpec> generators;        // or give a custom set

  std::optional<PerturbationSpec> perturbation;

  std::size_t ball_radius = 10;
  double delta = 1e-3;            // declared pseudo-orbit epsilon
  double epsilon_e = 0.011;
  double epsilon_e_prime = 0.02;
  double epsilon_d = 1.0;

  std::size_t sample_count = 100;
  std::vector<std::pair<double, double>> sample_box;  // default [-1, 1]^n

  double audit_tolerance = 1e-9;
  double equivariance_tolerance = 1e-6;
  double oracle_tolerance = 1e-6;
  double ratio_tolerance = 1e-12;

  GridSpec oracle;
  bool oracle_enabled = true;

  std::string solver = "auto";  // auto | closed_form | brute_force
  double bound_factor = 1.0;    // tracing radius <= bound_factor * declared

  std::size_t search_radius = 64;
  std::optional<double> max_offset;  // expansivity pair offsets, default epsilon_d

  std::vector<std::size_t> radii;    // default 0..ball_radius (mu-*) or 1..ball_radius
  double volume_threshold = 1e-3;
  std::optional<double> expected_ratio;

  std::vector<std::string> test_elements;  // words; default: first generator, its inverse, its square
  std::string h;                           // word; default first generator
  double continuity_delta = 1e-4;
  double continuity_bound = 1e-3;
  std::vector<double> usc_deltas = {1e-2, 1e-3, 1e-4};

  std::vector<GeneratorSpec> source_generators;  // genset-conversion: the set T
  std::size_t target_radius = 4;

  std::vector<double> conjugacy_scale;
  std::vector<std::size_t> conjugacy_perm;

  std::string output_dir = "out";
};

// Parses and validates; throws InputError naming the offending key.
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);
nlohmann::json yaml_text_to_json(const std::string& text);

// Fully resolved config (defaults filled in), re-loadable by config_from_json.
nlohmann::json to_json(const ExperimentConfig& c);

// Generating set described by the config (standard, renamed, or custom).
GeneratingSet resolve_generators(const GroupFamily& family, const GeneratingSet& standard,
                                 const std::vector<GeneratorSpec>& specs);

}  // namespace shadowkit
