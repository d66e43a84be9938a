#include "shadowkit/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "shadowkit/errors.hpp"
#include "shadowkit/models.hpp"

namespace shadowkit {

using nlohmann::json;

// ---------------------------------------------------------------- YAML

namespace {

json scalar_to_json(const YAML::Node& node) {
  const std::string& text = node.Scalar();
  if (node.Tag() == "!") return text;  // quoted: always a string
  if (text == "~" || text == "null" || text == "Null" || text == "NULL") return nullptr;
  if (text == "true" || text == "True" || text == "TRUE") return true;
  if (text == "false" || text == "False" || text == "FALSE") return false;
  try {
    std::size_t used = 0;
    long long v = std::stoll(text, &used);
    if (used == text.size()) return v;
  } catch (const std::exception&) {
  }
  try {
    std::size_t used = 0;
    double v = std::stod(text, &used);
    if (used == text.size()) return v;
  } catch (const std::exception&) {
  }
  return text;
}

json node_to_json(const YAML::Node& node) {
  switch (node.Type()) {
    case YAML::NodeType::Null:
    case YAML::NodeType::Undefined:
      return nullptr;
    case YAML::NodeType::Scalar:
      return scalar_to_json(node);
    case YAML::NodeType::Sequence: {
      json arr = json::array();
      for (const auto& item : node) arr.push_back(node_to_json(item));
      return arr;
    }
    case YAML::NodeType::Map: {
      json obj = json::object();
      for (const auto& kv : node) {
        const auto key = kv.first.as<std::string>();
        if (obj.contains(key)) throw InputError("duplicate key '" + key + "'");
        obj[key] = node_to_json(kv.second);
      }
      return obj;
    }
  }
  return nullptr;
}

}  // namespace

json yaml_text_to_json(const std::string& text) {
  try {
    return node_to_json(YAML::Load(text));
  } catch (const YAML::Exception& e) {
    throw InputError(std::string("config is not valid YAML: ") + e.what());
  }
}

// ---------------------------------------------------------------- parsing helpers

namespace {

void allow_keys(const json& obj, const std::string& where, std::set<std::string> keys) {
  if (!obj.is_object()) throw InputError(where + " must be a mapping");
  for (const auto& [k, v] : obj.items()) {
    if (!keys.count(k)) throw InputError("unknown key '" + k + "' in " + where);
  }
}

const json* find(const json& obj, const std::string& key) {
  auto it = obj.find(key);
  return it == obj.end() || it->is_null() ? nullptr : &*it;
}

double get_number(const json& obj, const std::string& key, const std::string& where, double def) {
  const json* v = find(obj, key);
  if (!v) return def;
  if (!v->is_number()) throw InputError(where + "." + key + " must be a number");
  return v->get<double>();
}

std::size_t get_count(const json& obj, const std::string& key, const std::string& where,
                      std::size_t def) {
  const json* v = find(obj, key);
  if (!v) return def;
  if (!v->is_number_integer() || v->get<long long>() < 0) {
    throw InputError(where + "." + key + " must be a nonnegative integer");
  }
  return v->get<std::size_t>();
}

bool get_bool(const json& obj, const std::string& key, const std::string& where, bool def) {
  const json* v = find(obj, key);
  if (!v) return def;
  if (!v->is_boolean()) throw InputError(where + "." + key + " must be true or false");
  return v->get<bool>();
}

std::string get_string(const json& obj, const std::string& key, const std::string& where,
                       const std::string& def) {
  const json* v = find(obj, key);
  if (!v) return def;
  if (!v->is_string()) throw InputError(where + "." + key + " must be a string");
  return v->get<std::string>();
}

template <class T>
std::vector<T> get_list(const json& obj, const std::string& key, const std::string& where,
                        std::vector<T> def) {
  const json* v = find(obj, key);
  if (!v) return def;
  if (!v->is_array()) throw InputError(where + "." + key + " must be a list");
  std::vector<T> out;
  for (const auto& item : *v) {
    if constexpr (std::is_same_v<T, std::string>) {
      if (!item.is_string()) throw InputError(where + "." + key + " entries must be strings");
      out.push_back(item.get<std::string>());
    } else if constexpr (std::is_same_v<T, std::size_t>) {
      if (!item.is_number_integer() || item.get<long long>() < 0) {
        throw InputError(where + "." + key + " entries must be nonnegative integers");
      }
      out.push_back(item.get<std::size_t>());
    } else {
      if (!item.is_number()) throw InputError(where + "." + key + " entries must be numbers");
      out.push_back(item.get<T>());
    }
  }
  return out;
}

std::vector<GeneratorSpec> get_generators(const json& obj, const std::string& key,
                                          const std::string& where) {
  std::vector<GeneratorSpec> out;
  const json* v = find(obj, key);
  if (!v) return out;
  if (!v->is_array()) throw InputError(where + "." + key + " must be a list");
  for (const auto& item : *v) {
    allow_keys(item, where + "." + key + "[]", {"name", "element"});
    GeneratorSpec g;
    g.name = get_string(item, "name", where + "." + key, "");
    if (g.name.empty()) throw InputError(where + "." + key + " entries need a name");
    const json* e = find(item, "element");
    if (!e || !(e->is_array() || e->is_string())) {
      throw InputError("generator '" + g.name + "' needs an element (list or word)");
    }
    g.element = *e;
    out.push_back(std::move(g));
  }
  return out;
}

void require_positive(double v, const std::string& name) {
  if (!(v > 0) || !std::isfinite(v)) throw InputError(name + " must be positive and finite");
}

}  // namespace

GeneratingSet resolve_generators(const GroupFamily& family, const GeneratingSet& standard,
                                 const std::vector<GeneratorSpec>& specs) {
  if (specs.empty()) return standard;
  std::vector<std::pair<std::string, NormalForm>> elements;
  for (const auto& g : specs) {
    NormalForm nf;
    if (g.element.is_string()) {
      nf = reduce(g.element.get<std::string>(), standard).normal_form;
    } else {
      std::vector<std::int64_t> v;
      for (const auto& x : g.element) {
        if (!x.is_number_integer()) {
          throw InputError("generator '" + g.name + "' element entries must be integers");
        }
        v.push_back(x.get<std::int64_t>());
      }
      switch (family.kind()) {
        case FamilyKind::FreeAbelian:
          nf = family.exponents(v);
          break;
        case FamilyKind::Free:
          nf = family.letters(v);
          break;
        case FamilyKind::SolvableBS:
          if (v.size() != 3) {
            throw InputError("generator '" + g.name + "' needs [k, numerator, exponent]");
          }
          nf = family.affine(v[0], Dyadic::make(v[1], v[2]));
          break;
      }
    }
    elements.emplace_back(g.name, nf);
  }
  return GeneratingSet::from_elements(family, std::move(elements));
}

ExperimentConfig config_from_json(const json& j) {
  allow_keys(j, "config",
             {"experiment", "seed", "model", "perturbation", "ball_radius", "entourages", "samples",
              "tolerances", "oracle", "shadowing", "expansivity", "windows", "stability",
              "conversion", "conjugacy", "output"});
  ExperimentConfig c;
  c.experiment = get_string(j, "experiment", "config", "");
  if (std::find(experiment_kinds().begin(), experiment_kinds().end(), c.experiment) ==
      experiment_kinds().end()) {
    throw InputError("config.experiment must be one of shadowing, persistence, expansivity, "
                     "mu-expansivity, stability, mu-stability, genset-conversion, "
                     "conjugacy-transport");
  }
  const json* seed = find(j, "seed");
  if (!seed) throw InputError("config.seed is required");
  if (!seed->is_number_unsigned() && !(seed->is_number_integer() && seed->get<long long>() >= 0)) {
    throw InputError("config.seed must be a nonnegative integer");
  }
  c.seed = seed->get<std::uint64_t>();

  const json* model = find(j, "model");
  if (!model) throw InputError("config.model is required");
  allow_keys(*model, "model", {"name", "params", "generator_names", "generators"});
  c.model = get_string(*model, "name", "model", "");
  if (c.model.empty()) throw InputError("model.name is required");
  if (const json* p = find(*model, "params")) {
    if (!p->is_object()) throw InputError("model.params must be a mapping");
    for (const auto& [k, v] : p->items()) {
      if (!v.is_number()) throw InputError("model.params." + k + " must be a number");
      c.params[k] = v.get<double>();
    }
  }
  c.params = resolve_model_params(c.model, c.params);
  c.generator_names = get_list<std::string>(*model, "generator_names", "model", {});
  c.generators = get_generators(*model, "generators", "model");
  if (!c.generator_names.empty() && !c.generators.empty()) {
    throw InputError("model: give either generator_names or generators, not both");
  }

  if (const json* p = find(j, "perturbation")) {
    allow_keys(*p, "perturbation", {"generators", "amplitude", "frequency", "random_phase", "margin"});
    PerturbationSpec ps;
    ps.generators = get_list<std::string>(*p, "generators", "perturbation", {});
    ps.amplitude = get_number(*p, "amplitude", "perturbation", 0.0);
    ps.frequency = get_number(*p, "frequency", "perturbation", 1.0);
    ps.random_phase = get_bool(*p, "random_phase", "perturbation", false);
    ps.margin = get_number(*p, "margin", "perturbation", 1e-3);
    if (!(ps.amplitude >= 0)) throw InputError("perturbation.amplitude must be >= 0");
    c.perturbation = ps;
  }

  c.ball_radius = get_count(j, "ball_radius", "config", c.ball_radius);

  if (const json* e = find(j, "entourages")) {
    allow_keys(*e, "entourages", {"delta", "epsilon_e", "epsilon_e_prime", "epsilon_d"});
    c.delta = get_number(*e, "delta", "entourages", c.delta);
    c.epsilon_e = get_number(*e, "epsilon_e", "entourages", c.epsilon_e);
    c.epsilon_e_prime = get_number(*e, "epsilon_e_prime", "entourages", c.epsilon_e_prime);
    c.epsilon_d = get_number(*e, "epsilon_d", "entourages", c.epsilon_d);
  }
  require_positive(c.delta, "entourages.delta");
  require_positive(c.epsilon_e, "entourages.epsilon_e");
  require_positive(c.epsilon_e_prime, "entourages.epsilon_e_prime");
  require_positive(c.epsilon_d, "entourages.epsilon_d");

  const GroupFamily fam = model_family(c.model, c.params);
  const GeneratingSet standard = c.generator_names.empty()
                                     ? model_generators(c.model, c.params)
                                     : GeneratingSet::standard(fam, c.generator_names);
  const GeneratingSet genset = resolve_generators(fam, standard, c.generators);
  const std::size_t dim = model_action(c.model, c.params, genset).dimension();

  if (const json* s = find(j, "samples")) {
    allow_keys(*s, "samples", {"count", "box"});
    c.sample_count = get_count(*s, "count", "samples", c.sample_count);
    if (const json* box = find(*s, "box")) {
      if (!box->is_array()) throw InputError("samples.box must be a list of [lo, hi] pairs");
      for (const auto& iv : *box) {
        if (!iv.is_array() || iv.size() != 2 || !iv[0].is_number() || !iv[1].is_number()) {
          throw InputError("samples.box entries must be [lo, hi] pairs");
        }
        const double lo = iv[0].get<double>(), hi = iv[1].get<double>();
        if (!(lo <= hi)) throw InputError("samples.box has lo > hi");
        c.sample_box.emplace_back(lo, hi);
      }
    }
  }
  if (c.sample_count < 1) throw InputError("samples.count must be >= 1");
  if (c.sample_box.empty()) c.sample_box.assign(dim, {-1.0, 1.0});
  if (c.sample_box.size() != dim) {
    throw InputError("samples.box has " + std::to_string(c.sample_box.size()) +
                     " intervals, model dimension is " + std::to_string(dim));
  }

  if (const json* t = find(j, "tolerances")) {
    allow_keys(*t, "tolerances", {"audit", "equivariance", "oracle", "ratio"});
    c.audit_tolerance = get_number(*t, "audit", "tolerances", c.audit_tolerance);
    c.equivariance_tolerance = get_number(*t, "equivariance", "tolerances", c.equivariance_tolerance);
    c.oracle_tolerance = get_number(*t, "oracle", "tolerances", c.oracle_tolerance);
    c.ratio_tolerance = get_number(*t, "ratio", "tolerances", c.ratio_tolerance);
  }

  if (const json* o = find(j, "oracle")) {
    allow_keys(*o, "oracle", {"enabled", "cells", "rounds", "factor"});
    c.oracle_enabled = get_bool(*o, "enabled", "oracle", c.oracle_enabled);
    c.oracle.cells = get_count(*o, "cells", "oracle", c.oracle.cells);
    c.oracle.rounds = get_count(*o, "rounds", "oracle", c.oracle.rounds);
    c.oracle.factor = get_number(*o, "factor", "oracle", c.oracle.factor);
  }
  if (c.oracle.cells < 1 || c.oracle.rounds < 1 || !(c.oracle.factor > 1)) {
    throw InputError("oracle needs cells >= 1, rounds >= 1, factor > 1");
  }

  if (const json* s = find(j, "shadowing")) {
    allow_keys(*s, "shadowing", {"solver", "bound_factor"});
    c.solver = get_string(*s, "solver", "shadowing", c.solver);
    c.bound_factor = get_number(*s, "bound_factor", "shadowing", c.bound_factor);
  }
  if (c.solver != "auto" && c.solver != "closed_form" && c.solver != "brute_force") {
    throw InputError("shadowing.solver must be auto, closed_form or brute_force");
  }
  require_positive(c.bound_factor, "shadowing.bound_factor");

  if (const json* e = find(j, "expansivity")) {
    allow_keys(*e, "expansivity", {"search_radius", "max_offset"});
    c.search_radius = get_count(*e, "search_radius", "expansivity", c.search_radius);
    if (find(*e, "max_offset")) c.max_offset = get_number(*e, "max_offset", "expansivity", 0);
  }
  if (!c.max_offset) c.max_offset = c.epsilon_d;
  require_positive(*c.max_offset, "expansivity.max_offset");

  if (const json* w = find(j, "windows")) {
    allow_keys(*w, "windows", {"radii", "volume_threshold", "expected_ratio"});
    c.radii = get_list<std::size_t>(*w, "radii", "windows", {});
    c.volume_threshold = get_number(*w, "volume_threshold", "windows", c.volume_threshold);
    if (find(*w, "expected_ratio")) c.expected_ratio = get_number(*w, "expected_ratio", "windows", 0);
  }
  if (c.radii.empty()) {
    const std::size_t start = c.experiment == "mu-expansivity" ? 1 : 0;
    for (std::size_t r = start; r <= c.ball_radius; ++r) c.radii.push_back(r);
  }
  for (std::size_t k = 1; k < c.radii.size(); ++k) {
    if (c.radii[k] <= c.radii[k - 1]) throw InputError("windows.radii must be strictly increasing");
  }

  const std::string g0 = genset[0].name;
  if (const json* s = find(j, "stability")) {
    allow_keys(*s, "stability",
               {"test_elements", "h", "continuity_delta", "continuity_bound", "usc_deltas"});
    c.test_elements = get_list<std::string>(*s, "test_elements", "stability", {});
    c.h = get_string(*s, "h", "stability", "");
    c.continuity_delta = get_number(*s, "continuity_delta", "stability", c.continuity_delta);
    c.continuity_bound = get_number(*s, "continuity_bound", "stability", c.continuity_bound);
    c.usc_deltas = get_list<double>(*s, "usc_deltas", "stability", c.usc_deltas);
  }
  if (c.test_elements.empty()) c.test_elements = {g0, genset[genset[0].inverse].name, g0 + "^2"};
  if (c.h.empty()) c.h = g0;
  for (const auto& w : c.test_elements) genset.parse_word(w);
  genset.parse_word(c.h);

  if (const json* v = find(j, "conversion")) {
    allow_keys(*v, "conversion", {"source_generators", "target_radius"});
    c.source_generators = get_generators(*v, "source_generators", "conversion");
    c.target_radius = get_count(*v, "target_radius", "conversion", c.target_radius);
  }
  if (c.experiment == "genset-conversion") {
    if (c.source_generators.empty()) {
      throw InputError("genset-conversion needs conversion.source_generators");
    }
    resolve_generators(fam, standard, c.source_generators);
  }

  if (const json* h = find(j, "conjugacy")) {
    allow_keys(*h, "conjugacy", {"scale", "perm"});
    c.conjugacy_scale = get_list<double>(*h, "scale", "conjugacy", {});
    c.conjugacy_perm = get_list<std::size_t>(*h, "perm", "conjugacy", {});
  }
  if (c.experiment == "conjugacy-transport") {
    if (c.conjugacy_scale.empty()) c.conjugacy_scale.assign(dim, 3.0);
    DiagonalChange h{c.conjugacy_scale, c.conjugacy_perm};
    if (h.dimension() != dim) throw InputError("conjugacy.scale length must match the dimension");
    h.validate();
  }

  if (const json* o = find(j, "output")) {
    allow_keys(*o, "output", {"dir"});
    c.output_dir = get_string(*o, "dir", "output", c.output_dir);
  }

  const bool needs_psi = c.experiment == "persistence" || c.experiment == "stability" ||
                         c.experiment == "mu-stability";
  if (needs_psi && !c.perturbation) {
    throw InputError(c.experiment + " needs a perturbation section (amplitude 0 gives Psi = Phi)");
  }
  if (c.perturbation) {
    const Action phi = model_action(c.model, c.params, genset);
    perturb_action(phi, *c.perturbation, c.seed);  // validates symbols and margin
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  const bool is_json = path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0;
  json j;
  if (is_json) {
    try {
      j = json::parse(text);
    } catch (const json::parse_error& e) {
      throw InputError(std::string("config is not valid JSON: ") + e.what());
    }
  } else {
    j = yaml_text_to_json(text);
  }
  return config_from_json(j);
}

namespace {

json generators_json(const std::vector<GeneratorSpec>& gs) {
  json arr = json::array();
  for (const auto& g : gs) arr.push_back({{"name", g.name}, {"element", g.element}});
  return arr;
}

}  // namespace

json to_json(const ExperimentConfig& c) {
  json j;
  j["experiment"] = c.experiment;
  j["seed"] = c.seed;
  json model = {{"name", c.model}, {"params", c.params}};
  if (!c.generator_names.empty()) model["generator_names"] = c.generator_names;
  if (!c.generators.empty()) model["generators"] = generators_json(c.generators);
  j["model"] = model;
  if (c.perturbation) {
    j["perturbation"] = {{"generators", c.perturbation->generators},
                         {"amplitude", c.perturbation->amplitude},
                         {"frequency", c.perturbation->frequency},
                         {"random_phase", c.perturbation->random_phase},
                         {"margin", c.perturbation->margin}};
  }
  j["ball_radius"] = c.ball_radius;
  j["entourages"] = {{"delta", c.delta},
                     {"epsilon_e", c.epsilon_e},
                     {"epsilon_e_prime", c.epsilon_e_prime},
                     {"epsilon_d", c.epsilon_d}};
  json box = json::array();
  for (auto [lo, hi] : c.sample_box) box.push_back({lo, hi});
  j["samples"] = {{"count", c.sample_count}, {"box", box}};
  j["tolerances"] = {{"audit", c.audit_tolerance},
                     {"equivariance", c.equivariance_tolerance},
                     {"oracle", c.oracle_tolerance},
                     {"ratio", c.ratio_tolerance}};
  j["oracle"] = {{"enabled", c.oracle_enabled},
                 {"cells", c.oracle.cells},
                 {"rounds", c.oracle.rounds},
                 {"factor", c.oracle.factor}};
  j["shadowing"] = {{"solver", c.solver}, {"bound_factor", c.bound_factor}};
  j["expansivity"] = {{"search_radius", c.search_radius}, {"max_offset", *c.max_offset}};
  json windows = {{"radii", c.radii}, {"volume_threshold", c.volume_threshold}};
  if (c.expected_ratio) windows["expected_ratio"] = *c.expected_ratio;
  j["windows"] = windows;
  j["stability"] = {{"test_elements", c.test_elements},
                    {"h", c.h},
                    {"continuity_delta", c.continuity_delta},
                    {"continuity_bound", c.continuity_bound},
                    {"usc_deltas", c.usc_deltas}};
  j["conversion"] = {{"source_generators", generators_json(c.source_generators)},
                     {"target_radius", c.target_radius}};
  j["conjugacy"] = {{"scale", c.conjugacy_scale}, {"perm", c.conjugacy_perm}};
  j["output"] = {{"dir", c.output_dir}};
  return j;
}

}  // namespace shadowkit
