#include "shadowkit/models.hpp"

#include <cmath>

#include "shadowkit/errors.hpp"

namespace shadowkit {

const std::vector<ModelInfo>& builtin_models() {
  static const std::vector<ModelInfo> models = {
      {"scaling-zk",
       "Z^k acting on R^k by (n_1..n_k) x = (lambda^n_1 x_1, ..., lambda^n_k x_k)",
       {{"k", 2}, {"lambda", 2}},
       {"shadowing", "persistence", "expansivity", "mu-expansivity", "stability", "mu-stability",
        "genset-conversion", "conjugacy-transport"}},
      {"scaling-sum",
       "Z^k acting on R by (n_1..n_k) x = lambda^(n_1 + ... + n_k) x",
       {{"k", 2}, {"lambda", 2}},
       {"expansivity", "mu-expansivity"}},
      {"bs-affine",
       "<a, b | ba = a^2 b> acting on R^n by a = id, b = m x (m > 1)",
       {{"m", 2}, {"n", 1}},
       {"shadowing", "persistence", "expansivity", "mu-expansivity", "stability", "mu-stability"}},
      {"scaling-z",
       "Z acting on R by n x = lambda^n x, generator b",
       {{"lambda", 2}},
       {"shadowing", "persistence", "expansivity", "mu-expansivity", "stability", "mu-stability",
        "conjugacy-transport"}},
  };
  return models;
}

const ModelInfo& model_info(const std::string& name) {
  for (const auto& m : builtin_models()) {
    if (m.name == name) return m;
  }
  throw InputError("unknown model '" + name + "' (see list-models)");
}

namespace {

bool is_positive_integer(double v) { return v >= 1 && v == std::floor(v) && v <= 64; }

}  // namespace

std::map<std::string, double> resolve_model_params(const std::string& name,
                                                   const std::map<std::string, double>& given) {
  const ModelInfo& info = model_info(name);
  std::map<std::string, double> out(info.defaults.begin(), info.defaults.end());
  for (const auto& [key, value] : given) {
    if (!out.count(key)) throw InputError("model '" + name + "' has no parameter '" + key + "'");
    if (!std::isfinite(value)) throw InputError("parameter '" + key + "' is not finite");
    out[key] = value;
  }
  if (out.count("k") && !is_positive_integer(out["k"])) throw InputError("k must be an integer in [1, 64]");
  if (out.count("n") && !is_positive_integer(out["n"])) throw InputError("n must be an integer in [1, 64]");
  if (out.count("lambda") && (out["lambda"] == 0)) throw InputError("lambda must be nonzero");
  if (out.count("m") && !(out["m"] > 1)) throw InputError("m must be > 1");
  return out;
}

GroupFamily model_family(const std::string& name, const std::map<std::string, double>& params) {
  const auto p = resolve_model_params(name, params);
  if (name == "scaling-zk" || name == "scaling-sum") {
    return GroupFamily::free_abelian(static_cast<int>(p.at("k")));
  }
  if (name == "bs-affine") return GroupFamily::solvable_bs();
  return GroupFamily::free_abelian(1);
}

GeneratingSet model_generators(const std::string& name,
                               const std::map<std::string, double>& params) {
  const GroupFamily fam = model_family(name, params);
  if (name == "scaling-z") return GeneratingSet::standard(fam, {"b"});
  return GeneratingSet::standard(fam);
}

Action model_action(const std::string& name, const std::map<std::string, double>& params,
                    const GeneratingSet& genset) {
  const auto p = resolve_model_params(name, params);
  if (!(genset.family() == model_family(name, p))) {
    throw InputError("generating set belongs to " + genset.family().name() + ", model '" + name +
                     "' needs " + model_family(name, p).name());
  }
  std::vector<GeneratorMap> maps;
  for (const Generator& g : genset.generators()) {
    const NormalForm& nf = g.element;
    DiagonalLinear d;
    if (name == "scaling-zk") {
      for (std::int64_t e : nf.v) d.scale.push_back(std::pow(p.at("lambda"), static_cast<double>(e)));
    } else if (name == "scaling-sum") {
      std::int64_t total = 0;
      for (std::int64_t e : nf.v) total += e;
      d.scale.push_back(std::pow(p.at("lambda"), static_cast<double>(total)));
    } else if (name == "bs-affine") {
      const auto k = genset.family().affine_pair(nf).first;
      d.scale.assign(static_cast<std::size_t>(p.at("n")), std::pow(p.at("m"), static_cast<double>(k)));
    } else {
      d.scale.push_back(std::pow(p.at("lambda"), static_cast<double>(nf.v.at(0))));
    }
    maps.emplace_back(std::move(d));
  }
  return Action(genset, std::move(maps));
}

}  // namespace shadowkit
