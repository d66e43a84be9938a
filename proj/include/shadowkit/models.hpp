#pragma once

// Builtin model systems:
//   scaling-zk   Z^k on R^k, Phi_(n_1..n_k)(x) = (lambda^n_1 x_1, ..., lambda^n_k x_k)
//   bs-affine    <a, b | ba = a^2 b> on R^n, Phi_a = id, Phi_b = m x
//   scaling-z    Z on R, Phi_n(x) = lambda^n x
//   scaling-sum  Z^k on R, Phi_(n_1..n_k)(x) = lambda^(n_1 + ... + n_k) x
// Generator maps are derived from each generator's normal form, so the same
// model can be expressed over any generating set of its group.

#include <map>
#include <string>
#include <vector>

#include "shadowkit/action.hpp"
#include "shadowkit/group.hpp"

namespace shadowkit {

struct ModelInfo {
  std::string name;
  std::string summary;
  std::vector<std::pair<std::string, double>> defaults;
  std::vector<std::string> experiments;
};

const std::vector<ModelInfo>& builtin_models();
const ModelInfo& model_info(const std::string& name);  // InputError if unknown

// Parameters not listed fall back to the model defaults; unknown keys and
// out-of-range values throw InputError.
std::map<std::string, double> resolve_model_params(const std::string& name,
                                                   const std::map<std::string, double>& given);

GroupFamily model_family(const std::string& name, const std::map<std::string, double>& params);
GeneratingSet model_generators(const std::string& name,
                               const std::map<std::string, double>& params);
Action model_action(const std::string& name, const std::map<std::string, double>& params,
                    const GeneratingSet& genset);

}  // namespace shadowkit
