#pragma once

// Group actions on R^n generated by invertible maps attached to the symbols
// of a generating set.  An element g with word s_1 ... s_k acts as
// Phi_{s_1} o ... o Phi_{s_k}.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "shadowkit/group.hpp"
#include "shadowkit/uniformity.hpp"

namespace shadowkit {

struct DiagonalLinear {
  std::vector<double> scale;
};

// x -> scale * x + offset on R^1.
struct Affine1D {
  double scale = 1;
  double offset = 0;
};

// x_i -> scale_i x_i + amplitude_i sin(frequency_i x_i + phase_i), or the
// inverse of that map when `inverted` is set.  Invertibility requires
// |amplitude_i * frequency_i| < |scale_i| - margin.
struct PerturbedDiagonal {
  std::vector<double> scale;
  std::vector<double> amplitude;
  std::vector<double> frequency;
  std::vector<double> phase;
  double margin = 0;
  bool inverted = false;
};

using GeneratorMap = std::variant<DiagonalLinear, Affine1D, PerturbedDiagonal>;

std::size_t map_dimension(const GeneratorMap& m);
Point apply_map(const GeneratorMap& m, std::span<const double> x);
GeneratorMap inverse_map(const GeneratorMap& m);
// Global Lipschitz constant in the max metric.
double map_lipschitz(const GeneratorMap& m);
void validate_map(const GeneratorMap& m);

// Inverse of x -> scale x + amp sin(freq x + phase) on R.  Safeguarded Newton
// inside a bracket that provably contains the root; throws NumericError with
// the residual if it fails to converge.
double solve_perturbed_1d(double y, double scale, double amp, double freq, double phase);

// Composite map of one group element, precomputed for repeated evaluation.
// Diagonal and affine composites use closed forms; anything else keeps the
// word and composes generator maps right to left.
struct ElementMap {
  enum class Kind { Diagonal, Affine, Word } kind = Kind::Word;
  std::vector<double> scale;   // Diagonal
  double a = 1, c = 0;         // Affine: x -> a x + c
  std::vector<std::size_t> word;
};

class Action {
 public:
  Action(GeneratingSet genset, std::vector<GeneratorMap> maps);

  const GeneratingSet& generators() const { return genset_; }
  const GroupFamily& family() const { return genset_.family(); }
  std::size_t dimension() const { return dim_; }
  const GeneratorMap& map(std::size_t s) const { return maps_[s]; }
  const std::vector<GeneratorMap>& maps() const { return maps_; }

  bool all_diagonal() const;
  bool all_linear() const;  // diagonal or affine everywhere

  Point apply_generator(std::size_t s, std::span<const double> x) const;
  Point evaluate(const GroupElement& g, std::span<const double> x) const;
  Point evaluate_word(const std::vector<std::size_t>& word, std::span<const double> x) const;
  // Generator maps composed one at a time, never using closed forms.
  Point evaluate_stepwise(const std::vector<std::size_t>& word, std::span<const double> x) const;

  ElementMap compile(const std::vector<std::size_t>& word) const;
  ElementMap compile(const GroupElement& g) const { return compile(g.word); }
  Point apply(const ElementMap& m, std::span<const double> x) const;

  // Per-coordinate scale of the composite map of g; requires all_diagonal().
  std::vector<double> composite_scale(const std::vector<std::size_t>& word) const;

  double generator_lipschitz(std::size_t s) const { return map_lipschitz(maps_[s]); }
  double max_lipschitz() const;

  // Same action expressed on another generating set of the same group: each
  // new generator is rewritten as a geodesic word and its maps composed.
  // Requires all_linear().
  Action regenerate(const GeneratingSet& target,
                    std::size_t budget = kDefaultSearchBudget) const;

  void require_generators(const GeneratingSet& s) const;

 private:
  GeneratingSet genset_;
  std::vector<GeneratorMap> maps_;
  std::size_t dim_;
};

struct ActionReport {
  double relation_defect = 0;
  double inverse_defect = 0;
  double tolerance = 0;
  std::size_t samples = 0;
  bool passed = false;
};

// Measures how far the generator maps are from defining an action: inverse
// defect max |Phi_{s^-1}(Phi_s x) - x| and relation defect
// max |Phi_s(Phi_g x) - Phi_{sg} x| over a ball of radius `relation_radius`,
// which detects every relator of length <= 2 * relation_radius + 1.
ActionReport validate_action(const Action& phi, const std::vector<Point>& samples, double tol,
                             std::size_t relation_radius = 3);

struct PerturbationSpec {
  std::vector<std::string> generators;  // symbols to perturb; inverses follow
  double amplitude = 0;
  double frequency = 1;
  bool random_phase = false;
  double margin = 1e-3;
};

struct PerturbedAction {
  Action action;
  double certified_bound;  // sup over x, s of |Psi_s x - Phi_s x|
};

// Psi_s = Phi_s + amplitude sin(frequency x + phase) for each listed s (which
// must be DiagonalLinear) and Psi_{s^-1} = Psi_s^-1.  Phases are zero unless
// random_phase, in which case they are drawn from `seed`.
PerturbedAction perturb_action(const Action& phi, const PerturbationSpec& spec,
                               std::uint64_t seed);

// Analytic bound on sup_{x, s} |Psi_s x - Phi_s x|.  Throws Unsupported if a
// generator pair is not of a comparable kind.
double generator_distance_bound(const Action& psi, const Action& phi);

// Psi_g = h o Phi_g o h^-1.
Action conjugate_action(const Action& phi, const DiagonalChange& h);

}  // namespace shadowkit
