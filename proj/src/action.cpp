#include "shadowkit/action.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "shadowkit/errors.hpp"
#include "shadowkit/random.hpp"

namespace shadowkit {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double forward_perturbed(double x, double scale, double amp, double freq, double phase) {
  return scale * x + amp * std::sin(freq * x + phase);
}

}  // namespace

std::size_t map_dimension(const GeneratorMap& m) {
  return std::visit(overloaded{
                        [](const DiagonalLinear& d) { return d.scale.size(); },
                        [](const Affine1D&) { return std::size_t{1}; },
                        [](const PerturbedDiagonal& p) { return p.scale.size(); },
                    },
                    m);
}

void validate_map(const GeneratorMap& m) {
  std::visit(overloaded{
                 [](const DiagonalLinear& d) {
                   if (d.scale.empty()) throw InputError("diagonal map has no coordinates");
                   for (double s : d.scale) {
                     if (s == 0 || !std::isfinite(s)) throw InputError("diagonal map is singular");
                   }
                 },
                 [](const Affine1D& a) {
                   if (a.scale == 0 || !std::isfinite(a.scale) || !std::isfinite(a.offset)) {
                     throw InputError("affine map is singular");
                   }
                 },
                 [](const PerturbedDiagonal& p) {
                   const std::size_t n = p.scale.size();
                   if (n == 0 || p.amplitude.size() != n || p.frequency.size() != n ||
                       p.phase.size() != n) {
                     throw InputError("perturbed map parameters have inconsistent lengths");
                   }
                   for (std::size_t i = 0; i < n; ++i) {
                     if (std::abs(p.amplitude[i] * p.frequency[i]) >=
                         std::abs(p.scale[i]) - p.margin) {
                       throw InputError("perturbation amplitude violates the invertibility margin");
                     }
                   }
                 },
             },
             m);
}

double solve_perturbed_1d(double y, double scale, double amp, double freq, double phase) {
  const double x0 = y / scale;
  if (amp == 0) return x0;
  auto f = [&](double x) { return forward_perturbed(x, scale, amp, freq, phase) - y; };
  // The root lies within |amp| / |scale| of y / scale.
  const double reach = std::abs(amp) / std::abs(scale);
  double lo = x0 - reach * (1 + 1e-12) - 1e-300;
  double hi = x0 + reach * (1 + 1e-12) + 1e-300;
  const double sign = scale > 0 ? 1.0 : -1.0;
  double x = x0;
  for (int iter = 0; iter < 200; ++iter) {
    const double fx = f(x);
    if (fx == 0) return x;
    if (sign * fx > 0) {
      hi = x;
    } else {
      lo = x;
    }
    const double dfx = scale + amp * freq * std::cos(freq * x + phase);
    double next = x - fx / dfx;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const double tol = 4 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(x));
    if (std::abs(next - x) <= tol || hi - lo <= tol) return next;
    x = next;
  }
  const double residual = std::abs(f(x));
  if (residual <= 1e-12 * std::max(1.0, std::abs(y))) return x;
  throw NumericError("perturbed inverse did not converge", residual);
}

Point apply_map(const GeneratorMap& m, std::span<const double> x) {
  if (x.size() != map_dimension(m)) throw InputError("point dimension does not match map");
  return std::visit(overloaded{
                        [&](const DiagonalLinear& d) {
                          Point y(x.size());
                          for (std::size_t i = 0; i < x.size(); ++i) y[i] = d.scale[i] * x[i];
                          return y;
                        },
                        [&](const Affine1D& a) { return Point{a.scale * x[0] + a.offset}; },
                        [&](const PerturbedDiagonal& p) {
                          Point y(x.size());
                          for (std::size_t i = 0; i < x.size(); ++i) {
                            y[i] = p.inverted
                                       ? solve_perturbed_1d(x[i], p.scale[i], p.amplitude[i],
                                                            p.frequency[i], p.phase[i])
                                       : forward_perturbed(x[i], p.scale[i], p.amplitude[i],
                                                           p.frequency[i], p.phase[i]);
                          }
                          return y;
                        },
                    },
                    m);
}

GeneratorMap inverse_map(const GeneratorMap& m) {
  return std::visit(overloaded{
                        [](const DiagonalLinear& d) -> GeneratorMap {
                          DiagonalLinear inv;
                          for (double s : d.scale) inv.scale.push_back(1.0 / s);
                          return inv;
                        },
                        [](const Affine1D& a) -> GeneratorMap {
                          return Affine1D{1.0 / a.scale, -a.offset / a.scale};
                        },
                        [](const PerturbedDiagonal& p) -> GeneratorMap {
                          PerturbedDiagonal inv = p;
                          inv.inverted = !p.inverted;
                          return inv;
                        },
                    },
                    m);
}

double map_lipschitz(const GeneratorMap& m) {
  return std::visit(overloaded{
                        [](const DiagonalLinear& d) {
                          double l = 0;
                          for (double s : d.scale) l = std::max(l, std::abs(s));
                          return l;
                        },
                        [](const Affine1D& a) { return std::abs(a.scale); },
                        [](const PerturbedDiagonal& p) {
                          double l = 0;
                          for (std::size_t i = 0; i < p.scale.size(); ++i) {
                            const double wobble = std::abs(p.amplitude[i] * p.frequency[i]);
                            const double li = p.inverted ? 1.0 / (std::abs(p.scale[i]) - wobble)
                                                         : std::abs(p.scale[i]) + wobble;
                            l = std::max(l, li);
                          }
                          return l;
                        },
                    },
                    m);
}

// ---------------------------------------------------------------- Action

Action::Action(GeneratingSet genset, std::vector<GeneratorMap> maps)
    : genset_(std::move(genset)), maps_(std::move(maps)) {
  if (maps_.size() != genset_.size()) {
    throw InputError("action needs one map per generator (" + std::to_string(genset_.size()) +
                     "), got " + std::to_string(maps_.size()));
  }
  dim_ = map_dimension(maps_.front());
  for (const auto& m : maps_) {
    validate_map(m);
    if (map_dimension(m) != dim_) throw InputError("generator maps have different dimensions");
  }
}

bool Action::all_diagonal() const {
  return std::all_of(maps_.begin(), maps_.end(),
                     [](const GeneratorMap& m) { return std::holds_alternative<DiagonalLinear>(m); });
}

bool Action::all_linear() const {
  return std::all_of(maps_.begin(), maps_.end(), [](const GeneratorMap& m) {
    return !std::holds_alternative<PerturbedDiagonal>(m);
  });
}

void Action::require_generators(const GeneratingSet& s) const {
  if (!(s == genset_)) {
    throw InputError("group element is written over a different generating set than the action");
  }
}

Point Action::apply_generator(std::size_t s, std::span<const double> x) const {
  return apply_map(maps_.at(s), x);
}

Point Action::evaluate_stepwise(const std::vector<std::size_t>& word,
                                std::span<const double> x) const {
  if (x.size() != dim_) throw InputError("point dimension does not match action");
  Point y(x.begin(), x.end());
  for (auto it = word.rbegin(); it != word.rend(); ++it) y = apply_map(maps_.at(*it), y);
  return y;
}

ElementMap Action::compile(const std::vector<std::size_t>& word) const {
  ElementMap em;
  const bool diagonal = std::all_of(word.begin(), word.end(), [&](std::size_t s) {
    return std::holds_alternative<DiagonalLinear>(maps_.at(s));
  });
  if (diagonal) {
    // Diagonal maps commute: the composite is a product of exact powers.
    std::vector<long> count(maps_.size(), 0);
    for (std::size_t s : word) ++count[s];
    em.kind = ElementMap::Kind::Diagonal;
    em.scale.assign(dim_, 1.0);
    for (std::size_t s = 0; s < maps_.size(); ++s) {
      if (count[s] == 0) continue;
      const auto& d = std::get<DiagonalLinear>(maps_[s]);
      for (std::size_t i = 0; i < dim_; ++i) {
        em.scale[i] *= std::pow(d.scale[i], static_cast<double>(count[s]));
      }
    }
    return em;
  }
  const bool affine = dim_ == 1 && std::all_of(word.begin(), word.end(), [&](std::size_t s) {
    return !std::holds_alternative<PerturbedDiagonal>(maps_.at(s));
  });
  if (affine) {
    em.kind = ElementMap::Kind::Affine;
    for (auto it = word.rbegin(); it != word.rend(); ++it) {
      double l = 0, t = 0;
      if (const auto* d = std::get_if<DiagonalLinear>(&maps_[*it])) {
        l = d->scale[0];
      } else {
        const auto& a = std::get<Affine1D>(maps_[*it]);
        l = a.scale;
        t = a.offset;
      }
      em.a = l * em.a;
      em.c = l * em.c + t;
    }
    return em;
  }
  em.kind = ElementMap::Kind::Word;
  em.word = word;
  return em;
}

Point Action::apply(const ElementMap& m, std::span<const double> x) const {
  if (x.size() != dim_) throw InputError("point dimension does not match action");
  switch (m.kind) {
    case ElementMap::Kind::Diagonal: {
      Point y(x.size());
      for (std::size_t i = 0; i < x.size(); ++i) y[i] = m.scale[i] * x[i];
      return y;
    }
    case ElementMap::Kind::Affine:
      return Point{m.a * x[0] + m.c};
    case ElementMap::Kind::Word:
      return evaluate_stepwise(m.word, x);
  }
  return {};
}

Point Action::evaluate_word(const std::vector<std::size_t>& word, std::span<const double> x) const {
  return apply(compile(word), x);
}

Point Action::evaluate(const GroupElement& g, std::span<const double> x) const {
  return evaluate_word(g.word, x);
}

std::vector<double> Action::composite_scale(const std::vector<std::size_t>& word) const {
  ElementMap em = compile(word);
  if (em.kind != ElementMap::Kind::Diagonal) {
    throw Unsupported("composite scale requires diagonal-linear generator maps");
  }
  return em.scale;
}

double Action::max_lipschitz() const {
  double l = 0;
  for (const auto& m : maps_) l = std::max(l, map_lipschitz(m));
  return l;
}

Action Action::regenerate(const GeneratingSet& target, std::size_t budget) const {
  if (!(target.family() == family())) throw InputError("regenerate: different group family");
  if (!all_linear()) throw Unsupported("regenerate requires diagonal or affine generator maps");
  std::vector<GeneratorMap> maps;
  for (const Generator& t : target.generators()) {
    ElementMap em = compile(geodesic_word(t.element, genset_, budget));
    if (em.kind == ElementMap::Kind::Diagonal) {
      maps.emplace_back(DiagonalLinear{em.scale});
    } else {
      maps.emplace_back(Affine1D{em.a, em.c});
    }
  }
  return Action(target, std::move(maps));
}

// ---------------------------------------------------------------- validation

ActionReport validate_action(const Action& phi, const std::vector<Point>& samples, double tol,
                             std::size_t relation_radius) {
  if (samples.empty()) throw InputError("validate_action needs at least one sample");
  const GeneratingSet& s = phi.generators();
  ActionReport rep;
  rep.tolerance = tol;
  rep.samples = samples.size();
  for (const Point& x : samples) {
    for (std::size_t g = 0; g < s.size(); ++g) {
      Point back = phi.apply_generator(s[g].inverse, phi.apply_generator(g, x));
      rep.inverse_defect = std::max(rep.inverse_defect, distance(back, x));
    }
  }
  auto ball = CayleyBall::build(s, relation_radius);
  for (const Point& x : samples) {
    std::vector<Point> images;
    images.reserve(ball->size());
    for (const auto& g : ball->elements()) images.push_back(phi.evaluate_stepwise(g.word, x));
    for (std::size_t i = 0; i < ball->size(); ++i) {
      for (std::size_t g = 0; g < s.size(); ++g) {
        std::size_t j = ball->neighbor(i, g);
        if (j == CayleyBall::npos) continue;
        Point lhs = phi.apply_generator(g, images[i]);
        rep.relation_defect = std::max(rep.relation_defect, distance(lhs, images[j]));
      }
    }
  }
  rep.passed = rep.relation_defect <= tol && rep.inverse_defect <= tol;
  return rep;
}

// ---------------------------------------------------------------- perturbations

PerturbedAction perturb_action(const Action& phi, const PerturbationSpec& spec,
                               std::uint64_t seed) {
  if (!(spec.amplitude >= 0) || !std::isfinite(spec.amplitude)) {
    throw InputError("perturbation amplitude must be finite and >= 0");
  }
  if (spec.amplitude == 0) return PerturbedAction{phi, 0.0};
  const GeneratingSet& s = phi.generators();
  std::vector<GeneratorMap> maps = phi.maps();
  std::vector<bool> touched(s.size(), false);
  Rng rng(seed);
  for (const std::string& name : spec.generators) {
    auto idx = s.index_of(name);
    if (!idx) throw InputError("unknown generator symbol '" + name + "' in perturbation");
    if (touched[*idx]) throw InputError("generator '" + name + "' perturbed twice");
    const auto* base = std::get_if<DiagonalLinear>(&phi.map(*idx));
    if (!base) throw InputError("only diagonal-linear generators can be perturbed");
    const std::size_t n = base->scale.size();
    PerturbedDiagonal p;
    p.scale = base->scale;
    p.amplitude.assign(n, spec.amplitude);
    p.frequency.assign(n, spec.frequency);
    p.phase.assign(n, 0.0);
    if (spec.random_phase) {
      for (double& ph : p.phase) ph = rng.uniform(0.0, 2 * std::numbers::pi);
    }
    p.margin = spec.margin;
    validate_map(p);
    const std::size_t inv = s[*idx].inverse;
    if (touched[inv]) throw InputError("generator '" + name + "' and its inverse both perturbed");
    maps[*idx] = p;
    maps[inv] = inverse_map(p);
    touched[*idx] = touched[inv] = true;
  }
  Action psi(s, std::move(maps));
  double bound = generator_distance_bound(psi, phi);
  return PerturbedAction{std::move(psi), bound};
}

namespace {

bool same_map(const GeneratorMap& a, const GeneratorMap& b) {
  if (a.index() != b.index()) return false;
  return std::visit(overloaded{
                        [&](const DiagonalLinear& x) { return x.scale == std::get<DiagonalLinear>(b).scale; },
                        [&](const Affine1D& x) {
                          const auto& y = std::get<Affine1D>(b);
                          return x.scale == y.scale && x.offset == y.offset;
                        },
                        [&](const PerturbedDiagonal& x) {
                          const auto& y = std::get<PerturbedDiagonal>(b);
                          return x.scale == y.scale && x.amplitude == y.amplitude &&
                                 x.frequency == y.frequency && x.phase == y.phase &&
                                 x.inverted == y.inverted;
                        },
                    },
                    a);
}

}  // namespace

double generator_distance_bound(const Action& psi, const Action& phi) {
  phi.require_generators(psi.generators());
  if (psi.dimension() != phi.dimension()) throw InputError("actions have different dimensions");
  double bound = 0;
  for (std::size_t s = 0; s < phi.generators().size(); ++s) {
    const GeneratorMap& a = psi.map(s);
    const GeneratorMap& b = phi.map(s);
    if (same_map(a, b)) continue;
    const auto* p = std::get_if<PerturbedDiagonal>(&a);
    const auto* d = std::get_if<DiagonalLinear>(&b);
    if (!p || !d || d->scale.size() != p->scale.size()) {
      throw Unsupported("no analytic distance bound between these generator maps");
    }
    for (std::size_t i = 0; i < p->scale.size(); ++i) {
      if (!p->inverted) {
        if (d->scale[i] != p->scale[i]) throw Unsupported("perturbation changes the linear part");
        bound = std::max(bound, std::abs(p->amplitude[i]));
      } else {
        // Psi^-1 y - y / scale = -amp sin(.) / scale.
        if (std::abs(d->scale[i] * p->scale[i] - 1.0) > 4 * std::numeric_limits<double>::epsilon()) {
          throw Unsupported("perturbation changes the linear part");
        }
        bound = std::max(bound, std::abs(p->amplitude[i]) / std::abs(p->scale[i]));
      }
    }
  }
  return bound;
}

Action conjugate_action(const Action& phi, const DiagonalChange& h) {
  h.validate();
  if (h.dimension() != phi.dimension()) throw InputError("conjugacy dimension mismatch");
  std::vector<GeneratorMap> maps;
  for (const GeneratorMap& m : phi.maps()) {
    maps.push_back(std::visit(
        overloaded{
            [&](const DiagonalLinear& d) -> GeneratorMap {
              DiagonalLinear out;
              for (std::size_t i = 0; i < h.dimension(); ++i) out.scale.push_back(d.scale[h.source(i)]);
              return out;
            },
            [&](const Affine1D& a) -> GeneratorMap {
              return Affine1D{a.scale, h.scale[0] * a.offset};
            },
            [&](const PerturbedDiagonal& p) -> GeneratorMap {
              PerturbedDiagonal out = p;
              for (std::size_t i = 0; i < h.dimension(); ++i) {
                const std::size_t j = h.source(i);
                out.scale[i] = p.scale[j];
                out.amplitude[i] = h.scale[i] * p.amplitude[j];
                out.frequency[i] = p.frequency[j] / h.scale[i];
                out.phase[i] = p.phase[j];
              }
              return out;
            },
        },
        m));
  }
  return Action(phi.generators(), std::move(maps));
}

}  // namespace shadowkit
