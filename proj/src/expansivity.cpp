#include "shadowkit/expansivity.hpp"

#include <algorithm>
#include <cmath>

#include "shadowkit/errors.hpp"

namespace shadowkit {

SeparationResult separation_search(const Action& phi, const Point& x, const Point& y,
                                   const MetricEntourage& d, std::size_t max_radius) {
  require_same_dimension(x, y);
  if (distance(x, y) == 0) throw InputError("separation_search needs distinct points");
  auto ball = CayleyBall::build(phi.generators(), max_radius);
  SeparationResult res;
  res.searched_radius = max_radius;
  for (std::size_t i = 0; i < ball->size(); ++i) {
    const ElementMap m = phi.compile(ball->element(i));
    const Point px = phi.apply(m, x);
    const Point py = phi.apply(m, y);
    if (!d.contains(px, py)) {
      res.certificate =
          SeparationCertificate{ball->element(i), ball->length(i), distance(px, py), max_radius};
      return res;
    }
  }
  return res;
}

std::vector<double> max_composite_scale(const Action& phi, std::size_t m) {
  if (!phi.all_diagonal()) throw Unsupported("composite scales need an all-diagonal action");
  auto ball = CayleyBall::build(phi.generators(), m);
  std::vector<double> best(phi.dimension(), 0.0);
  for (const GroupElement& g : ball->elements()) {
    const auto scale = phi.composite_scale(g.word);
    for (std::size_t i = 0; i < best.size(); ++i) best[i] = std::max(best[i], std::abs(scale[i]));
  }
  return best;
}

BoxSet dynamical_ball(const Action& phi, const Point& x, const MetricEntourage& d,
                      std::size_t m) {
  if (x.size() != phi.dimension()) throw InputError("point dimension does not match action");
  if (!phi.all_diagonal()) {
    throw Unsupported("dynamical_ball is exact only for diagonal-linear actions");
  }
  const auto scale = max_composite_scale(phi, m);
  Box b;
  for (std::size_t i = 0; i < x.size(); ++i) b.axes.push_back({x[i], d.epsilon() / scale[i]});
  return BoxSet(std::move(b));
}

bool analytic_expansive(const Action& phi) {
  if (!phi.all_diagonal()) return false;
  for (std::size_t i = 0; i < phi.dimension(); ++i) {
    bool moves = false;
    for (const auto& m : phi.maps()) {
      if (std::abs(std::get<DiagonalLinear>(m).scale[i]) != 1) moves = true;
    }
    if (!moves) return false;
  }
  return true;
}

MuExpansivityReport mu_expansivity_report(const Action& phi, const MetricEntourage& d,
                                          const std::vector<Point>& samples,
                                          const std::vector<std::size_t>& radii,
                                          const LebesgueMeasure& mu, double threshold) {
  if (samples.empty() || radii.empty()) throw InputError("report needs samples and radii");
  if (!std::is_sorted(radii.begin(), radii.end()) ||
      std::adjacent_find(radii.begin(), radii.end()) != radii.end()) {
    throw InputError("radii must be strictly increasing");
  }
  MuExpansivityReport rep;
  rep.radii = radii;
  rep.threshold = threshold;
  rep.analytic_flag = analytic_expansive(phi);
  for (const Point& x : samples) {
    std::vector<double> row;
    for (std::size_t m : radii) row.push_back(mu.measure(dynamical_ball(phi, x, d, m)));
    for (std::size_t k = 1; k < row.size(); ++k) {
      if (!(row[k] < row[k - 1])) rep.strictly_decreasing = false;
    }
    if (!(row.back() < threshold)) rep.below_threshold = false;
    if (!rep.volumes.empty() && row != rep.volumes.front()) rep.samples_agree = false;
    rep.volumes.push_back(std::move(row));
  }
  const auto& first = rep.volumes.front();
  for (std::size_t k = 1; k < first.size(); ++k) {
    rep.ratios.push_back(first[k - 1] > 0 ? first[k] / first[k - 1] : 0.0);
  }
  rep.passed = rep.strictly_decreasing && rep.below_threshold;
  return rep;
}

}  // namespace shadowkit
