#include "shadowkit/pseudo_orbit.hpp"

#include <algorithm>
#include <cmath>

#include "shadowkit/errors.hpp"
#include "shadowkit/random.hpp"

namespace shadowkit {

Box PseudoOrbit::bounding_box() const {
  if (points.empty()) throw InputError("empty pseudo-orbit has no bounding box");
  std::vector<std::pair<double, double>> b;
  for (double v : points.front()) b.emplace_back(v, v);
  for (const Point& p : points) {
    for (std::size_t i = 0; i < p.size(); ++i) {
      b[i].first = std::min(b[i].first, p[i]);
      b[i].second = std::max(b[i].second, p[i]);
    }
  }
  return Box::from_bounds(b);
}

double edge_defect(const PseudoOrbit& po, const Action& phi) {
  phi.require_generators(po.generators());
  const CayleyBall& ball = *po.ball;
  double worst = 0;
  for (std::size_t i = 0; i < ball.size(); ++i) {
    for (std::size_t s = 0; s < ball.generators().size(); ++s) {
      const std::size_t j = ball.neighbor(i, s);
      if (j == CayleyBall::npos) continue;
      worst = std::max(worst, distance(po.points[j], phi.apply_generator(s, po.points[i])));
    }
  }
  return worst;
}

bool validate(PseudoOrbit& po, const Action& phi, double slack) {
  po.realized_epsilon = edge_defect(po, phi);
  return po.valid(slack);
}

namespace {

void check_inputs(const Action& phi, const std::shared_ptr<const CayleyBall>& ball,
                  const Point& x) {
  if (!ball) throw InputError("pseudo-orbit needs a Cayley ball");
  phi.require_generators(ball->generators());
  if (x.size() != phi.dimension()) throw InputError("base point dimension does not match action");
  if (!is_finite(x)) throw InputError("base point is not finite");
}

std::vector<Point> orbit_points(const Action& phi, const CayleyBall& ball, const Point& x) {
  std::vector<Point> pts;
  pts.reserve(ball.size());
  for (const GroupElement& g : ball.elements()) pts.push_back(phi.evaluate(g, x));
  return pts;
}

}  // namespace

PseudoOrbit true_orbit(const Action& phi, std::shared_ptr<const CayleyBall> ball,
                       const Point& x) {
  check_inputs(phi, ball, x);
  PseudoOrbit po;
  po.points = orbit_points(phi, *ball, x);
  po.ball = std::move(ball);
  validate(po, phi);
  return po;
}

PseudoOrbit perturbed_orbit(const Action& phi, std::shared_ptr<const CayleyBall> ball,
                            const Point& x, double eta, std::uint64_t seed) {
  check_inputs(phi, ball, x);
  if (!(eta >= 0) || !std::isfinite(eta)) throw InputError("noise bound must be finite and >= 0");
  PseudoOrbit po;
  po.points = orbit_points(phi, *ball, x);
  if (eta > 0) {
    Rng rng(seed);
    for (Point& p : po.points) {
      for (double& v : p) v += rng.uniform(-eta, eta);
    }
  }
  po.ball = std::move(ball);
  po.declared_epsilon = eta * (1 + phi.max_lipschitz());
  validate(po, phi);
  return po;
}

PseudoOrbit orbit_of_nearby_action(const Action& psi, std::shared_ptr<const CayleyBall> ball,
                                   const Point& x, const Action& phi) {
  check_inputs(phi, ball, x);
  PseudoOrbit po;
  po.points = orbit_points(psi, *ball, x);
  po.ball = std::move(ball);
  po.declared_epsilon = generator_distance_bound(psi, phi);
  validate(po, phi);
  return po;
}

Conversion convert_generating_set(const PseudoOrbit& po, const GeneratingSet& s,
                                  std::size_t radius, const Action& phi) {
  const GeneratingSet& t = po.generators();
  if (!(s.family() == t.family())) throw InputError("generating sets belong to different groups");
  Conversion out;
  for (const Generator& g : s.generators()) out.m = std::max(out.m, word_length(g.element, t));
  if (po.ball->radius() < out.m * radius) {
    throw InputError("source ball radius " + std::to_string(po.ball->radius()) +
                     " is smaller than m * radius = " + std::to_string(out.m * radius));
  }
  const Action phi_t = phi.generators() == t ? phi : phi.regenerate(t);
  const Action phi_s = phi.generators() == s ? phi : phi.regenerate(s);
  out.lipschitz = phi_t.max_lipschitz();

  auto ball = CayleyBall::build(s, radius);
  PseudoOrbit res;
  res.points.reserve(ball->size());
  for (const GroupElement& g : ball->elements()) {
    auto idx = po.ball->find(g.normal_form);
    if (!idx) throw InputError("element missing from the source ball");
    res.points.push_back(po.points[*idx]);
  }
  res.ball = std::move(ball);
  const double l = out.lipschitz;
  const double m = static_cast<double>(out.m);
  const double factor = l == 1 ? m : (std::pow(l, m) - 1) / (l - 1);
  res.declared_epsilon = po.declared_epsilon * factor;
  validate(res, phi_s);
  out.orbit = std::move(res);
  return out;
}

PseudoOrbit transport(const PseudoOrbit& po, const DiagonalChange& h, const Action& phi) {
  h.validate();
  if (h.dimension() != po.dimension()) throw InputError("coordinate change dimension mismatch");
  PseudoOrbit res;
  res.ball = po.ball;
  res.points.reserve(po.size());
  for (const Point& p : po.points) res.points.push_back(h.apply(p));
  res.declared_epsilon = h.lipschitz() * po.declared_epsilon;
  validate(res, conjugate_action(phi, h));
  return res;
}

}  // namespace shadowkit
