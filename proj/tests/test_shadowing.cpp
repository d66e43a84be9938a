#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "shadowkit/errors.hpp"
#include "shadowkit/models.hpp"
#include "shadowkit/shadowing.hpp"

using namespace shadowkit;

namespace {

Action model(const std::string& name, std::map<std::string, double> params = {}) {
  const auto p = resolve_model_params(name, params);
  return model_action(name, p, model_generators(name, p));
}

// max_g |x_g - Phi_g y| is convex in y on R, so ternary search finds its
// minimum without any grid.
double ternary_minmax_1d(const PseudoOrbit& po, const Action& phi, double lo, double hi) {
  auto f = [&](double y) {
    double worst = 0;
    for (std::size_t k = 0; k < po.size(); ++k) {
      worst = std::max(worst, distance(po.points[k], phi.evaluate(po.ball->element(k), Point{y})));
    }
    return worst;
  };
  for (int it = 0; it < 200; ++it) {
    const double a = lo + (hi - lo) / 3, b = hi - (hi - lo) / 3;
    if (f(a) < f(b)) {
      hi = b;
    } else {
      lo = a;
    }
  }
  return f(0.5 * (lo + hi));
}

}  // namespace

TEST_CASE("expansion floor") {
  CHECK(expansion_floor(model("scaling-z")) == 2);
  CHECK(expansion_floor(model("scaling-zk", {{"lambda", 3}})) == 3);
  CHECK(expansion_floor(model("scaling-z", {{"lambda", 0.5}})) == 2);
  // bs-affine on R^1: a acts trivially, b expands by m.
  CHECK(expansion_floor(model("bs-affine", {{"m", 3}})) == 3);
}

TEST_CASE("property: telescoping bound for closed-form shadows") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(-1, 1);
  for (double lambda : {2.0, 3.0, -2.0}) {
    const Action phi = model("scaling-z", {{"lambda", lambda}});
    const auto ball = CayleyBall::build(phi.generators(), 20);
    for (int trial = 0; trial < 100; ++trial) {
      const double delta = 1e-3;
      PseudoOrbit po = perturbed_orbit(phi, ball, Point{u(rng)}, delta / (1 + std::abs(lambda)), rng());
      const ShadowResult r = shadow_diagonal_linear(po, phi);
      const double bound = delta / (std::abs(lambda) - 1);
      CHECK(r.tracing_radius <= bound);
      CHECK(r.derived_bound == doctest::Approx(bound));
      CHECK(r.tracing_radius == tracing_radius(po, phi, r.point));
    }
  }
}

TEST_CASE("closed form agrees with the brute-force grid") {
  std::mt19937_64 rng(42);
  const Action phi = model("scaling-z");
  const auto ball = CayleyBall::build(phi.generators(), 12);
  for (int trial = 0; trial < 50; ++trial) {
    const PseudoOrbit po = perturbed_orbit(phi, ball, Point{0.1 * trial - 2.5}, 1e-3 / 3, rng());
    const ShadowResult a = shadow_diagonal_linear(po, phi);
    const Box box = default_search_box(po, phi);
    CHECK(box.contains_point(a.point));
    const ShadowResult b = shadow_generic(po, phi, box, GridSpec{64, 4, 8});
    CHECK(std::abs(a.point[0] - b.point[0]) <= 1e-6);
    CHECK(b.tracing_radius <= a.tracing_radius + 4096 * b.final_cell);
    CHECK_FALSE(b.boundary_warning);
  }
}

TEST_CASE("brute force matches an exact convex minimization") {
  const Action phi = model("bs-affine");
  const auto ball = CayleyBall::build(phi.generators(), 4);
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 10; ++trial) {
    const PseudoOrbit po = perturbed_orbit(phi, ball, Point{0.4}, 1e-2, rng());
    const ShadowResult r = shadow_generic(po, phi, Box::from_bounds({{0.3, 0.5}}), GridSpec{64, 6, 8});
    const double oracle = ternary_minmax_1d(po, phi, 0.3, 0.5);
    CHECK(r.tracing_radius <= oracle + 1e-6);
    CHECK(r.tracing_radius >= oracle - 1e-6);
    CHECK(r.tracing_radius <= 2 * po.declared_epsilon);
  }
}

TEST_CASE("solver input checks") {
  const Action id(GeneratingSet::standard(GroupFamily::free_abelian(1)),
                  {DiagonalLinear{{1}}, DiagonalLinear{{1}}});
  const auto ball = CayleyBall::build(id.generators(), 3);
  const PseudoOrbit po = true_orbit(id, ball, Point{0.5});
  CHECK_THROWS_AS(shadow_diagonal_linear(po, id), SolverError);
  const Action zk = model("scaling-zk", {{"k", 4}});
  const PseudoOrbit big = true_orbit(zk, CayleyBall::build(zk.generators(), 1), Point{0, 0, 0, 0});
  Box box;
  for (int i = 0; i < 4; ++i) box.axes.push_back({0, 1});
  CHECK_THROWS_AS(shadow_generic(big, zk, box, GridSpec{200, 1, 8}), ResourceError);
  CHECK_THROWS_AS(shadow_generic(big, zk, box, GridSpec{4, 1, 1}), InputError);
}

TEST_CASE("boundary warning when the minimizer is outside the search box") {
  const Action phi = model("scaling-z");
  const auto ball = CayleyBall::build(phi.generators(), 6);
  const PseudoOrbit po = true_orbit(phi, ball, Point{0.5});
  const ShadowResult r = shadow_generic(po, phi, Box::from_bounds({{0.6, 0.9}}));
  CHECK(r.boundary_warning);
}

TEST_CASE("persistence: nearby orbits are traced") {
  const Action phi = model("scaling-z");
  const auto psi = perturb_action(phi, PerturbationSpec{{"b"}, 0.01, 1, false, 1e-3}, 0);
  const auto ball = CayleyBall::build(phi.generators(), 20);
  std::vector<Point> xs;
  for (int i = 0; i < 40; ++i) xs.push_back(Point{-1 + 0.05 * i});
  const PersistenceReport rep = check_persistence(phi, psi.action, ball, xs, MetricEntourage(0.011), {}, 3);
  CHECK(rep.all_pass());
  CHECK(rep.max_radius <= 0.01);
  CHECK(rep.declared == doctest::Approx(0.01));
}

TEST_CASE("uniqueness certificate") {
  const Action phi = model("scaling-z");
  const MetricEntourage a(0.02);
  CHECK(shadow_uniqueness(Point{0.3}, Point{0.3}, phi, a, 10).status ==
        UniquenessCertificate::Status::Coincide);
  const auto sep = shadow_uniqueness(Point{0.3}, Point{0.3001}, phi, a, 20);
  CHECK(sep.status == UniquenessCertificate::Status::Separated);
  REQUIRE(sep.separation);
  CHECK(sep.separation->length == 8);  // 2^8 * 1e-4 > 0.02 >= 2^7 * 1e-4
  CHECK(shadow_uniqueness(Point{0.3}, Point{0.3001}, phi, a, 3).status ==
        UniquenessCertificate::Status::Inconclusive);
}
