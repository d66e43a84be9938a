#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "shadowkit/action.hpp"
#include "shadowkit/errors.hpp"
#include "shadowkit/models.hpp"

using namespace shadowkit;

namespace {

Action model(const std::string& name, std::map<std::string, double> params = {}) {
  const auto p = resolve_model_params(name, params);
  return model_action(name, p, model_generators(name, p));
}

std::vector<std::size_t> random_word(std::mt19937_64& rng, const GeneratingSet& s, std::size_t len) {
  std::uniform_int_distribution<std::size_t> pick(0, s.size() - 1);
  std::vector<std::size_t> w(len);
  for (auto& c : w) c = pick(rng);
  return w;
}

}  // namespace

TEST_CASE("builtin models act as documented") {
  const Action z = model("scaling-z");
  const auto& s = z.generators();
  CHECK(z.evaluate(reduce("b^3", s), Point{0.5}) == Point{4});
  CHECK(z.evaluate(reduce("b^-2", s), Point{1}) == Point{0.25});

  const Action zk = model("scaling-zk", {{"k", 2}, {"lambda", 3}});
  CHECK(zk.evaluate(reduce("e1 e1 e2^-1", zk.generators()), Point{1, 1}) == Point{9, 1.0 / 3});

  const Action bs = model("bs-affine", {{"m", 2}, {"n", 2}});
  const auto& t = bs.generators();
  CHECK(bs.evaluate(reduce("a", t), Point{1, 2}) == Point{1, 2});
  CHECK(bs.evaluate(reduce("b a^-3 b", t), Point{1, 2}) == Point{4, 8});

  const Action sum = model("scaling-sum", {{"k", 3}});
  CHECK(sum.evaluate(reduce("e1 e2 e3^-1", sum.generators()), Point{1}) == Point{2});
}

TEST_CASE("property: composite evaluation matches stepwise composition") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-1, 1);
  for (const auto& name : {"scaling-z", "scaling-zk", "bs-affine", "scaling-sum"}) {
    const Action phi = model(name);
    for (int trial = 0; trial < 200; ++trial) {
      const auto w = random_word(rng, phi.generators(), 1 + trial % 12);
      Point x(phi.dimension());
      for (double& v : x) v = u(rng);
      const Point a = phi.evaluate_word(w, x);
      const Point b = phi.evaluate_stepwise(w, x);
      for (std::size_t i = 0; i < x.size(); ++i) CHECK(std::abs(a[i] - b[i]) <= 1e-10 * (1 + std::abs(b[i])));
    }
  }
}

TEST_CASE("g h acts as Phi_g o Phi_h") {
  std::mt19937_64 rng(22);
  const Action phi = model("bs-affine");
  const auto& s = phi.generators();
  for (int trial = 0; trial < 200; ++trial) {
    const auto g = reduce(random_word(rng, s, 6), s);
    const auto h = reduce(random_word(rng, s, 6), s);
    const Point x{0.375};
    const Point lhs = phi.evaluate(multiply(g, h, s), x);
    const Point rhs = phi.evaluate(g, phi.evaluate(h, x));
    CHECK(std::abs(lhs[0] - rhs[0]) <= 1e-10 * (1 + std::abs(rhs[0])));
  }
}

TEST_CASE("builtin models satisfy their relations") {
  const std::vector<Point> xs{{0.1}, {-0.7}, {0.33}};
  for (const auto& name : {"scaling-z", "bs-affine", "scaling-sum"}) {
    const ActionReport r = validate_action(model(name), xs, 1e-12);
    CHECK(r.passed);
    CHECK(r.relation_defect <= 1e-12);
  }
  // With Phi_b = 3x, b a = 3x + 3 but a^2 b = 3x + 2.
  const auto s = GeneratingSet::standard(GroupFamily::solvable_bs());
  const Action bad(s, {Affine1D{1, 1}, Affine1D{3, 0}, Affine1D{1, -1}, Affine1D{1.0 / 3, 0}});
  CHECK_FALSE(validate_action(bad, xs, 1e-9).passed);
}

TEST_CASE("property: perturbed inverse solves the forward map") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> y(-50, 50), ph(0, 6.28);
  for (int trial = 0; trial < 2000; ++trial) {
    const double phase = ph(rng), target = y(rng);
    const double x = solve_perturbed_1d(target, 2, 0.01, 1, phase);
    CHECK(std::abs(2 * x + 0.01 * std::sin(x + phase) - target) <= 1e-12 * (1 + std::abs(target)));
  }
}

TEST_CASE("perturbation bound dominates the sampled generator distance") {
  const Action phi = model("scaling-z");
  const PerturbedAction p = perturb_action(phi, PerturbationSpec{{"b"}, 0.01, 1, false, 1e-3}, 0);
  CHECK(p.certified_bound == doctest::Approx(0.01));
  CHECK(generator_distance_bound(p.action, phi) == doctest::Approx(0.01));
  double sup = 0;
  for (int i = -4000; i <= 4000; ++i) {
    const Point x{i * 0.01};
    for (std::size_t s = 0; s < phi.generators().size(); ++s) {
      sup = std::max(sup, distance(p.action.apply_generator(s, x), phi.apply_generator(s, x)));
    }
  }
  CHECK(sup <= p.certified_bound);
  CHECK(sup > 0.9 * p.certified_bound);
  // Psi_{b^-1} inverts Psi_b.
  const auto& s = phi.generators();
  const Point x{0.7};
  const Point back = p.action.apply_generator(*s.index_of("b^-1"), p.action.apply_generator(*s.index_of("b"), x));
  CHECK(std::abs(back[0] - x[0]) <= 1e-14);
}

TEST_CASE("perturbation input checks") {
  const Action phi = model("scaling-z");
  CHECK_THROWS_AS(perturb_action(phi, PerturbationSpec{{"b"}, 3, 1, false, 1e-3}, 0), InputError);
  CHECK_THROWS_AS(perturb_action(phi, PerturbationSpec{{"q"}, 0.01, 1, false, 1e-3}, 0), InputError);
  CHECK_THROWS_AS(perturb_action(phi, PerturbationSpec{{"b", "b^-1"}, 0.01, 1, false, 1e-3}, 0), InputError);
  const PerturbedAction zero = perturb_action(phi, PerturbationSpec{{"b"}, 0, 1, false, 1e-3}, 0);
  CHECK(zero.certified_bound == 0);
  CHECK_THROWS_AS(validate_map(PerturbedDiagonal{{2}, {2.5}, {1}, {0}, 0, false}), InputError);
}

TEST_CASE("conjugate action is h Phi h^-1") {
  std::mt19937_64 rng(24);
  const Action phi = model("scaling-zk", {{"k", 2}, {"lambda", 2}});
  const DiagonalChange h{{3, -0.5}, {1, 0}};
  const Action c = conjugate_action(phi, h);
  const PerturbedAction psi = perturb_action(phi, PerturbationSpec{{"e1"}, 0.05, 2, true, 1e-3}, 9);
  const Action cp = conjugate_action(psi.action, h);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int trial = 0; trial < 200; ++trial) {
    const auto w = random_word(rng, phi.generators(), 1 + trial % 5);
    const Point y{u(rng), u(rng)};
    const Point expect = h.apply(phi.evaluate_word(w, h.apply_inverse(y)));
    const Point got = c.evaluate_word(w, y);
    CHECK(distance(got, expect) <= 1e-12 * (1 + std::abs(expect[0]) + std::abs(expect[1])));
    const Point pe = h.apply(psi.action.evaluate_stepwise(w, h.apply_inverse(y)));
    CHECK(distance(cp.evaluate_stepwise(w, y), pe) <= 1e-9);
  }
}

TEST_CASE("regenerated action agrees on every element") {
  const Action phi = model("scaling-zk", {{"k", 2}, {"lambda", 2}});
  const auto& fam = phi.family();
  const auto t = GeneratingSet::from_elements(fam, {{"u", fam.exponents({1, 0})}, {"v", fam.exponents({1, 1})}});
  const Action pt = phi.regenerate(t);
  const auto ball = CayleyBall::build(t, 4);
  const Point x{0.3, -0.6};
  for (const auto& g : ball->elements()) {
    const auto w = geodesic_word(g.normal_form, phi.generators());
    CHECK(distance(pt.evaluate(g, x), phi.evaluate_word(w, x)) <= 1e-12);
  }
  CHECK(pt.max_lipschitz() == 2);
}

TEST_CASE("diagonal composites expose their scales") {
  const Action phi = model("scaling-zk", {{"k", 2}, {"lambda", 2}});
  const auto w = phi.generators().parse_word("e1 e1 e2^-1");
  CHECK(phi.composite_scale(w) == std::vector<double>{4, 0.5});
  const auto s = GeneratingSet::standard(GroupFamily::solvable_bs());
  const Action affine(s, {Affine1D{1, 1}, Affine1D{2, 0}, Affine1D{1, -1}, Affine1D{0.5, 0}});
  CHECK(validate_action(affine, {{0.25}}, 0).passed);
  CHECK_THROWS_AS(affine.composite_scale({0}), Unsupported);
}

TEST_CASE("model parameters are validated") {
  CHECK_THROWS_AS(resolve_model_params("scaling-zk", {{"k", 1.5}}), InputError);
  CHECK_THROWS_AS(resolve_model_params("scaling-zk", {{"lambda", 0}}), InputError);
  CHECK_THROWS_AS(resolve_model_params("bs-affine", {{"m", 1}}), InputError);
  CHECK_THROWS_AS(resolve_model_params("scaling-z", {{"q", 1}}), InputError);
  CHECK_THROWS_AS(model_info("nope"), InputError);
}
