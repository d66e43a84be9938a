#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "shadowkit/errors.hpp"
#include "shadowkit/expansivity.hpp"
#include "shadowkit/models.hpp"

using namespace shadowkit;

namespace {

Action model(const std::string& name, std::map<std::string, double> params = {}) {
  const auto p = resolve_model_params(name, params);
  return model_action(name, p, model_generators(name, p));
}

}  // namespace

TEST_CASE("property: separation length is floor(log2(eps / gap)) + 1") {
  std::mt19937_64 rng(51);
  std::uniform_real_distribution<double> u(-1, 1), g(1e-9, 0.9);
  const Action phi = model("scaling-z");
  const MetricEntourage d(1);
  for (int trial = 0; trial < 1000; ++trial) {
    const double x = u(rng);
    const double y = x + (trial % 2 ? 1 : -1) * g(rng);
    const double gap = std::abs(x - y);
    const double expect = std::floor(std::log2(1 / gap)) + 1;
    if (std::abs(std::log2(1 / gap) - std::round(std::log2(1 / gap))) < 1e-9) continue;
    const SeparationResult r = separation_search(phi, Point{x}, Point{y}, d, 64);
    REQUIRE(r.found());
    CHECK(static_cast<double>(r.certificate->length) == expect);
    CHECK(r.certificate->distance > 1);
    CHECK(r.certificate->g.word.size() == r.certificate->length);
  }
}

TEST_CASE("separation search reports failure and bad input") {
  const Action phi = model("scaling-z");
  const auto r = separation_search(phi, Point{0}, Point{1e-6}, MetricEntourage(1), 5);
  CHECK_FALSE(r.found());
  CHECK(r.searched_radius == 5);
  CHECK_THROWS_AS(separation_search(phi, Point{0.5}, Point{0.5}, MetricEntourage(1), 5), InputError);
}

TEST_CASE("contracting generators separate through their inverses") {
  const Action phi = model("scaling-z", {{"lambda", 0.5}});
  const auto r = separation_search(phi, Point{0}, Point{0.3}, MetricEntourage(1), 10);
  REQUIRE(r.found());
  CHECK(r.certificate->length == 2);
  CHECK(phi.generators().format_word(r.certificate->g.word).find("^-1") != std::string::npos);
}

TEST_CASE("dynamical balls have half-width eps / lambda^m") {
  const Action phi = model("scaling-zk", {{"k", 2}, {"lambda", 2}});
  for (std::size_t m = 0; m <= 10; ++m) {
    const BoxSet b = dynamical_ball(phi, Point{0.1, 0.2}, MetricEntourage(1), m);
    REQUIRE(b.boxes().size() == 1);
    CHECK(b.boxes()[0].axes[0].rad == std::ldexp(1.0, -static_cast<int>(m)));
    CHECK(b.boxes()[0].axes[1].rad == std::ldexp(1.0, -static_cast<int>(m)));
    CHECK(max_composite_scale(phi, m) == std::vector<double>(2, std::ldexp(1.0, static_cast<int>(m))));
  }
  const auto s = GeneratingSet::standard(GroupFamily::solvable_bs());
  const Action affine(s, {Affine1D{1, 1}, Affine1D{2, 0}, Affine1D{1, -1}, Affine1D{0.5, 0}});
  CHECK_THROWS_AS(dynamical_ball(affine, Point{0}, MetricEntourage(1), 2), Unsupported);
}

TEST_CASE("points of a dynamical ball stay eps-close along the ball") {
  std::mt19937_64 rng(52);
  const Action phi = model("scaling-z", {{"lambda", 3}});
  const auto ball = CayleyBall::build(phi.generators(), 6);
  const BoxSet gamma = dynamical_ball(phi, Point{0.2}, MetricEntourage(0.5), 6);
  const Box& b = gamma.boxes()[0];
  std::uniform_real_distribution<double> u(b.axes[0].lo(), b.axes[0].hi());
  for (int trial = 0; trial < 200; ++trial) {
    const Point y{u(rng)};
    for (const auto& g : ball->elements()) {
      CHECK(distance(phi.evaluate(g, Point{0.2}), phi.evaluate(g, y)) <= 0.5 + 1e-12);
    }
  }
}

TEST_CASE("mu-expansivity: volume halves per radius step on Z") {
  const Action phi = model("scaling-z");
  std::vector<std::size_t> radii;
  for (std::size_t r = 1; r <= 12; ++r) radii.push_back(r);
  const auto rep = mu_expansivity_report(phi, MetricEntourage(1), {{0.1}, {-0.4}}, radii,
                                         LebesgueMeasure(1), 1e-3);
  CHECK(rep.passed);
  CHECK(rep.strictly_decreasing);
  CHECK(rep.samples_agree);
  CHECK(rep.analytic_flag);
  REQUIRE(rep.ratios.size() == radii.size() - 1);
  for (double q : rep.ratios) CHECK(q == 0.5);
  CHECK(rep.volumes[0].back() == std::ldexp(2.0, -12));
}

TEST_CASE("mu-expansivity: Z^2 volume quarters per radius step") {
  const Action phi = model("scaling-zk", {{"k", 2}, {"lambda", 2}});
  const auto rep = mu_expansivity_report(phi, MetricEntourage(1), {{0.1, 0.2}}, {1, 2, 3, 4, 5, 6},
                                         LebesgueMeasure(2), 1e-3);
  for (double q : rep.ratios) CHECK(q == 0.25);
  CHECK(rep.passed);
}

TEST_CASE("analytic expansivity flag") {
  CHECK(analytic_expansive(model("scaling-z")));
  CHECK(analytic_expansive(model("bs-affine")));
  const Action id(GeneratingSet::standard(GroupFamily::free_abelian(2)),
                  {DiagonalLinear{{2, 1}}, DiagonalLinear{{1, 1}}, DiagonalLinear{{0.5, 1}},
                   DiagonalLinear{{1, 1}}});
  CHECK_FALSE(analytic_expansive(id));
}
