#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "shadowkit/errors.hpp"
#include "shadowkit/uniformity.hpp"

using namespace shadowkit;

namespace {

Box random_box(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> c(-2, 2), w(0.01, 1.5);
  std::vector<std::pair<double, double>> b;
  for (std::size_t i = 0; i < n; ++i) {
    const double lo = c(rng);
    b.emplace_back(lo, lo + w(rng));
  }
  return Box::from_bounds(b);
}

double overlap_volume(const Box& a, const Box& b) {
  double v = 1;
  for (std::size_t i = 0; i < a.dimension(); ++i) {
    v *= std::max(0.0, std::min(a.axes[i].hi(), b.axes[i].hi()) - std::max(a.axes[i].lo(), b.axes[i].lo()));
  }
  return v;
}

}  // namespace

TEST_CASE("max metric and entourages") {
  const Point x{0, 0}, y{0.5, -1};
  CHECK(distance(x, y) == 1);
  CHECK(MetricEntourage(1).contains(x, y));
  CHECK_FALSE(MetricEntourage(0.999).contains(x, y));
  CHECK(MetricEntourage(0.25).compose(MetricEntourage(0.5)).epsilon() == 0.75);
  CHECK(MetricEntourage(0.25).power(4).epsilon() == 1);
  CHECK_THROWS_AS(distance(Point{1}, Point{1, 2}), InputError);
  CHECK_THROWS_AS(MetricEntourage(-1), InputError);
}

TEST_CASE("cross sections are closed boxes") {
  const BoxSet s = cross_section(MetricEntourage(0.5), Point{1, 2});
  CHECK(s.contains_point(Point{1.5, 1.5}));
  CHECK_FALSE(s.contains_point(Point{1.5000001, 2}));
  CHECK(LebesgueMeasure(2).measure(s) == 1);
}

TEST_CASE("intersection of concentric boxes is the inner one") {
  const Box outer{{{0.3, 0.02}}};
  const Box inner{{{0.3, 0.01}}};
  auto c = outer.intersect(inner);
  REQUIRE(c);
  CHECK(c->axes[0].mid == inner.axes[0].mid);
  CHECK(c->axes[0].rad == inner.axes[0].rad);
  CHECK_FALSE(Box{{{0, 1}}}.intersect(Box{{{3, 1}}}));
}

TEST_CASE("property: intersections lie in both operands") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 2000; ++trial) {
    const Box a = random_box(rng, 2), b = random_box(rng, 2);
    if (auto c = a.intersect(b)) {
      CHECK(a.contains(*c));
      CHECK(b.contains(*c));
      CHECK(c->volume() == doctest::Approx(overlap_volume(a, b)).epsilon(1e-12));
    } else {
      CHECK(overlap_volume(a, b) == 0);
    }
  }
}

TEST_CASE("property: box set unions have inclusion-exclusion volume") {
  std::mt19937_64 rng(4);
  const LebesgueMeasure mu(2);
  for (int trial = 0; trial < 500; ++trial) {
    const Box a = random_box(rng, 2), b = random_box(rng, 2);
    const BoxSet u = BoxSet(a).unite(BoxSet(b));
    const double expected = a.volume() + b.volume() - overlap_volume(a, b);
    CHECK(mu.measure(u) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(u.includes(BoxSet(a)));
    CHECK(u.includes(BoxSet(b)));
    const BoxSet i = intersect(BoxSet(a), BoxSet(b));
    CHECK(mu.measure(i) == doctest::Approx(overlap_volume(a, b)).epsilon(1e-12));
  }
}

TEST_CASE("power-of-two images are exact") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    const Box a = random_box(rng, 1);
    const std::vector<double> up{8}, down{0.125};
    const BoxSet back = linear_image(linear_image(BoxSet(a), up), down);
    REQUIRE(back.boxes().size() == 1);
    CHECK(back.boxes()[0].axes[0].mid == a.axes[0].mid);
    CHECK(back.boxes()[0].axes[0].rad == a.axes[0].rad);
  }
  CHECK_THROWS_AS(linear_image(BoxSet(Box{{{0, 1}}}), std::vector<double>{0}), InputError);
}

TEST_CASE("linear images handle negative scales and offsets") {
  const BoxSet s(Box::from_bounds({{1, 2}}));
  const BoxSet img = linear_image(s, std::vector<double>{-2}, std::vector<double>{1});
  const auto h = img.hull();
  REQUIRE(h);
  CHECK(h->axes[0].lo() == -3);
  CHECK(h->axes[0].hi() == -1);
}

TEST_CASE("inflate and hull") {
  BoxSet s = BoxSet(Box::from_bounds({{0, 1}})).unite(BoxSet(Box::from_bounds({{3, 4}})));
  CHECK(LebesgueMeasure(1).measure(s) == 2);
  const auto h = s.hull();
  REQUIRE(h);
  CHECK(h->axes[0].lo() == 0);
  CHECK(h->axes[0].hi() == 4);
  CHECK(LebesgueMeasure(1).measure(s.inflate(1)) == 6);  // [-1, 5] without merging gaps
  CHECK_FALSE(BoxSet(1).hull());
}

TEST_CASE("coordinate changes and pullback measure") {
  const DiagonalChange h{{2, -3}, {1, 0}};
  const Point x{1, 5};
  const Point y = h.apply(x);
  CHECK(y == Point{10, -3});
  CHECK(h.apply_inverse(y) == x);
  CHECK(h.inverse().apply(y) == x);
  CHECK(h.lipschitz() == 3);
  const BoxSet a(Box::from_bounds({{0, 1}, {0, 2}}));
  const LebesgueMeasure mu(2);
  CHECK(mu.measure(change_image(a, h)) == 12);
  CHECK(mu.pullback(h).measure(change_image(a, h)) == mu.measure(a));
  CHECK_THROWS_AS((DiagonalChange{{1, 0}, {}}.validate()), InputError);
  CHECK_THROWS_AS((DiagonalChange{{1, 1}, {0, 0}}.validate()), InputError);
}
