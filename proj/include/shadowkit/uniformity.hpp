#pragma once

// Metric realization of the uniform structure on R^n: entourages are closed
// max-metric neighbourhoods of the diagonal, cross sections are boxes, and
// the set-valued constructions live in finite unions of closed boxes.

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace shadowkit {

using Point = std::vector<double>;

// Throws InputError on a dimension mismatch.
void require_same_dimension(std::span<const double> x, std::span<const double> y);
bool is_finite(std::span<const double> x);

// max_i |x_i - y_i|
double distance(std::span<const double> x, std::span<const double> y);

// E_eps = {(x, y) : max_i |x_i - y_i| <= eps}.  Closed and symmetric.
class MetricEntourage {
 public:
  explicit MetricEntourage(double epsilon);
  double epsilon() const { return epsilon_; }

  bool contains(std::span<const double> x, std::span<const double> y) const;

  // E_a o E_b = E_{a+b} in the max metric.
  MetricEntourage compose(const MetricEntourage& other) const {
    return MetricEntourage(epsilon_ + other.epsilon_);
  }
  MetricEntourage power(std::size_t m) const;

 private:
  double epsilon_;
};

inline MetricEntourage compose(const MetricEntourage& a, const MetricEntourage& b) {
  return a.compose(b);
}

// Closed interval stored as midpoint and radius.  Scaling by powers of two
// and containment of concentric intervals are exact in this form.
struct Interval {
  double mid = 0;
  double rad = 0;

  static Interval from_bounds(double lo, double hi);
  double lo() const { return mid - rad; }
  double hi() const { return mid + rad; }
  double width() const { return 2 * rad; }
  bool contains(const Interval& inner) const;
};

struct Box {
  std::vector<Interval> axes;

  static Box from_bounds(const std::vector<std::pair<double, double>>& bounds);
  std::size_t dimension() const { return axes.size(); }
  double volume() const;
  Point center() const;
  bool contains(const Box& inner) const;
  bool contains_point(std::span<const double> p) const;
  std::optional<Box> intersect(const Box& other) const;
  double max_half_width() const;
};

// Coordinate change h(x)_i = scale_i * x_{perm_i}.  Invertible when every
// scale is nonzero and perm is a permutation.
struct DiagonalChange {
  std::vector<double> scale;
  std::vector<std::size_t> perm;  // empty means identity permutation

  static DiagonalChange scaling(std::vector<double> scale);
  std::size_t dimension() const { return scale.size(); }
  std::size_t source(std::size_t i) const { return perm.empty() ? i : perm[i]; }
  void validate() const;
  Point apply(std::span<const double> x) const;
  Point apply_inverse(std::span<const double> y) const;
  DiagonalChange inverse() const;
  double lipschitz() const;
};

// Finite union of closed boxes kept as an interior-disjoint decomposition.
class BoxSet {
 public:
  explicit BoxSet(std::size_t dimension) : dim_(dimension) {}
  explicit BoxSet(Box box);
  // Normalizes overlapping input boxes into a disjoint decomposition.
  static BoxSet from_boxes(std::size_t dimension, const std::vector<Box>& boxes);

  std::size_t dimension() const { return dim_; }
  bool empty() const { return boxes_.empty(); }
  const std::vector<Box>& boxes() const { return boxes_; }

  // Exact (up to endpoint rounding) containment A within this set.
  bool includes(const BoxSet& inner) const;
  bool contains_point(std::span<const double> p) const;
  BoxSet unite(const BoxSet& other) const;
  BoxSet inflate(double r) const;

  // Per-coordinate bounding box of the set; empty set has none.
  std::optional<Box> hull() const;

 private:
  std::size_t dim_;
  std::vector<Box> boxes_;
  friend BoxSet intersect(const BoxSet&, const BoxSet&);
  friend BoxSet linear_image(const BoxSet&, std::span<const double>, std::span<const double>);
  friend BoxSet change_image(const BoxSet&, const DiagonalChange&);
};

BoxSet intersect(const BoxSet& a, const BoxSet& b);

// Image under x -> scale * x + offset (per coordinate).  Throws InputError if
// a scale is zero.  An empty offset means zero.
BoxSet linear_image(const BoxSet& a, std::span<const double> scale,
                    std::span<const double> offset = {});

BoxSet change_image(const BoxSet& a, const DiagonalChange& h);

// E[x]: the closed box of half-width eps around x.
BoxSet cross_section(const MetricEntourage& e, std::span<const double> x);

// Lebesgue measure on R^n, optionally pulled back through a coordinate
// change: h*(mu)(A) = mu(h^-1(A)).
class LebesgueMeasure {
 public:
  explicit LebesgueMeasure(std::size_t dimension) : dim_(dimension) {}
  std::size_t dimension() const { return dim_; }
  LebesgueMeasure pullback(const DiagonalChange& h) const;
  double measure(const BoxSet& a) const;

 private:
  std::size_t dim_;
  std::vector<DiagonalChange> chain_;  // applied in order when pulling back
};

inline double volume(const BoxSet& a, const LebesgueMeasure& mu) { return mu.measure(a); }

}  // namespace shadowkit
