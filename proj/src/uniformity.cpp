#include "shadowkit/uniformity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "shadowkit/errors.hpp"

namespace shadowkit {

void require_same_dimension(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw InputError("dimension mismatch: " + std::to_string(x.size()) + " vs " +
                     std::to_string(y.size()));
  }
}

bool is_finite(std::span<const double> x) {
  return std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); });
}

double distance(std::span<const double> x, std::span<const double> y) {
  require_same_dimension(x, y);
  double d = 0;
  for (std::size_t i = 0; i < x.size(); ++i) d = std::max(d, std::abs(x[i] - y[i]));
  return d;
}

// ---------------------------------------------------------------- entourages

MetricEntourage::MetricEntourage(double epsilon) : epsilon_(epsilon) {
  if (!(epsilon > 0) || !std::isfinite(epsilon)) {
    throw InputError("entourage radius must be positive and finite");
  }
}

bool MetricEntourage::contains(std::span<const double> x, std::span<const double> y) const {
  return distance(x, y) <= epsilon_;
}

MetricEntourage MetricEntourage::power(std::size_t m) const {
  if (m == 0) throw InputError("entourage power must be >= 1");
  MetricEntourage out = *this;
  for (std::size_t i = 1; i < m; ++i) out = out.compose(*this);
  return out;
}

// ---------------------------------------------------------------- boxes

Interval Interval::from_bounds(double lo, double hi) {
  if (!(lo <= hi)) throw InputError("interval with lo > hi");
  if (lo == hi) return Interval{lo, 0.0};
  return Interval{0.5 * lo + 0.5 * hi, 0.5 * hi - 0.5 * lo};
}

bool Interval::contains(const Interval& inner) const {
  if (inner.mid == mid) return inner.rad <= rad;
  return inner.lo() >= lo() && inner.hi() <= hi();
}

Box Box::from_bounds(const std::vector<std::pair<double, double>>& bounds) {
  Box b;
  for (auto [lo, hi] : bounds) b.axes.push_back(Interval::from_bounds(lo, hi));
  return b;
}

double Box::volume() const {
  double v = 1;
  for (const auto& a : axes) v *= a.width();
  return v;
}

Point Box::center() const {
  Point c;
  for (const auto& a : axes) c.push_back(a.mid);
  return c;
}

bool Box::contains(const Box& inner) const {
  for (std::size_t i = 0; i < axes.size(); ++i) {
    if (!axes[i].contains(inner.axes[i])) return false;
  }
  return true;
}

bool Box::contains_point(std::span<const double> p) const {
  for (std::size_t i = 0; i < axes.size(); ++i) {
    if (std::abs(p[i] - axes[i].mid) > axes[i].rad) return false;
  }
  return true;
}

std::optional<Box> Box::intersect(const Box& other) const {
  Box out;
  out.axes.reserve(axes.size());
  for (std::size_t i = 0; i < axes.size(); ++i) {
    const Interval& a = axes[i];
    const Interval& b = other.axes[i];
    if (a.contains(b)) {
      out.axes.push_back(b);
    } else if (b.contains(a)) {
      out.axes.push_back(a);
    } else {
      double lo = std::max(a.lo(), b.lo());
      double hi = std::min(a.hi(), b.hi());
      if (lo > hi) return std::nullopt;
      // Midpoint-radius rounding can push an endpoint one ulp outside an
      // operand; pull the radius in so the result is nested in both.
      Interval c = Interval::from_bounds(lo, hi);
      for (int k = 0; k < 8 && !(a.contains(c) && b.contains(c)); ++k) {
        c.rad = std::nextafter(c.rad, 0.0);
      }
      out.axes.push_back(c);
    }
  }
  return out;
}

double Box::max_half_width() const {
  double r = 0;
  for (const auto& a : axes) r = std::max(r, a.rad);
  return r;
}

namespace {

// Closed pieces covering a \ b; pieces meet b only on its boundary.
std::vector<Box> subtract(const Box& a, const Box& b) {
  if (!a.intersect(b)) return {a};
  std::vector<Box> pieces;
  std::vector<std::pair<double, double>> cur;
  for (const auto& ax : a.axes) cur.emplace_back(ax.lo(), ax.hi());
  for (std::size_t i = 0; i < cur.size(); ++i) {
    double blo = b.axes[i].lo();
    double bhi = b.axes[i].hi();
    if (cur[i].first < blo) {
      auto piece = cur;
      piece[i] = {cur[i].first, blo};
      pieces.push_back(Box::from_bounds(piece));
      cur[i].first = blo;
    }
    if (bhi < cur[i].second) {
      auto piece = cur;
      piece[i] = {bhi, cur[i].second};
      pieces.push_back(Box::from_bounds(piece));
      cur[i].second = bhi;
    }
  }
  return pieces;
}

// Leftover of an exact subtraction after endpoint rounding: some axis is at
// most a few ulps wide.
bool sliver(const Box& b) {
  for (const auto& a : b.axes) {
    const double scale = std::max(std::abs(a.lo()), std::abs(a.hi()));
    if (a.width() <= 4 * (std::nextafter(scale, std::numeric_limits<double>::infinity()) - scale)) return true;
  }
  return false;
}

void check_dim(const Box& b, std::size_t dim) {
  if (b.dimension() != dim) throw InputError("box dimension does not match box set");
  for (const auto& a : b.axes) {
    if (!(a.rad >= 0) || !std::isfinite(a.mid) || !std::isfinite(a.rad)) {
      throw InputError("box interval is empty or not finite");
    }
  }
}

}  // namespace

BoxSet::BoxSet(Box box) : dim_(box.dimension()) {
  check_dim(box, dim_);
  boxes_.push_back(std::move(box));
}

BoxSet BoxSet::from_boxes(std::size_t dimension, const std::vector<Box>& boxes) {
  BoxSet out(dimension);
  for (const Box& b : boxes) {
    check_dim(b, dimension);
    std::vector<Box> rest{b};
    for (const Box& have : out.boxes_) {
      std::vector<Box> next;
      for (const Box& r : rest) {
        auto pieces = subtract(r, have);
        next.insert(next.end(), pieces.begin(), pieces.end());
      }
      rest = std::move(next);
      if (rest.empty()) break;
    }
    out.boxes_.insert(out.boxes_.end(), rest.begin(), rest.end());
  }
  return out;
}

bool BoxSet::includes(const BoxSet& inner) const {
  if (inner.dim_ != dim_) throw InputError("box set dimension mismatch");
  for (const Box& a : inner.boxes_) {
    if (std::any_of(boxes_.begin(), boxes_.end(), [&](const Box& b) { return b.contains(a); })) {
      continue;
    }
    std::vector<Box> rest{a};
    for (const Box& b : boxes_) {
      std::vector<Box> next;
      for (const Box& r : rest) {
        auto pieces = subtract(r, b);
        next.insert(next.end(), pieces.begin(), pieces.end());
      }
      rest = std::move(next);
      if (rest.empty()) break;
    }
    if (!std::all_of(rest.begin(), rest.end(), sliver)) return false;
  }
  return true;
}

bool BoxSet::contains_point(std::span<const double> p) const {
  if (p.size() != dim_) throw InputError("point dimension does not match box set");
  return std::any_of(boxes_.begin(), boxes_.end(), [&](const Box& b) { return b.contains_point(p); });
}

BoxSet BoxSet::unite(const BoxSet& other) const {
  if (other.dim_ != dim_) throw InputError("box set dimension mismatch");
  std::vector<Box> all = boxes_;
  all.insert(all.end(), other.boxes_.begin(), other.boxes_.end());
  return from_boxes(dim_, all);
}

BoxSet BoxSet::inflate(double r) const {
  std::vector<Box> grown = boxes_;
  for (Box& b : grown) {
    for (auto& a : b.axes) a.rad += r;
  }
  return from_boxes(dim_, grown);
}

std::optional<Box> BoxSet::hull() const {
  if (boxes_.empty()) return std::nullopt;
  std::vector<std::pair<double, double>> bounds;
  for (std::size_t i = 0; i < dim_; ++i) {
    double lo = boxes_[0].axes[i].lo();
    double hi = boxes_[0].axes[i].hi();
    for (const Box& b : boxes_) {
      lo = std::min(lo, b.axes[i].lo());
      hi = std::max(hi, b.axes[i].hi());
    }
    bounds.emplace_back(lo, hi);
  }
  return Box::from_bounds(bounds);
}

BoxSet intersect(const BoxSet& a, const BoxSet& b) {
  if (a.dim_ != b.dim_) throw InputError("box set dimension mismatch");
  BoxSet out(a.dim_);
  for (const Box& x : a.boxes_) {
    for (const Box& y : b.boxes_) {
      if (auto z = x.intersect(y)) out.boxes_.push_back(std::move(*z));
    }
  }
  return out;
}

BoxSet linear_image(const BoxSet& a, std::span<const double> scale,
                    std::span<const double> offset) {
  if (scale.size() != a.dim_ || (!offset.empty() && offset.size() != a.dim_)) {
    throw InputError("linear_image: dimension mismatch");
  }
  for (double s : scale) {
    if (s == 0 || !std::isfinite(s)) throw InputError("linear_image: zero or non-finite scale");
  }
  BoxSet out(a.dim_);
  for (const Box& b : a.boxes_) {
    Box img;
    for (std::size_t i = 0; i < a.dim_; ++i) {
      double t = offset.empty() ? 0.0 : offset[i];
      img.axes.push_back(Interval{scale[i] * b.axes[i].mid + t, std::abs(scale[i]) * b.axes[i].rad});
    }
    out.boxes_.push_back(std::move(img));
  }
  return out;
}

BoxSet change_image(const BoxSet& a, const DiagonalChange& h) {
  h.validate();
  if (h.dimension() != a.dim_) throw InputError("change_image: dimension mismatch");
  BoxSet out(a.dim_);
  for (const Box& b : a.boxes_) {
    Box img;
    for (std::size_t i = 0; i < a.dim_; ++i) {
      const Interval& src = b.axes[h.source(i)];
      img.axes.push_back(Interval{h.scale[i] * src.mid, std::abs(h.scale[i]) * src.rad});
    }
    out.boxes_.push_back(std::move(img));
  }
  return out;
}

BoxSet cross_section(const MetricEntourage& e, std::span<const double> x) {
  Box b;
  for (double xi : x) b.axes.push_back(Interval{xi, e.epsilon()});
  return BoxSet(std::move(b));
}

// ---------------------------------------------------------------- coordinate changes

DiagonalChange DiagonalChange::scaling(std::vector<double> scale) {
  DiagonalChange h{std::move(scale), {}};
  h.validate();
  return h;
}

void DiagonalChange::validate() const {
  for (double s : scale) {
    if (s == 0 || !std::isfinite(s)) throw InputError("coordinate change is singular");
  }
  if (!perm.empty()) {
    if (perm.size() != scale.size()) throw InputError("permutation length mismatch");
    std::vector<std::size_t> sorted = perm;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
      if (sorted[i] != i) throw InputError("coordinate change permutation is not a bijection");
    }
  }
}

Point DiagonalChange::apply(std::span<const double> x) const {
  if (x.size() != scale.size()) throw InputError("coordinate change dimension mismatch");
  Point y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = scale[i] * x[source(i)];
  return y;
}

Point DiagonalChange::apply_inverse(std::span<const double> y) const {
  if (y.size() != scale.size()) throw InputError("coordinate change dimension mismatch");
  Point x(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) x[source(i)] = y[i] / scale[i];
  return x;
}

DiagonalChange DiagonalChange::inverse() const {
  validate();
  DiagonalChange inv;
  inv.scale.assign(scale.size(), 1.0);
  if (!perm.empty()) inv.perm.assign(scale.size(), 0);
  for (std::size_t i = 0; i < scale.size(); ++i) {
    std::size_t j = source(i);
    inv.scale[j] = 1.0 / scale[i];
    if (!perm.empty()) inv.perm[j] = i;
  }
  return inv;
}

double DiagonalChange::lipschitz() const {
  double l = 0;
  for (double s : scale) l = std::max(l, std::abs(s));
  return l;
}

// ---------------------------------------------------------------- measure

LebesgueMeasure LebesgueMeasure::pullback(const DiagonalChange& h) const {
  h.validate();
  if (h.dimension() != dim_) throw InputError("pullback: dimension mismatch");
  LebesgueMeasure out = *this;
  out.chain_.push_back(h);
  return out;
}

double LebesgueMeasure::measure(const BoxSet& a) const {
  if (a.dimension() != dim_) throw InputError("measure: dimension mismatch");
  double total = 0;
  for (const Box& b : a.boxes()) {
    Box cur = b;
    // mu_k(A) = mu_{k-1}(h_k^-1 A): undo the most recent change first.
    for (auto it = chain_.rbegin(); it != chain_.rend(); ++it) {
      Box prev;
      prev.axes.resize(dim_);
      for (std::size_t i = 0; i < dim_; ++i) {
        prev.axes[it->source(i)] =
            Interval{cur.axes[i].mid / it->scale[i], cur.axes[i].rad / std::abs(it->scale[i])};
      }
      cur = std::move(prev);
    }
    total += cur.volume();
  }
  return total;
}

}  // namespace shadowkit
