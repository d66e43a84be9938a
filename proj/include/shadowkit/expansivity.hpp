#pragma once

// Separation of points by the action, truncated dynamical balls
// Gamma^m_D(x) = {y : |Phi_g x - Phi_g y| <= eps_D for all g with |g| <= m},
// and volume-decay reports standing in for mu(Gamma_D(x)) = 0.

#include <cstddef>
#include <optional>
#include <vector>

#include "shadowkit/action.hpp"
#include "shadowkit/group.hpp"
#include "shadowkit/uniformity.hpp"

namespace shadowkit {

struct SeparationCertificate {
  GroupElement g;
  std::size_t length = 0;
  double distance = 0;  // > eps_D
  std::size_t searched_radius = 0;
};

struct SeparationResult {
  std::optional<SeparationCertificate> certificate;
  std::size_t searched_radius = 0;
  bool found() const { return certificate.has_value(); }
};

// First g in ball order (word length, then normal form) with
// |Phi_g x - Phi_g y| > eps_D.  Throws InputError if x == y.
SeparationResult separation_search(const Action& phi, const Point& x, const Point& y,
                                   const MetricEntourage& d, std::size_t max_radius);

// Largest |lambda_i(g)| over the ball of radius m, per coordinate.  Requires
// an all-diagonal action.
std::vector<double> max_composite_scale(const Action& phi, std::size_t m);

// Exact box: coordinate i has half-width eps_D / max_g |lambda_i(g)|.
// Throws Unsupported unless the action is all-diagonal.
BoxSet dynamical_ball(const Action& phi, const Point& x, const MetricEntourage& d,
                      std::size_t m);

// True when every coordinate has some generator with |lambda| != 1, so the
// composite scales are unbounded over the group in every coordinate.
bool analytic_expansive(const Action& phi);

struct MuExpansivityReport {
  std::vector<std::size_t> radii;
  std::vector<std::vector<double>> volumes;  // [sample][radius]
  std::vector<double> ratios;                // consecutive volume ratios, sample 0
  double threshold = 0;
  bool strictly_decreasing = true;
  bool below_threshold = true;
  bool samples_agree = true;  // volumes identical across samples
  bool analytic_flag = false;
  bool passed = false;
};

MuExpansivityReport mu_expansivity_report(const Action& phi, const MetricEntourage& d,
                                          const std::vector<Point>& samples,
                                          const std::vector<std::size_t>& radii,
                                          const LebesgueMeasure& mu, double threshold);

}  // namespace shadowkit
