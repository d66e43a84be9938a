#pragma once

// Stability constructions for a diagonal-linear action Phi and a nearby
// action Psi:
//   f(x)   = the Phi-shadow of the Psi-orbit of x (semiconjugacy);
//   H_m(x) = intersection over |g| <= m of Phi_{g^-1}(E'[Psi_g x]) (set-valued
//            map on finite windows);
// plus the checks that tie them to the stability definitions.

#include <cstddef>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "shadowkit/action.hpp"
#include "shadowkit/shadowing.hpp"
#include "shadowkit/uniformity.hpp"

namespace shadowkit {

struct SemiconjugacyRow {
  Point x;
  Point fx;
  double radius = 0;        // tracing radius of the Psi-orbit by Phi(fx)
  bool solved = false;
  bool pass = false;        // solved and distance(x, fx) <= eps_E
  double residual = 0;      // max equivariance residual over tested h
  std::string error;        // solver message for unsolved rows
};

struct SemiconjugacyTable {
  std::shared_ptr<const CayleyBall> ball;
  double epsilon = 0;
  std::vector<SemiconjugacyRow> rows;
  // Filled by verify_semiconjugacy.
  std::vector<std::string> tested;        // formatted test elements
  std::vector<double> residual_by_element;
  double tolerance = std::numeric_limits<double>::quiet_NaN();
  bool verified = false;
};

// f(x) for a single point.
ShadowResult semiconjugacy_at(const Action& phi, const Action& psi,
                              std::shared_ptr<const CayleyBall> ball, const Point& x,
                              const GridSpec& grid = {});

SemiconjugacyTable build_semiconjugacy(const Action& phi, const Action& psi,
                                       std::shared_ptr<const CayleyBall> ball,
                                       const MetricEntourage& e, const std::vector<Point>& samples,
                                       const GridSpec& grid = {}, unsigned jobs = 1);

struct SemiconjugacyReport {
  double max_residual = 0;      // max over samples, h of |f(Psi_h x) - Phi_h f(x)|
  double max_displacement = 0;  // max |x - f(x)|
  std::size_t unsolved = 0;
  // Sampled continuity modulus: max |f(x) - f(x')| with |x - x'| = delta.
  double continuity_delta = 0;
  double continuity_modulus = 0;
  bool passed = false;
};

// Writes per-row and per-element residuals into `table`.  f(Psi_h x) is
// computed from its own orbit window around Psi_h x.
SemiconjugacyReport verify_semiconjugacy(SemiconjugacyTable& table, const Action& phi,
                                         const Action& psi,
                                         const std::vector<GroupElement>& test_elements,
                                         double tol, const GridSpec& grid = {},
                                         double continuity_delta = 1e-4, unsigned jobs = 1);

struct HWindow {
  Point origin;                     // x
  std::vector<std::size_t> shift;   // word of h; the window is H(Psi_h x)
  Point base;                       // Psi_h x
  double epsilon = 0;               // eps_E'
  std::vector<std::size_t> radii;
  std::vector<BoxSet> boxes;        // H_m for each radius

  // Index of the deepest nonempty window, if any.
  std::optional<std::size_t> deepest_nonempty() const;
};

// H_m(x) for each m in `radii` (strictly increasing).  Throws Unsupported
// unless phi is all-diagonal.
HWindow build_H_window(const Action& phi, const Action& psi, const MetricEntourage& e_prime,
                       const Point& x, const std::vector<std::size_t>& radii);

// H_m(Psi_h x), evaluating Psi_g(Psi_h x) as Psi_{gh} x so the windows at x
// and at Psi_h x are built from literally the same constraint boxes.
HWindow build_H_window_at(const Action& phi, const Action& psi, const MetricEntourage& e_prime,
                          const Point& x, const GroupElement& h,
                          const std::vector<std::size_t>& radii);

struct SandwichRow {
  std::size_t m = 0;
  bool inner = false;  // H_{m+l}(Psi_h x) within Phi_h(H_m x)
  bool outer = false;  // Phi_h(H_m x) within H_{m-l}(Psi_h x)
};

struct HReport {
  HWindow window;
  std::size_t h_length = 0;
  bool nested = true;
  std::size_t nesting_violations = 0;
  std::vector<double> volumes;
  std::vector<double> ratios;   // consecutive volume ratios while nonempty
  bool decaying = true;         // strictly decreasing volumes
  std::vector<SandwichRow> sandwich;
  bool sandwich_ok = true;
  bool near_identity = true;    // every H_m(x) within E[x]
  std::optional<std::size_t> first_empty;  // radius where H_m first is empty
  bool passed = false;
};

// Nesting, volume decay, the index-shifted equivariance sandwich for h, and
// H_m(x) within E[x].
HReport verify_H_properties(const Action& phi, const Action& psi, const MetricEntourage& e_prime,
                            const MetricEntourage& e, const Point& x, const GroupElement& h,
                            const std::vector<std::size_t>& radii, const LebesgueMeasure& mu);

struct UscRow {
  double delta = 0;
  double rho = 0;  // smallest inflation with H_m(x') within inflate(H_m(x), rho)
};

// Empirical upper semicontinuity at x: perturb x by +-delta in every
// coordinate and measure how far H_m(x') sticks out of H_m(x).
std::vector<UscRow> usc_modulus(const Action& phi, const Action& psi,
                                const MetricEntourage& e_prime, const Point& x, std::size_t m,
                                const std::vector<double>& deltas);

struct SingletonReport {
  bool domain = false;        // (a) every row solved
  bool null_values = false;   // (b) mu({f(x)}) = 0
  bool near_identity = false; // (c) |x - f(x)| <= eps_E
  bool equivariant = false;   // (d) table residuals within tolerance
  std::vector<std::size_t> failing_rows;
  bool passed() const { return domain && null_values && near_identity && equivariant; }
};

// H(x) = {f(x)}: checks the four conditions of the set-valued stability
// definition on the table's samples.  (d) requires a verified table.
SingletonReport singleton_H_from_map(const SemiconjugacyTable& table, const LebesgueMeasure& mu,
                                     const MetricEntourage& e);

struct PersistenceWitness {
  Point y;
  std::size_t radius = 0;
  double slack = 0;       // half-width of the window the witness came from
  double max_distance = 0;
  bool audit_passed = false;
};

// Center of the deepest nonempty window, audited against
// |Psi_g x - Phi_g y| <= eps_E' + slack over the radius-m ball.
std::optional<PersistenceWitness> extract_persistence_witness(const HWindow& hw,
                                                              const Action& phi,
                                                              const Action& psi);

}  // namespace shadowkit
