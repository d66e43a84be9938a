#pragma once

// Shadowing points for finite pseudo-orbits: a closed-form solver for
// diagonal-linear actions, a grid min-max oracle for anything else, and the
// persistence and uniqueness checks built on them.

#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "shadowkit/action.hpp"
#include "shadowkit/expansivity.hpp"
#include "shadowkit/pseudo_orbit.hpp"

namespace shadowkit {

enum class ShadowMethod { ClosedForm, BruteForce };
const char* to_string(ShadowMethod m);

struct ShadowResult {
  Point point;
  double tracing_radius = 0;
  ShadowMethod method = ShadowMethod::ClosedForm;
  // Closed form: declared_eps / (lambda_min - 1) when every coordinate
  // expands, NaN otherwise.  Brute force: NaN.
  double derived_bound = std::numeric_limits<double>::quiet_NaN();
  // Brute force only: final grid cell width (max over axes) and whether the
  // incumbent ended next to the search box boundary.
  double final_cell = 0;
  bool boundary_warning = false;
};

// Smallest per-step expansion: min over coordinates of the smallest generator
// scale |lambda_s,i| > 1.  Infinite if some coordinate never expands or the
// action is not all-diagonal.
double expansion_floor(const Action& phi);

// max over the ball of distance(x_g, Phi_g(y)).
double tracing_radius(const PseudoOrbit& po, const Action& phi, const Point& y);

// Per coordinate i, picks the first ball element g* (ball order) maximizing
// |lambda_i(g)| and sets y_i = x_{g*,i} / lambda_i(g*).  Throws SolverError
// if some coordinate has every composite scale equal to 1.
ShadowResult shadow_diagonal_linear(const PseudoOrbit& po, const Action& phi);

struct GridSpec {
  std::size_t cells = 64;
  std::size_t rounds = 4;
  double factor = 8;
};

// Grid scan of y -> max_g distance(x_g, Phi_g y) over `search_box`, then
// `rounds - 1` refinements: each keeps the incumbent and shrinks the box
// width by `factor`, clamped to the original box.
ShadowResult shadow_generic(const PseudoOrbit& po, const Action& phi, const Box& search_box,
                            const GridSpec& grid = {});

// Box around x_e guaranteed to contain every minimizer: any minimizer y*
// satisfies |y* - x_e| <= F(y*) <= F(c) for each candidate c (x_e and the
// pulled-back points Phi_g^-1 x_g of the outer layer).  The radius is padded
// by a quarter so minimizers do not sit on the boundary.
Box default_search_box(const PseudoOrbit& po, const Action& phi);

// Closed form when the action is all-diagonal, brute force otherwise.
ShadowResult shadow(const PseudoOrbit& po, const Action& phi, const GridSpec& grid = {});

struct PersistenceRow {
  Point x;
  Point y;
  double radius = 0;
  bool pass = false;
};

struct PersistenceReport {
  std::vector<PersistenceRow> rows;
  double epsilon = 0;
  double declared = 0;  // certified generator distance between psi and phi
  double max_radius = 0;
  std::size_t passed = 0;
  bool all_pass() const { return passed == rows.size(); }
};

// For each x: orbit of psi over the ball, shadowed by phi; passes when the
// tracing radius is within eps_E.
PersistenceReport check_persistence(const Action& phi, const Action& psi,
                                    std::shared_ptr<const CayleyBall> ball,
                                    const std::vector<Point>& samples, const MetricEntourage& e,
                                    const GridSpec& grid = {}, unsigned jobs = 1);

struct UniquenessCertificate {
  enum class Status { Coincide, Separated, Inconclusive } status = Status::Inconclusive;
  double gap = 0;  // distance(y1, y2)
  std::optional<SeparationCertificate> separation;
};
const char* to_string(UniquenessCertificate::Status s);

// Two shadows of one pseudo-orbit either coincide (within tol) or are
// separated by some g, which would contradict expansivity with A >= E^2.
UniquenessCertificate shadow_uniqueness(const Point& y1, const Point& y2, const Action& phi,
                                        const MetricEntourage& a, std::size_t radius,
                                        double tol = 0);

}  // namespace shadowkit
