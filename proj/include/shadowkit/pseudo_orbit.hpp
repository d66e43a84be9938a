#pragma once

// Finite pseudo-orbits over Cayley balls.  Points are stored in the ball's
// element order, so points[0] is x_e.

#include <cstdint>
#include <memory>
#include <vector>

#include "shadowkit/action.hpp"
#include "shadowkit/group.hpp"
#include "shadowkit/uniformity.hpp"

namespace shadowkit {

struct PseudoOrbit {
  std::shared_ptr<const CayleyBall> ball;
  std::vector<Point> points;
  double declared_epsilon = 0;
  double realized_epsilon = 0;

  std::size_t size() const { return points.size(); }
  std::size_t dimension() const { return points.empty() ? 0 : points.front().size(); }
  const Point& base() const { return points.front(); }
  const GeneratingSet& generators() const { return ball->generators(); }

  bool passes_through(const BoxSet& b) const { return b.contains_point(base()); }
  // realized <= declared, allowing `slack` for rounding in the orbit itself.
  bool valid(double slack = 0) const { return realized_epsilon <= declared_epsilon + slack; }

  // Per-coordinate bounding box of all points.
  Box bounding_box() const;
};

// max over edges (g, sg) of distance(x_{sg}, Phi_s(x_g)).
double edge_defect(const PseudoOrbit& po, const Action& phi);

// Fills realized_epsilon from the edge scan; returns po.valid(slack).
bool validate(PseudoOrbit& po, const Action& phi, double slack = 0);

PseudoOrbit true_orbit(const Action& phi, std::shared_ptr<const CayleyBall> ball,
                       const Point& x);

// x_g = Phi_g(x) + noise_g, noise coordinates uniform in [-eta, eta].  The
// declared epsilon is eta * (1 + L) with L the largest generator Lipschitz
// constant.
PseudoOrbit perturbed_orbit(const Action& phi, std::shared_ptr<const CayleyBall> ball,
                            const Point& x, double eta, std::uint64_t seed);

// x_g = Psi_g(x), viewed as a pseudo-orbit of phi.  The declared epsilon is
// the analytic generator distance between the two actions.
PseudoOrbit orbit_of_nearby_action(const Action& psi, std::shared_ptr<const CayleyBall> ball,
                                   const Point& x, const Action& phi);

struct Conversion {
  PseudoOrbit orbit;      // over the S-ball
  std::size_t m = 0;      // max_{s in S} l_T(s)
  double lipschitz = 0;   // max generator Lipschitz constant of phi over T
};

// Restricts a pseudo-orbit built over the T-ball to the S-ball of radius
// `radius`.  If every T-edge defect is at most eps, every S-edge defect is at
// most eps * (1 + L + ... + L^(m-1)): walk s = t_1 ... t_m one letter at a
// time and push each defect through the remaining Phi_t maps.  `phi` may be
// given over either set; it is regenerated as needed.
Conversion convert_generating_set(const PseudoOrbit& po, const GeneratingSet& s,
                                  std::size_t radius, const Action& phi);

// Image of a pseudo-orbit under a coordinate change h, validated against the
// conjugated action h Phi h^-1.  Declared epsilon scales by Lip(h).
PseudoOrbit transport(const PseudoOrbit& po, const DiagonalChange& h, const Action& phi);

}  // namespace shadowkit
