#include "shadowkit/shadowing.hpp"

#include <algorithm>
#include <cmath>

#include "shadowkit/errors.hpp"
#include "shadowkit/parallel.hpp"

namespace shadowkit {

const char* to_string(ShadowMethod m) {
  return m == ShadowMethod::ClosedForm ? "closed_form" : "brute_force";
}

const char* to_string(UniquenessCertificate::Status s) {
  switch (s) {
    case UniquenessCertificate::Status::Coincide: return "coincide";
    case UniquenessCertificate::Status::Separated: return "separated";
    case UniquenessCertificate::Status::Inconclusive: return "inconclusive";
  }
  return "?";
}

namespace {

std::vector<ElementMap> compile_ball(const PseudoOrbit& po, const Action& phi) {
  phi.require_generators(po.generators());
  if (po.dimension() != phi.dimension()) throw InputError("pseudo-orbit dimension mismatch");
  std::vector<ElementMap> maps;
  maps.reserve(po.size());
  for (const GroupElement& g : po.ball->elements()) maps.push_back(phi.compile(g));
  return maps;
}

// max_g distance(x_g, Phi_g y), abandoning the scan once it exceeds cutoff.
double objective(const PseudoOrbit& po, const Action& phi, const std::vector<ElementMap>& maps,
                 const Point& y, double cutoff) {
  double worst = 0;
  for (std::size_t i = 0; i < maps.size(); ++i) {
    worst = std::max(worst, distance(po.points[i], phi.apply(maps[i], y)));
    if (worst > cutoff) break;
  }
  return worst;
}

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

double expansion_floor(const Action& phi) {
  if (!phi.all_diagonal()) return kInf;
  double lambda_min = kInf;
  for (std::size_t c = 0; c < phi.dimension(); ++c) {
    double best = kInf;
    for (const auto& m : phi.maps()) {
      const double l = std::abs(std::get<DiagonalLinear>(m).scale[c]);
      if (l > 1) best = std::min(best, l);
    }
    if (!std::isfinite(best)) return kInf;
    lambda_min = std::min(lambda_min, best);
  }
  return lambda_min;
}

double tracing_radius(const PseudoOrbit& po, const Action& phi, const Point& y) {
  return objective(po, phi, compile_ball(po, phi), y, kInf);
}

ShadowResult shadow_diagonal_linear(const PseudoOrbit& po, const Action& phi) {
  if (!phi.all_diagonal()) throw Unsupported("closed-form shadowing needs diagonal-linear maps");
  const auto maps = compile_ball(po, phi);
  const std::size_t n = phi.dimension();
  ShadowResult res;
  res.method = ShadowMethod::ClosedForm;
  res.point.assign(n, 0.0);
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t hi = 0, lo = 0;
    for (std::size_t i = 1; i < maps.size(); ++i) {
      if (std::abs(maps[i].scale[c]) > std::abs(maps[hi].scale[c])) hi = i;
      if (std::abs(maps[i].scale[c]) < std::abs(maps[lo].scale[c])) lo = i;
    }
    std::size_t pick;
    if (std::abs(maps[hi].scale[c]) > 1) {
      pick = hi;
    } else if (std::abs(maps[lo].scale[c]) < 1) {
      pick = lo;
    } else {
      throw SolverError("coordinate " + std::to_string(c) +
                        " has no expanding or contracting element in the ball; use the "
                        "brute-force solver");
    }
    res.point[c] = po.points[pick][c] / maps[pick].scale[c];
  }
  res.tracing_radius = objective(po, phi, maps, res.point, kInf);

  const double lambda_min = expansion_floor(phi);
  if (std::isfinite(lambda_min)) res.derived_bound = po.declared_epsilon / (lambda_min - 1);
  return res;
}

ShadowResult shadow_generic(const PseudoOrbit& po, const Action& phi, const Box& search_box,
                            const GridSpec& grid) {
  const auto maps = compile_ball(po, phi);
  const std::size_t n = phi.dimension();
  if (search_box.dimension() != n) throw InputError("search box dimension mismatch");
  if (grid.cells == 0 || grid.rounds == 0 || !(grid.factor > 1)) {
    throw InputError("grid needs cells >= 1, rounds >= 1 and factor > 1");
  }
  double points = 1;
  for (std::size_t i = 0; i < n; ++i) points *= static_cast<double>(grid.cells);
  if (points > 1e8) throw ResourceError("grid has more than 1e8 points per round");

  std::vector<double> olo(n), ohi(n), lo(n), hi(n);
  for (std::size_t i = 0; i < n; ++i) {
    olo[i] = lo[i] = search_box.axes[i].lo();
    ohi[i] = hi[i] = search_box.axes[i].hi();
  }
  Point best = search_box.center();
  double best_f = objective(po, phi, maps, best, kInf);
  double final_cell = 0;
  std::vector<std::size_t> idx(n);
  Point y(n);
  for (std::size_t round = 0; round < grid.rounds; ++round) {
    std::vector<double> cell(n);
    final_cell = 0;
    for (std::size_t i = 0; i < n; ++i) {
      cell[i] = (hi[i] - lo[i]) / static_cast<double>(grid.cells);
      final_cell = std::max(final_cell, cell[i]);
    }
    std::fill(idx.begin(), idx.end(), 0);
    Point round_best;
    double round_f = kInf;
    for (;;) {
      for (std::size_t i = 0; i < n; ++i) {
        y[i] = lo[i] + (static_cast<double>(idx[i]) + 0.5) * cell[i];
      }
      const double f = objective(po, phi, maps, y, round_f);
      if (f < round_f) {
        round_f = f;
        round_best = y;
      }
      std::size_t k = 0;
      while (k < n && ++idx[k] == grid.cells) idx[k++] = 0;
      if (k == n) break;
    }
    if (round_f < best_f) {
      best_f = round_f;
      best = round_best;
    }
    for (std::size_t i = 0; i < n; ++i) {
      const double width = (hi[i] - lo[i]) / grid.factor;
      double a = best[i] - width / 2;
      a = std::clamp(a, olo[i], std::max(olo[i], ohi[i] - width));
      lo[i] = a;
      hi[i] = std::min(ohi[i], a + width);
    }
  }
  ShadowResult res;
  res.method = ShadowMethod::BruteForce;
  res.point = best;
  res.tracing_radius = best_f;
  res.final_cell = final_cell;
  for (std::size_t i = 0; i < n; ++i) {
    if (ohi[i] > olo[i] && (best[i] - olo[i] <= final_cell || ohi[i] - best[i] <= final_cell)) {
      res.boundary_warning = true;
    }
  }
  return res;
}

Box default_search_box(const PseudoOrbit& po, const Action& phi) {
  const auto maps = compile_ball(po, phi);
  const GeneratingSet& s = po.generators();
  const CayleyBall& ball = *po.ball;
  double r = objective(po, phi, maps, po.base(), kInf);
  const std::size_t first = ball.radius() == 0 ? 0 : ball.prefix_size(ball.radius() - 1);
  for (std::size_t i = first; i < ball.size(); ++i) {
    const Point c = phi.evaluate_word(ball.element(i).inverse_word(s), po.points[i]);
    r = std::min(r, objective(po, phi, maps, c, r));
  }
  Box b;
  for (double v : po.base()) b.axes.push_back({v, 1.25 * r});
  return b;
}

ShadowResult shadow(const PseudoOrbit& po, const Action& phi, const GridSpec& grid) {
  if (phi.all_diagonal()) return shadow_diagonal_linear(po, phi);
  return shadow_generic(po, phi, default_search_box(po, phi), grid);
}

PersistenceReport check_persistence(const Action& phi, const Action& psi,
                                    std::shared_ptr<const CayleyBall> ball,
                                    const std::vector<Point>& samples, const MetricEntourage& e,
                                    const GridSpec& grid, unsigned jobs) {
  PersistenceReport rep;
  rep.epsilon = e.epsilon();
  rep.declared = generator_distance_bound(psi, phi);
  rep.rows.resize(samples.size());
  parallel_for(samples.size(), jobs, [&](std::size_t i) {
    PseudoOrbit po = orbit_of_nearby_action(psi, ball, samples[i], phi);
    ShadowResult r = shadow(po, phi, grid);
    rep.rows[i] = PersistenceRow{samples[i], r.point, r.tracing_radius,
                                 r.tracing_radius <= e.epsilon()};
  });
  for (const auto& row : rep.rows) {
    rep.max_radius = std::max(rep.max_radius, row.radius);
    if (row.pass) ++rep.passed;
  }
  return rep;
}

UniquenessCertificate shadow_uniqueness(const Point& y1, const Point& y2, const Action& phi,
                                        const MetricEntourage& a, std::size_t radius,
                                        double tol) {
  UniquenessCertificate cert;
  cert.gap = distance(y1, y2);
  if (cert.gap <= tol || cert.gap == 0) {
    cert.status = UniquenessCertificate::Status::Coincide;
    return cert;
  }
  SeparationResult sep = separation_search(phi, y1, y2, a, radius);
  if (sep.found()) {
    cert.status = UniquenessCertificate::Status::Separated;
    cert.separation = sep.certificate;
  }
  return cert;
}

}  // namespace shadowkit
