#include "shadowkit/stability.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "shadowkit/errors.hpp"
#include "shadowkit/parallel.hpp"

namespace shadowkit {

// ---------------------------------------------------------------- semiconjugacy

ShadowResult semiconjugacy_at(const Action& phi, const Action& psi,
                              std::shared_ptr<const CayleyBall> ball, const Point& x,
                              const GridSpec& grid) {
  PseudoOrbit po = orbit_of_nearby_action(psi, std::move(ball), x, phi);
  return shadow(po, phi, grid);
}

SemiconjugacyTable build_semiconjugacy(const Action& phi, const Action& psi,
                                       std::shared_ptr<const CayleyBall> ball,
                                       const MetricEntourage& e, const std::vector<Point>& samples,
                                       const GridSpec& grid, unsigned jobs) {
  if (samples.empty()) throw InputError("semiconjugacy needs at least one sample");
  SemiconjugacyTable table;
  table.ball = ball;
  table.epsilon = e.epsilon();
  table.rows.resize(samples.size());
  parallel_for(samples.size(), jobs, [&](std::size_t i) {
    SemiconjugacyRow& row = table.rows[i];
    row.x = samples[i];
    try {
      ShadowResult r = semiconjugacy_at(phi, psi, ball, samples[i], grid);
      row.fx = r.point;
      row.radius = r.tracing_radius;
      row.solved = true;
      row.pass = distance(row.x, row.fx) <= e.epsilon();
    } catch (const SolverError& err) {
      row.error = err.what();
    } catch (const NumericError& err) {
      row.error = err.what();
    }
  });
  return table;
}

SemiconjugacyReport verify_semiconjugacy(SemiconjugacyTable& table, const Action& phi,
                                         const Action& psi,
                                         const std::vector<GroupElement>& test_elements,
                                         double tol, const GridSpec& grid,
                                         double continuity_delta, unsigned jobs) {
  const GeneratingSet& s = phi.generators();
  table.tested.clear();
  for (const auto& h : test_elements) table.tested.push_back(s.format_word(h.word));
  table.tolerance = tol;
  const std::size_t nh = test_elements.size();
  std::vector<std::vector<double>> per(table.rows.size(), std::vector<double>(nh, 0.0));
  std::vector<double> cont(table.rows.size(), 0.0);

  parallel_for(table.rows.size(), jobs, [&](std::size_t i) {
    SemiconjugacyRow& row = table.rows[i];
    if (!row.solved) return;
    for (std::size_t k = 0; k < nh; ++k) {
      const Point xh = psi.evaluate(test_elements[k], row.x);
      const Point lhs = semiconjugacy_at(phi, psi, table.ball, xh, grid).point;
      const Point rhs = phi.evaluate(test_elements[k], row.fx);
      per[i][k] = distance(lhs, rhs);
    }
    row.residual = nh ? *std::max_element(per[i].begin(), per[i].end()) : 0.0;
    if (continuity_delta > 0) {
      Point xp = row.x;
      for (double& v : xp) v += continuity_delta;
      cont[i] = distance(semiconjugacy_at(phi, psi, table.ball, xp, grid).point, row.fx);
    }
  });

  SemiconjugacyReport rep;
  rep.continuity_delta = continuity_delta;
  table.residual_by_element.assign(nh, 0.0);
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    if (!row.solved) {
      ++rep.unsolved;
      continue;
    }
    for (std::size_t k = 0; k < nh; ++k) {
      table.residual_by_element[k] = std::max(table.residual_by_element[k], per[i][k]);
    }
    rep.max_residual = std::max(rep.max_residual, row.residual);
    rep.max_displacement = std::max(rep.max_displacement, distance(row.x, row.fx));
    rep.continuity_modulus = std::max(rep.continuity_modulus, cont[i]);
  }
  table.verified = true;
  rep.passed = rep.unsolved == 0 && rep.max_residual <= tol &&
               rep.max_displacement <= table.epsilon;
  return rep;
}

// ---------------------------------------------------------------- H windows

std::optional<std::size_t> HWindow::deepest_nonempty() const {
  for (std::size_t k = boxes.size(); k-- > 0;) {
    if (!boxes[k].empty()) return k;
  }
  return std::nullopt;
}

namespace {

void check_radii(const std::vector<std::size_t>& radii) {
  if (radii.empty()) throw InputError("need at least one window radius");
  for (std::size_t k = 1; k < radii.size(); ++k) {
    if (radii[k] <= radii[k - 1]) throw InputError("window radii must be strictly increasing");
  }
}

// Word evaluated for Psi_g(Psi_h x): the reduced product g h.
std::vector<std::size_t> shifted_word(const GroupElement& g, const std::vector<std::size_t>& h,
                                      const GeneratingSet& s) {
  if (h.empty()) return g.word;
  std::vector<std::size_t> w = g.word;
  w.insert(w.end(), h.begin(), h.end());
  return reduce(w, s).word;
}

}  // namespace

HWindow build_H_window_at(const Action& phi, const Action& psi, const MetricEntourage& e_prime,
                          const Point& x, const GroupElement& h,
                          const std::vector<std::size_t>& radii) {
  if (!phi.all_diagonal()) throw Unsupported("H windows need a diagonal-linear action");
  phi.require_generators(psi.generators());
  if (x.size() != phi.dimension()) throw InputError("point dimension does not match action");
  check_radii(radii);
  const GeneratingSet& s = phi.generators();

  HWindow hw;
  hw.origin = x;
  hw.shift = h.word;
  hw.base = psi.evaluate_word(h.word, x);
  hw.epsilon = e_prime.epsilon();
  hw.radii = radii;

  auto ball = CayleyBall::build(s, radii.back());
  BoxSet running(phi.dimension());
  std::size_t next = 0;
  for (std::size_t i = 0; i < ball->size(); ++i) {
    while (next < radii.size() && radii[next] < ball->length(i)) {
      hw.boxes.push_back(running);
      ++next;
    }
    const GroupElement& g = ball->element(i);
    const Point p = psi.evaluate_word(shifted_word(g, hw.shift, s), x);
    BoxSet c = linear_image(cross_section(e_prime, p), phi.composite_scale(g.inverse_word(s)));
    if (i == 0) {
      running = std::move(c);
    } else if (!running.empty()) {
      running = intersect(running, c);
    }
  }
  while (next < radii.size()) {
    hw.boxes.push_back(running);
    ++next;
  }
  return hw;
}

HWindow build_H_window(const Action& phi, const Action& psi, const MetricEntourage& e_prime,
                       const Point& x, const std::vector<std::size_t>& radii) {
  return build_H_window_at(phi, psi, e_prime, x, GroupElement{{}, phi.family().identity()},
                           radii);
}

HReport verify_H_properties(const Action& phi, const Action& psi, const MetricEntourage& e_prime,
                            const MetricEntourage& e, const Point& x, const GroupElement& h,
                            const std::vector<std::size_t>& radii, const LebesgueMeasure& mu) {
  HReport rep;
  rep.window = build_H_window(phi, psi, e_prime, x, radii);
  const auto& boxes = rep.window.boxes;

  for (std::size_t k = 0; k + 1 < boxes.size(); ++k) {
    if (!boxes[k].includes(boxes[k + 1])) {
      rep.nested = false;
      ++rep.nesting_violations;
    }
  }
  for (std::size_t k = 0; k < boxes.size(); ++k) {
    rep.volumes.push_back(mu.measure(boxes[k]));
    if (boxes[k].empty() && !rep.first_empty) rep.first_empty = radii[k];
  }
  for (std::size_t k = 1; k < boxes.size(); ++k) {
    if (boxes[k].empty()) break;
    rep.ratios.push_back(rep.volumes[k] / rep.volumes[k - 1]);
    if (!(rep.volumes[k] < rep.volumes[k - 1])) rep.decaying = false;
  }

  const BoxSet ex = cross_section(e, x);
  for (const BoxSet& b : boxes) {
    if (!ex.includes(b)) rep.near_identity = false;
  }

  const GeneratingSet& s = phi.generators();
  rep.h_length = word_length(h.normal_form, s);
  const std::size_t l = rep.h_length;
  std::set<std::size_t> needed;
  for (std::size_t m : radii) {
    if (m >= l) {
      needed.insert(m - l);
      needed.insert(m + l);
    }
  }
  if (!needed.empty()) {
    std::vector<std::size_t> rs(needed.begin(), needed.end());
    HWindow shifted = build_H_window_at(phi, psi, e_prime, x, h, rs);
    auto at = [&](std::size_t r) -> const BoxSet& {
      return shifted.boxes[std::lower_bound(rs.begin(), rs.end(), r) - rs.begin()];
    };
    const auto scale_h = phi.composite_scale(h.word);
    for (std::size_t k = 0; k < radii.size(); ++k) {
      const std::size_t m = radii[k];
      if (m < l) continue;
      const BoxSet image = linear_image(boxes[k], scale_h);
      SandwichRow row{m, image.includes(at(m + l)), at(m - l).includes(image)};
      if (!row.inner || !row.outer) rep.sandwich_ok = false;
      rep.sandwich.push_back(row);
    }
  }
  rep.passed = rep.nested && rep.decaying && rep.sandwich_ok && rep.near_identity;
  return rep;
}

std::vector<UscRow> usc_modulus(const Action& phi, const Action& psi,
                                const MetricEntourage& e_prime, const Point& x, std::size_t m,
                                const std::vector<double>& deltas) {
  const HWindow here = build_H_window(phi, psi, e_prime, x, {m});
  const auto hull = here.boxes.front().hull();
  std::vector<UscRow> out;
  for (double delta : deltas) {
    UscRow row{delta, 0.0};
    for (double sign : {1.0, -1.0}) {
      Point xp = x;
      for (double& v : xp) v += sign * delta;
      const auto other = build_H_window(phi, psi, e_prime, xp, {m}).boxes.front().hull();
      if (!other) continue;
      if (!hull) {
        row.rho = std::numeric_limits<double>::infinity();
        continue;
      }
      for (std::size_t i = 0; i < x.size(); ++i) {
        row.rho = std::max({row.rho, hull->axes[i].lo() - other->axes[i].lo(),
                            other->axes[i].hi() - hull->axes[i].hi()});
      }
    }
    out.push_back(row);
  }
  return out;
}

SingletonReport singleton_H_from_map(const SemiconjugacyTable& table, const LebesgueMeasure& mu,
                                     const MetricEntourage& e) {
  SingletonReport rep;
  rep.domain = rep.null_values = rep.near_identity = true;
  rep.equivariant = table.verified;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    bool ok = true;
    if (!row.solved) {
      rep.domain = false;
      ok = false;
    } else {
      Box point;
      for (double v : row.fx) point.axes.push_back({v, 0.0});
      if (mu.measure(BoxSet(point)) != 0) {
        rep.null_values = false;
        ok = false;
      }
      if (!e.contains(row.x, row.fx)) {
        rep.near_identity = false;
        ok = false;
      }
      if (!table.verified || !(row.residual <= table.tolerance)) {
        rep.equivariant = false;
        ok = false;
      }
    }
    if (!ok) rep.failing_rows.push_back(i);
  }
  return rep;
}

std::optional<PersistenceWitness> extract_persistence_witness(const HWindow& hw,
                                                              const Action& phi,
                                                              const Action& psi) {
  auto k = hw.deepest_nonempty();
  if (!k) return std::nullopt;
  const GeneratingSet& s = phi.generators();
  const Box& box = hw.boxes[*k].boxes().front();
  PersistenceWitness w;
  w.y = box.center();
  w.radius = hw.radii[*k];
  w.slack = box.max_half_width();
  auto ball = CayleyBall::build(s, w.radius);
  for (const GroupElement& g : ball->elements()) {
    const Point lhs = psi.evaluate_word(shifted_word(g, hw.shift, s), hw.origin);
    w.max_distance = std::max(w.max_distance, distance(lhs, phi.evaluate(g, w.y)));
  }
  w.audit_passed = w.max_distance <= hw.epsilon + w.slack;
  return w;
}

}  // namespace shadowkit
