#include "shadowkit/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "shadowkit/errors.hpp"
#include "shadowkit/expansivity.hpp"
#include "shadowkit/models.hpp"
#include "shadowkit/parallel.hpp"
#include "shadowkit/pseudo_orbit.hpp"
#include "shadowkit/random.hpp"
#include "shadowkit/shadowing.hpp"
#include "shadowkit/stability.hpp"

namespace shadowkit {

using nlohmann::json;

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

bool ExperimentResult::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

std::string ExperimentResult::detail_csv() const {
  std::ostringstream out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
    out << '\n';
  };
  line(csv_header);
  for (const auto& row : csv_rows) line(row);
  return out.str();
}

namespace {

json number_json(double v) {
  if (std::isfinite(v)) return v;
  return format_number(v);
}

}  // namespace

json ExperimentResult::summary() const {
  json checks_json = json::array();
  for (const auto& c : checks) {
    json cj = {{"name", c.name},
               {"passed", c.passed},
               {"value", number_json(c.value)},
               {"bound", number_json(c.bound)}};
    if (!c.note.empty()) cj["note"] = c.note;
    checks_json.push_back(cj);
  }
  return {{"experiment", config.experiment},
          {"model", config.model},
          {"passed", passed()},
          {"checks", checks_json},
          {"statistics", statistics},
          {"config", to_json(config)}};
}

void write_reports(const ExperimentResult& result, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const auto base = std::filesystem::path(dir);
  std::ofstream summary(base / "summary.json", std::ios::binary);
  if (!summary) throw InputError("cannot write to output directory '" + dir + "'");
  summary << result.summary().dump(2) << '\n';
  std::ofstream detail(base / "detail.csv", std::ios::binary);
  detail << result.detail_csv();
}

namespace {

// ---------------------------------------------------------------- context

struct Context {
  const ExperimentConfig& cfg;
  unsigned jobs;
  GeneratingSet genset;
  Action phi;
  std::optional<Action> psi;
  double psi_bound = 0;
  std::vector<Point> samples;
};

GeneratingSet config_generators(const ExperimentConfig& c) {
  const GroupFamily fam = model_family(c.model, c.params);
  const GeneratingSet standard = c.generator_names.empty()
                                     ? model_generators(c.model, c.params)
                                     : GeneratingSet::standard(fam, c.generator_names);
  return resolve_generators(fam, standard, c.generators);
}

// Independent streams for sample points and per-orbit noise.
constexpr std::uint64_t kSampleStream = 0x5a4d504c45ULL;
constexpr std::uint64_t kNoiseStream = 0x4e4f495345ULL;

std::vector<Point> draw_samples(const ExperimentConfig& c) {
  std::vector<Point> out;
  for (std::size_t i = 0; i < c.sample_count; ++i) {
    Rng rng = Rng::stream(c.seed ^ kSampleStream, i);
    Point x;
    for (auto [lo, hi] : c.sample_box) x.push_back(rng.uniform(lo, hi));
    out.push_back(std::move(x));
  }
  return out;
}

std::uint64_t noise_seed(const ExperimentConfig& c, std::size_t i) {
  return Rng::stream(c.seed ^ kNoiseStream, i).next();
}

Context make_context(const ExperimentConfig& c, unsigned jobs) {
  GeneratingSet s = config_generators(c);
  Action phi = model_action(c.model, c.params, s);
  Context ctx{c, jobs, s, phi, std::nullopt, 0.0, draw_samples(c)};
  if (c.perturbation) {
    PerturbedAction p = perturb_action(phi, *c.perturbation, c.seed);
    ctx.psi_bound = p.certified_bound;
    ctx.psi = std::move(p.action);
  }
  return ctx;
}

void push_point(std::vector<std::string>& row, const Point& p) {
  for (double v : p) row.push_back(format_number(v));
}

void point_header(std::vector<std::string>& header, const std::string& name, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) header.push_back(name + std::to_string(i));
}

Check check_max(std::string name, double value, double bound, std::string note = {}) {
  return Check{std::move(name), value <= bound, value, bound, std::move(note)};
}

ShadowResult solve(const Context& ctx, const PseudoOrbit& po, const Action& phi) {
  const std::string& solver = ctx.cfg.solver;
  if (solver == "brute_force" || (solver == "auto" && !phi.all_diagonal())) {
    return shadow_generic(po, phi, default_search_box(po, phi), ctx.cfg.oracle);
  }
  return shadow_diagonal_linear(po, phi);
}

void relation_check(ExperimentResult& res, const Context& ctx) {
  if (!ctx.psi) return;
  std::vector<Point> probe(ctx.samples.begin(),
                           ctx.samples.begin() + std::min<std::size_t>(ctx.samples.size(), 16));
  ActionReport rep = validate_action(*ctx.psi, probe, ctx.cfg.audit_tolerance);
  res.checks.push_back(check_max("psi_relation_defect",
                                 std::max(rep.relation_defect, rep.inverse_defect),
                                 ctx.cfg.audit_tolerance, "nearby action measured on a radius-3 ball"));
  res.statistics["psi_certified_distance"] = ctx.psi_bound;
}

// ---------------------------------------------------------------- shadowing

void run_shadowing(ExperimentResult& res, const Context& ctx) {
  const auto& c = ctx.cfg;
  const std::size_t n = ctx.phi.dimension();
  auto ball = CayleyBall::build(ctx.genset, c.ball_radius);
  const double eta = c.delta / (1 + ctx.phi.max_lipschitz());

  struct Row {
    PseudoOrbit po;
    ShadowResult main;
    std::optional<ShadowResult> oracle;
    double audit = 0;
  };
  std::vector<Row> rows(ctx.samples.size());
  parallel_for(rows.size(), ctx.jobs, [&](std::size_t i) {
    Row& r = rows[i];
    r.po = perturbed_orbit(ctx.phi, ball, ctx.samples[i], eta, noise_seed(c, i));
    r.main = solve(ctx, r.po, ctx.phi);
    r.audit = std::abs(tracing_radius(r.po, ctx.phi, r.main.point) - r.main.tracing_radius);
    if (c.oracle_enabled && r.main.method == ShadowMethod::ClosedForm) {
      r.oracle = shadow_generic(r.po, ctx.phi, default_search_box(r.po, ctx.phi), c.oracle);
    }
  });

  res.csv_header = {"index"};
  point_header(res.csv_header, "x", n);
  for (const char* h : {"declared_epsilon", "realized_epsilon", "method"}) res.csv_header.push_back(h);
  point_header(res.csv_header, "y", n);
  for (const char* h : {"tracing_radius", "bound", "derived_bound", "oracle_radius", "oracle_gap",
                        "boundary_warning", "pass"}) {
    res.csv_header.push_back(h);
  }

  double worst_valid = -std::numeric_limits<double>::infinity(), worst_ratio = 0, worst_derived = 0, worst_gap = 0,
         worst_audit = 0, max_radius = 0, sum_radius = 0;
  std::size_t warnings = 0, passed = 0;
  bool have_derived = false;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Row& r = rows[i];
    const double bound = c.bound_factor * r.po.declared_epsilon;
    const double gap = r.oracle ? distance(r.oracle->point, r.main.point) : 0.0;
    const bool has_derived = std::isfinite(r.main.derived_bound);
    bool ok = r.po.valid(c.audit_tolerance) && r.main.tracing_radius <= bound &&
              (!has_derived || r.main.tracing_radius <= r.main.derived_bound) &&
              gap <= c.oracle_tolerance && r.audit == 0;
    worst_valid = std::max(worst_valid, r.po.realized_epsilon - r.po.declared_epsilon);
    worst_ratio = std::max(worst_ratio, r.main.tracing_radius / bound);
    if (has_derived) {
      have_derived = true;
      worst_derived = std::max(worst_derived, r.main.tracing_radius / r.main.derived_bound);
    }
    worst_gap = std::max(worst_gap, gap);
    worst_audit = std::max(worst_audit, r.audit);
    max_radius = std::max(max_radius, r.main.tracing_radius);
    sum_radius += r.main.tracing_radius;
    if (r.main.boundary_warning || (r.oracle && r.oracle->boundary_warning)) ++warnings;
    if (ok) ++passed;

    std::vector<std::string> row{std::to_string(i)};
    push_point(row, ctx.samples[i]);
    row.push_back(format_number(r.po.declared_epsilon));
    row.push_back(format_number(r.po.realized_epsilon));
    row.push_back(to_string(r.main.method));
    push_point(row, r.main.point);
    row.push_back(format_number(r.main.tracing_radius));
    row.push_back(format_number(bound));
    row.push_back(format_number(r.main.derived_bound));
    row.push_back(r.oracle ? format_number(r.oracle->tracing_radius) : "");
    row.push_back(r.oracle ? format_number(gap) : "");
    row.push_back((r.main.boundary_warning || (r.oracle && r.oracle->boundary_warning)) ? "1" : "0");
    row.push_back(ok ? "1" : "0");
    res.csv_rows.push_back(std::move(row));
  }
  res.checks.push_back(check_max("pseudo_orbits_valid", worst_valid, c.audit_tolerance,
                                 "max realized minus declared epsilon"));
  res.checks.push_back(check_max("tracing_radius_within_bound", worst_ratio, 1.0,
                                 "max radius / (bound_factor * declared epsilon)"));
  if (have_derived) {
    res.checks.push_back(check_max("tracing_radius_within_derived_bound", worst_derived, 1.0,
                                   "max radius / (declared / (lambda_min - 1))"));
  }
  if (c.oracle_enabled && rows.front().oracle) {
    res.checks.push_back(check_max("oracle_agreement", worst_gap, c.oracle_tolerance,
                                   "max |y_closed_form - y_brute_force|"));
  }
  res.checks.push_back(check_max("solver_audit", worst_audit, 0.0, "recomputed radius mismatch"));
  res.statistics = {{"orbits", rows.size()},
                    {"ball_radius", c.ball_radius},
                    {"ball_size", ball->size()},
                    {"noise_eta", eta},
                    {"max_tracing_radius", max_radius},
                    {"mean_tracing_radius", sum_radius / static_cast<double>(rows.size())},
                    {"pass_rate", static_cast<double>(passed) / static_cast<double>(rows.size())},
                    {"boundary_warnings", warnings}};
}

// ---------------------------------------------------------------- persistence

void run_persistence(ExperimentResult& res, const Context& ctx) {
  const auto& c = ctx.cfg;
  const std::size_t n = ctx.phi.dimension();
  auto ball = CayleyBall::build(ctx.genset, c.ball_radius);
  relation_check(res, ctx);
  PersistenceReport rep = check_persistence(ctx.phi, *ctx.psi, ball, ctx.samples,
                                            MetricEntourage(c.epsilon_e), c.oracle, ctx.jobs);
  res.csv_header = {"index"};
  point_header(res.csv_header, "x", n);
  point_header(res.csv_header, "y", n);
  res.csv_header.push_back("tracing_radius");
  res.csv_header.push_back("pass");
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    std::vector<std::string> row{std::to_string(i)};
    push_point(row, rep.rows[i].x);
    push_point(row, rep.rows[i].y);
    row.push_back(format_number(rep.rows[i].radius));
    row.push_back(rep.rows[i].pass ? "1" : "0");
    res.csv_rows.push_back(std::move(row));
  }
  res.checks.push_back(Check{"all_orbits_traced", rep.all_pass(),
                             static_cast<double>(rep.passed), static_cast<double>(rep.rows.size()),
                             "samples whose nearby orbit is traced within epsilon_e"});
  res.statistics["max_tracing_radius"] = rep.max_radius;
  res.statistics["epsilon_e"] = rep.epsilon;
  res.statistics["samples"] = rep.rows.size();
}

// ---------------------------------------------------------------- expansivity

// Smallest n with |lambda|^n * gap > eps for a rank-one diagonal action,
// computed by direct iteration.
std::optional<std::size_t> rank_one_minimum(const Context& ctx, double gap) {
  if (ctx.genset.size() != 2 || ctx.phi.dimension() != 1 || !ctx.phi.all_diagonal()) {
    return std::nullopt;
  }
  double l = std::abs(std::get<DiagonalLinear>(ctx.phi.map(0)).scale[0]);
  if (l < 1) l = 1 / l;
  if (!(l > 1)) return std::nullopt;
  std::size_t k = 0;
  for (double v = gap; v <= ctx.cfg.epsilon_d; v *= l) ++k;
  return k;
}

void run_expansivity(ExperimentResult& res, const Context& ctx) {
  const auto& c = ctx.cfg;
  const std::size_t n = ctx.phi.dimension();
  const MetricEntourage d(c.epsilon_d);
  struct Row {
    Point y;
    SeparationResult sep;
    std::optional<std::size_t> expected;
  };
  std::vector<Row> rows(ctx.samples.size());
  parallel_for(rows.size(), ctx.jobs, [&](std::size_t i) {
    Rng rng(noise_seed(c, i));
    Point y = ctx.samples[i];
    do {
      for (std::size_t k = 0; k < n; ++k) y[k] = ctx.samples[i][k] + rng.uniform(-*c.max_offset, *c.max_offset);
    } while (distance(y, ctx.samples[i]) == 0);
    rows[i].sep = separation_search(ctx.phi, ctx.samples[i], y, d, c.search_radius);
    rows[i].expected = rank_one_minimum(ctx, distance(ctx.samples[i], y));
    rows[i].y = std::move(y);
  });
  res.csv_header = {"index"};
  point_header(res.csv_header, "x", n);
  point_header(res.csv_header, "y", n);
  for (const char* h : {"gap", "found", "element", "length", "expected_length", "distance", "pass"}) {
    res.csv_header.push_back(h);
  }
  std::size_t found = 0, matched = 0, comparable = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Row& r = rows[i];
    const auto& cert = r.sep.certificate;
    const bool match = !r.expected || (cert && cert->length == *r.expected);
    if (cert) ++found;
    if (r.expected) {
      ++comparable;
      if (match) ++matched;
    }
    std::vector<std::string> row{std::to_string(i)};
    push_point(row, ctx.samples[i]);
    push_point(row, r.y);
    row.push_back(format_number(distance(ctx.samples[i], r.y)));
    row.push_back(cert ? "1" : "0");
    row.push_back(cert ? ctx.genset.format_word(cert->g.word) : "");
    row.push_back(cert ? std::to_string(cert->length) : "");
    row.push_back(r.expected ? std::to_string(*r.expected) : "");
    row.push_back(cert ? format_number(cert->distance) : "");
    row.push_back(cert && match ? "1" : "0");
    res.csv_rows.push_back(std::move(row));
  }
  res.checks.push_back(Check{"all_pairs_separated", found == rows.size(),
                             static_cast<double>(found), static_cast<double>(rows.size()),
                             "pairs separated within the search radius"});
  if (comparable) {
    res.checks.push_back(Check{"separation_length_matches_analytic", matched == comparable,
                               static_cast<double>(matched), static_cast<double>(comparable),
                               "rank-one model: length equals the smallest n with lambda^n gap > eps"});
  }
  res.statistics = {{"pairs", rows.size()},
                    {"search_radius", c.search_radius},
                    {"analytic_expansive_flag", analytic_expansive(ctx.phi)}};
}

void run_mu_expansivity(ExperimentResult& res, const Context& ctx) {
  const auto& c = ctx.cfg;
  const std::size_t n = ctx.phi.dimension();
  MuExpansivityReport rep =
      mu_expansivity_report(ctx.phi, MetricEntourage(c.epsilon_d), ctx.samples, c.radii,
                            LebesgueMeasure(n), c.volume_threshold);
  res.csv_header = {"index"};
  point_header(res.csv_header, "x", n);
  res.csv_header.push_back("radius");
  res.csv_header.push_back("volume");
  for (std::size_t i = 0; i < ctx.samples.size(); ++i) {
    for (std::size_t k = 0; k < c.radii.size(); ++k) {
      std::vector<std::string> row{std::to_string(i)};
      push_point(row, ctx.samples[i]);
      row.push_back(std::to_string(c.radii[k]));
      row.push_back(format_number(rep.volumes[i][k]));
      res.csv_rows.push_back(std::move(row));
    }
  }
  res.checks.push_back(Check{"volumes_strictly_decreasing", rep.strictly_decreasing, 0, 0, ""});
  res.checks.push_back(check_max("final_volume_below_threshold", rep.volumes.front().back(),
                                 c.volume_threshold));
  res.checks.back().passed = rep.below_threshold;
  if (c.expected_ratio) {
    double worst = 0;
    for (double r : rep.ratios) worst = std::max(worst, std::abs(r - *c.expected_ratio));
    res.checks.push_back(check_max("volume_ratio_matches_expected", worst, c.ratio_tolerance,
                                   "max |ratio - expected_ratio|"));
  }
  res.statistics = {{"ratios", rep.ratios},
                    {"samples_agree", rep.samples_agree},
                    {"analytic_expansive_flag", rep.analytic_flag}};
}

// ---------------------------------------------------------------- stability

std::vector<GroupElement> parse_elements(const GeneratingSet& s,
                                         const std::vector<std::string>& words) {
  std::vector<GroupElement> out;
  for (const auto& w : words) out.push_back(reduce(w, s));
  return out;
}

void run_stability(ExperimentResult& res, const Context& ctx) {
  const auto& c = ctx.cfg;
  const std::size_t n = ctx.phi.dimension();
  auto ball = CayleyBall::build(ctx.genset, c.ball_radius);
  relation_check(res, ctx);
  const MetricEntourage e(c.epsilon_e);
  SemiconjugacyTable table =
      build_semiconjugacy(ctx.phi, *ctx.psi, ball, e, ctx.samples, c.oracle, ctx.jobs);
  SemiconjugacyReport rep =
      verify_semiconjugacy(table, ctx.phi, *ctx.psi, parse_elements(ctx.genset, c.test_elements),
                           c.equivariance_tolerance, c.oracle, c.continuity_delta, ctx.jobs);
  SingletonReport single = singleton_H_from_map(table, LebesgueMeasure(n), e);

  res.csv_header = {"index"};
  point_header(res.csv_header, "x", n);
  point_header(res.csv_header, "fx", n);
  for (const char* h : {"displacement", "tracing_radius", "residual", "solved", "pass"}) {
    res.csv_header.push_back(h);
  }
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& r = table.rows[i];
    std::vector<std::string> row{std::to_string(i)};
    push_point(row, r.x);
    if (r.solved) {
      push_point(row, r.fx);
    } else {
      row.insert(row.end(), n, "");
    }
    row.push_back(r.solved ? format_number(distance(r.x, r.fx)) : "");
    row.push_back(format_number(r.radius));
    row.push_back(format_number(r.residual));
    row.push_back(r.solved ? "1" : "0");
    row.push_back(r.pass && r.residual <= c.equivariance_tolerance ? "1" : "0");
    res.csv_rows.push_back(std::move(row));
  }
  res.checks.push_back(Check{"all_rows_solved", rep.unsolved == 0, static_cast<double>(rep.unsolved),
                             0, "samples without a shadow"});
  res.checks.push_back(check_max("displacement_within_epsilon_e", rep.max_displacement, c.epsilon_e,
                                 "sup |x - f(x)|"));
  const double lambda_min = expansion_floor(ctx.phi);
  if (std::isfinite(lambda_min)) {
    res.checks.push_back(check_max("displacement_within_derived_bound", rep.max_displacement,
                                   ctx.psi_bound / (lambda_min - 1),
                                   "certified distance / (lambda_min - 1)"));
  }
  res.checks.push_back(check_max("equivariance_residual", rep.max_residual,
                                 c.equivariance_tolerance, "max |f(Psi_h x) - Phi_h f(x)|"));
  res.checks.push_back(check_max("continuity_modulus", rep.continuity_modulus, c.continuity_bound,
                                 "max |f(x) - f(x + delta)|"));
  res.checks.push_back(Check{"singleton_H_conditions", single.passed(),
                             static_cast<double>(single.failing_rows.size()), 0,
                             "domain, null values, near identity, equivariance"});
  res.checks.push_back(Check{"implication_semiconjugacy_to_singleton_H",
                             !rep.passed || single.passed(), 0, 0,
                             "verified semiconjugacy implies the singleton set-valued map passes"});
  json residuals = json::object();
  for (std::size_t k = 0; k < table.tested.size(); ++k) {
    residuals[table.tested[k]] = table.residual_by_element[k];
  }
  res.statistics = {{"samples", table.rows.size()},
                    {"ball_radius", c.ball_radius},
                    {"max_displacement", rep.max_displacement},
                    {"max_residual", rep.max_residual},
                    {"residual_by_element", residuals},
                    {"continuity_delta", rep.continuity_delta},
                    {"continuity_modulus", rep.continuity_modulus},
                    {"singleton", {{"domain", single.domain},
                                   {"null_values", single.null_values},
                                   {"near_identity", single.near_identity},
                                   {"equivariant", single.equivariant}}},
                    {"psi_certified_distance", ctx.psi_bound}};
}

void run_mu_stability(ExperimentResult& res, const Context& ctx) {
  const auto& c = ctx.cfg;
  const std::size_t n = ctx.phi.dimension();
  relation_check(res, ctx);
  const MetricEntourage e(c.epsilon_e), ep(c.epsilon_e_prime);
  const LebesgueMeasure mu(n);
  const GroupElement h = reduce(c.h, ctx.genset);
  // f is traced over the deepest window's ball, so f(x) belongs to every H_m(x)
  // once its tracing radius is within eps_E'.
  auto fball = CayleyBall::build(ctx.genset, c.radii.back());

  struct Row {
    HReport rep;
    std::optional<PersistenceWitness> witness;
    std::optional<ShadowResult> f;
    std::vector<bool> contains_f;
  };
  std::vector<Row> rows(ctx.samples.size());
  parallel_for(rows.size(), ctx.jobs, [&](std::size_t i) {
    Row& r = rows[i];
    r.rep = verify_H_properties(ctx.phi, *ctx.psi, ep, e, ctx.samples[i], h, c.radii, mu);
    r.witness = extract_persistence_witness(r.rep.window, ctx.phi, *ctx.psi);
    try {
      r.f = semiconjugacy_at(ctx.phi, *ctx.psi, fball, ctx.samples[i], c.oracle);
    } catch (const SolverError&) {
    }
    for (const BoxSet& b : r.rep.window.boxes) {
      r.contains_f.push_back(r.f && b.contains_point(r.f->point));
    }
  });

  res.csv_header = {"index"};
  point_header(res.csv_header, "x", n);
  for (const char* h2 : {"radius", "empty", "volume"}) res.csv_header.push_back(h2);
  point_header(res.csv_header, "lo", n);
  point_header(res.csv_header, "hi", n);
  res.csv_header.push_back("contains_fx");
  point_header(res.csv_header, "witness", n);
  res.csv_header.push_back("witness_distance");
  res.csv_header.push_back("witness_pass");

  std::size_t nest_fail = 0, decay_fail = 0, sandwich_fail = 0, near_fail = 0, witness_fail = 0,
              fx_fail = 0, implication_fail = 0, sandwich_rows = 0;
  double worst_ratio = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Row& r = rows[i];
    if (!r.rep.nested) ++nest_fail;
    if (!r.rep.decaying) ++decay_fail;
    if (!r.rep.sandwich_ok) ++sandwich_fail;
    sandwich_rows += r.rep.sandwich.size();
    if (!r.rep.near_identity) ++near_fail;
    const bool witness_ok = r.witness && r.witness->audit_passed;
    if (!witness_ok) ++witness_fail;
    if (r.rep.passed && !witness_ok) ++implication_fail;
    if (r.f && r.f->tracing_radius <= c.epsilon_e_prime &&
        std::find(r.contains_f.begin(), r.contains_f.end(), false) != r.contains_f.end()) {
      ++fx_fail;
    }
    if (c.expected_ratio) {
      for (double q : r.rep.ratios) worst_ratio = std::max(worst_ratio, std::abs(q - *c.expected_ratio));
    }
    for (std::size_t k = 0; k < c.radii.size(); ++k) {
      const BoxSet& b = r.rep.window.boxes[k];
      std::vector<std::string> row{std::to_string(i)};
      push_point(row, ctx.samples[i]);
      row.push_back(std::to_string(c.radii[k]));
      row.push_back(b.empty() ? "1" : "0");
      row.push_back(format_number(r.rep.volumes[k]));
      if (auto hull = b.hull()) {
        for (const auto& a : hull->axes) row.push_back(format_number(a.lo()));
        for (const auto& a : hull->axes) row.push_back(format_number(a.hi()));
      } else {
        row.insert(row.end(), 2 * n, "");
      }
      row.push_back(r.contains_f[k] ? "1" : "0");
      if (r.witness) {
        push_point(row, r.witness->y);
        row.push_back(format_number(r.witness->max_distance));
      } else {
        row.insert(row.end(), n + 1, "");
      }
      row.push_back(witness_ok ? "1" : "0");
      res.csv_rows.push_back(std::move(row));
    }
  }
  const double total = static_cast<double>(rows.size());
  auto count_check = [&](const std::string& name, std::size_t failures, const std::string& note) {
    res.checks.push_back(Check{name, failures == 0, static_cast<double>(failures), 0, note});
  };
  count_check("nesting", nest_fail, "samples with H_{m+1} not inside H_m");
  count_check("volume_decay", decay_fail, "samples whose nonempty volumes do not strictly decrease");
  if (c.expected_ratio) {
    res.checks.push_back(check_max("volume_ratio_matches_expected", worst_ratio, c.ratio_tolerance,
                                   "max |ratio - expected_ratio|"));
  }
  count_check("equivariance_sandwich", sandwich_fail, "samples violating the shifted sandwich");
  count_check("near_identity", near_fail, "samples with H_m(x) outside E[x]");
  count_check("persistence_witness_audit", witness_fail, "samples without an audited witness");
  count_check("implication_H_to_witness", implication_fail,
              "samples where H passes but the witness audit fails");
  count_check("semiconjugacy_inside_H", fx_fail, "samples with f(x) outside some H_m(x)");

  json usc = json::array();
  for (const UscRow& u : usc_modulus(ctx.phi, *ctx.psi, ep, ctx.samples.front(), c.radii.back(),
                                     c.usc_deltas)) {
    usc.push_back({{"delta", u.delta}, {"rho", number_json(u.rho)}});
  }
  res.statistics = {{"samples", rows.size()},
                    {"h", ctx.genset.format_word(h.word)},
                    {"sandwich_checks", sandwich_rows},
                    {"sample0_ratios", rows.front().rep.ratios},
                    {"usc_modulus_sample0", usc},
                    {"witness_pass_rate", (total - static_cast<double>(witness_fail)) / total},
                    {"psi_certified_distance", ctx.psi_bound}};
}

// ---------------------------------------------------------------- generating sets

void run_genset_conversion(ExperimentResult& res, const Context& ctx) {
  const auto& c = ctx.cfg;
  const std::size_t n = ctx.phi.dimension();
  const GroupFamily& fam = ctx.genset.family();
  const GeneratingSet t = resolve_generators(fam, ctx.genset, c.source_generators);
  const Action phi_t = model_action(c.model, c.params, t);
  std::size_t m = 0;
  for (const Generator& s : ctx.genset.generators()) m = std::max(m, word_length(s.element, t));
  auto tball = CayleyBall::build(t, m * c.target_radius);
  const double eta = c.delta / (1 + phi_t.max_lipschitz());

  std::vector<Conversion> conv(ctx.samples.size());
  std::vector<PseudoOrbit> src(ctx.samples.size());
  parallel_for(conv.size(), ctx.jobs, [&](std::size_t i) {
    src[i] = perturbed_orbit(phi_t, tball, ctx.samples[i], eta, noise_seed(c, i));
    conv[i] = convert_generating_set(src[i], ctx.genset, c.target_radius, ctx.phi);
  });
  res.csv_header = {"index"};
  point_header(res.csv_header, "x", n);
  for (const char* h : {"declared_T", "realized_T", "declared_S", "realized_S", "pass"}) {
    res.csv_header.push_back(h);
  }
  double worst = 0;
  for (std::size_t i = 0; i < conv.size(); ++i) {
    const PseudoOrbit& o = conv[i].orbit;
    const bool ok = src[i].valid() && o.valid();
    worst = std::max(worst, o.realized_epsilon / o.declared_epsilon);
    std::vector<std::string> row{std::to_string(i)};
    push_point(row, ctx.samples[i]);
    row.push_back(format_number(src[i].declared_epsilon));
    row.push_back(format_number(src[i].realized_epsilon));
    row.push_back(format_number(o.declared_epsilon));
    row.push_back(format_number(o.realized_epsilon));
    row.push_back(ok ? "1" : "0");
    res.csv_rows.push_back(std::move(row));
  }
  const double l = conv.front().lipschitz;
  res.checks.push_back(check_max("converted_defect_within_bound", worst, 1.0,
                                 "max realized S-defect / (eps (L^m - 1) / (L - 1))"));
  res.statistics = {{"m", m},
                    {"lipschitz", l},
                    {"factor", conv.front().orbit.declared_epsilon / src.front().declared_epsilon},
                    {"source_radius", tball->radius()},
                    {"target_radius", c.target_radius},
                    {"orbits", conv.size()}};
}

// ---------------------------------------------------------------- conjugacy

void run_conjugacy(ExperimentResult& res, const Context& ctx) {
  const auto& c = ctx.cfg;
  const std::size_t n = ctx.phi.dimension();
  const DiagonalChange h{c.conjugacy_scale, c.conjugacy_perm};
  const Action conj = conjugate_action(ctx.phi, h);
  auto ball = CayleyBall::build(ctx.genset, c.ball_radius);
  const double eta = c.delta / (1 + ctx.phi.max_lipschitz());
  const LebesgueMeasure mu(n);
  const LebesgueMeasure pulled = mu.pullback(h);

  // Gamma transports exactly when h scales every coordinate by the same
  // magnitude, so the image of a metric entourage is again one.
  bool uniform_scale = ctx.phi.all_diagonal();
  for (double s : h.scale) uniform_scale = uniform_scale && std::abs(s) == std::abs(h.scale[0]);

  struct Row {
    ShadowResult y, yc;
    PseudoOrbit moved;
    double gap = 0;
    bool gamma_equal = true, pullback_equal = true;
  };
  std::vector<Row> rows(ctx.samples.size());
  parallel_for(rows.size(), ctx.jobs, [&](std::size_t i) {
    Row& r = rows[i];
    PseudoOrbit po = perturbed_orbit(ctx.phi, ball, ctx.samples[i], eta, noise_seed(c, i));
    r.y = solve(ctx, po, ctx.phi);
    r.moved = transport(po, h, ctx.phi);
    r.yc = solve(ctx, r.moved, conj);
    r.gap = distance(r.yc.point, h.apply(r.y.point));
    if (uniform_scale) {
      const BoxSet gamma = dynamical_ball(ctx.phi, ctx.samples[i], MetricEntourage(c.epsilon_d),
                                          c.ball_radius);
      const BoxSet image = change_image(gamma, h);
      const BoxSet gamma_c =
          dynamical_ball(conj, h.apply(ctx.samples[i]),
                         MetricEntourage(std::abs(h.scale[0]) * c.epsilon_d), c.ball_radius);
      r.gamma_equal = image.includes(gamma_c) && gamma_c.includes(image);
      r.pullback_equal = pulled.measure(image) == mu.measure(gamma);
    }
  });
  res.csv_header = {"index"};
  point_header(res.csv_header, "x", n);
  point_header(res.csv_header, "y", n);
  point_header(res.csv_header, "y_conj", n);
  for (const char* hd : {"gap", "transported_valid", "gamma_equal", "pullback_equal", "pass"}) {
    res.csv_header.push_back(hd);
  }
  double worst_gap = 0;
  std::size_t invalid = 0, gamma_fail = 0, pull_fail = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Row& r = rows[i];
    const bool valid = r.moved.valid(c.audit_tolerance);
    worst_gap = std::max(worst_gap, r.gap);
    if (!valid) ++invalid;
    if (!r.gamma_equal) ++gamma_fail;
    if (!r.pullback_equal) ++pull_fail;
    const bool ok = valid && r.gap <= c.audit_tolerance && r.gamma_equal && r.pullback_equal;
    std::vector<std::string> row{std::to_string(i)};
    push_point(row, ctx.samples[i]);
    push_point(row, r.y.point);
    push_point(row, r.yc.point);
    row.push_back(format_number(r.gap));
    row.push_back(valid ? "1" : "0");
    row.push_back(r.gamma_equal ? "1" : "0");
    row.push_back(r.pullback_equal ? "1" : "0");
    row.push_back(ok ? "1" : "0");
    res.csv_rows.push_back(std::move(row));
  }
  res.checks.push_back(Check{"transported_orbits_valid", invalid == 0, static_cast<double>(invalid),
                             0, "realized <= Lip(h) * declared"});
  res.checks.push_back(check_max("shadow_commutes_with_h", worst_gap, c.audit_tolerance,
                                 "max |shadow(h po) - h(shadow(po))|"));
  if (uniform_scale) {
    res.checks.push_back(Check{"dynamical_ball_transport", gamma_fail == 0,
                               static_cast<double>(gamma_fail), 0, "h(Gamma) equals Gamma of h Phi h^-1"});
    res.checks.push_back(Check{"pullback_measure", pull_fail == 0, static_cast<double>(pull_fail), 0,
                               "h*(mu)(h(A)) equals mu(A)"});
  }
  res.statistics = {{"orbits", rows.size()}, {"max_gap", worst_gap}, {"gamma_checked", uniform_scale}};
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config, unsigned jobs) {
  ExperimentResult res;
  res.config = config;
  const Context ctx = make_context(config, std::max(1u, jobs));
  const std::string& kind = config.experiment;
  if (kind == "shadowing") {
    run_shadowing(res, ctx);
  } else if (kind == "persistence") {
    run_persistence(res, ctx);
  } else if (kind == "expansivity") {
    run_expansivity(res, ctx);
  } else if (kind == "mu-expansivity") {
    run_mu_expansivity(res, ctx);
  } else if (kind == "stability") {
    run_stability(res, ctx);
  } else if (kind == "mu-stability") {
    run_mu_stability(res, ctx);
  } else if (kind == "genset-conversion") {
    run_genset_conversion(res, ctx);
  } else if (kind == "conjugacy-transport") {
    run_conjugacy(res, ctx);
  } else {
    throw InputError("unknown experiment '" + kind + "'");
  }
  return res;
}

}  // namespace shadowkit
