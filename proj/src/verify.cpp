#include "mint/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>

#include "json.hpp"

namespace mint {

using nlohmann::ordered_json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// acceptance thresholds, fixed here
constexpr double kValidateTol = 1e-10;
constexpr double kBoundaryFinal = 1e-4;
constexpr double kBoundaryRatio = 0.6;
constexpr double kThinTol = 1e-12;
constexpr double kGlobalDefect = 1e-3;
constexpr double kFillingTol = 5e-5;
constexpr double kSlopeMin = 3.8;
constexpr double kFluxSlopeLo = 2.9;
constexpr double kFluxSlopeHi = 3.1;
constexpr double kWzTol = 1e-6;
constexpr double kGaugeBudget = 1e-2;
constexpr double kGaugeRatioLo = 1.6;
constexpr double kGaugeRatioHi = 2.4;
constexpr double kPointwiseTol = 1e-8;

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
        .count();
  }
};

CheckRecord make_check(const std::string& name, const std::string& anchor, double residual,
                       double threshold, bool pass, std::string note = "") {
  return {name, anchor, residual, threshold, pass, std::move(note)};
}

CheckRecord residual_check(const std::string& name, const std::string& anchor, double residual,
                           double threshold, std::string note = "") {
  return make_check(name, anchor, residual, threshold, residual <= threshold, std::move(note));
}

Report start_report(const Scenario& s, const std::string& command) {
  Report r;
  r.scenario = s.name();
  r.command = command;
  r.seed = s.run().seed;
  r.deterministic = s.run().deterministic;
  return r;
}

int path_levels(const Scenario& s) {
  return s.run().levels > 0 ? s.run().levels : kDefaultPathLevels;
}
int surface_levels(const Scenario& s) {
  return s.run().levels > 0 ? s.run().levels : kDefaultSurfaceLevels;
}

PiecewisePath resolve_path(const Scenario& s) {
  const std::string& n = s.run().path;
  if (n.empty()) throw scenario_error("scenario run section must name a path");
  if (s.has_path(n)) return s.path(n);
  return PiecewisePath(s.simplex(n));
}

// least-squares slope of log2(y) against -j (diameters 2^-j)
double fit_slope(const std::vector<double>& y) {
  const int n = static_cast<int>(y.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int j = 1; j <= n; ++j) {
    double x = -double(j);
    double ly = std::log2(y[static_cast<std::size_t>(j - 1)]);
    sx += x;
    sy += ly;
    sxx += x * x;
    sxy += x * ly;
  }
  return (double(n) * sxy - sx * sy) / (double(n) * sxx - sx * sx);
}

}  // namespace

bool Report::pass() const {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

LevelTable level_table(const std::string& name, const MIResult& r) {
  LevelTable t;
  t.name = name;
  // prefer algebra coordinates; fall back to matrix entries near branch cuts
  bool use_log = true;
  std::vector<std::vector<double>> coords;
  try {
    for (const auto& [k, g] : r.per_level) {
      Vec c = log_grp(g).coordinates();
      coords.emplace_back(c.data(), c.data() + c.size());
    }
  } catch (const branch_cut_error&) {
    use_log = false;
    coords.clear();
  }
  if (use_log) {
    int dim = coords.empty() ? 0 : static_cast<int>(coords.front().size());
    for (int i = 0; i < dim; ++i) t.coord_labels.push_back("c" + std::to_string(i));
  } else {
    for (const auto& [k, g] : r.per_level) {
      std::vector<double> row;
      for (int i = 0; i < g.matrix.rows(); ++i)
        for (int j = 0; j < g.matrix.cols(); ++j) {
          row.push_back(g.matrix(i, j).real());
          row.push_back(g.matrix(i, j).imag());
        }
      coords.push_back(std::move(row));
    }
    if (!r.per_level.empty()) {
      const auto& m = r.per_level.front().second.matrix;
      for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) {
          t.coord_labels.push_back("re" + std::to_string(i) + std::to_string(j));
          t.coord_labels.push_back("im" + std::to_string(i) + std::to_string(j));
        }
    }
  }
  for (std::size_t i = 0; i < r.per_level.size(); ++i) {
    LevelRow row;
    row.k = r.per_level[i].first;
    row.value_coords = coords[i];
    row.diff = i == 0 ? kNaN : r.diffs[i - 1];
    row.observed_order =
        i >= 2 && r.diffs[i - 1] > 1e-14 && r.diffs[i - 2] > 1e-14
            ? std::log2(r.diffs[i - 2] / r.diffs[i - 1])
            : kNaN;
    t.rows.push_back(std::move(row));
  }
  return t;
}

std::string Report::to_json_text() const {
  ordered_json j;
  j["scenario"] = scenario;
  j["command"] = command;
  j["seed"] = seed;
  j["deterministic"] = deterministic;
  if (!deterministic) j["wall_ms"] = wall_ms;
  j["pass"] = pass();
  j["checks"] = ordered_json::array();
  for (const auto& c : checks) {
    ordered_json jc;
    jc["name"] = c.name;
    jc["anchor"] = c.anchor;
    jc["residual"] = c.residual;
    jc["threshold"] = c.threshold;
    jc["pass"] = c.pass;
    if (!c.note.empty()) jc["note"] = c.note;
    j["checks"].push_back(jc);
  }
  j["tables"] = ordered_json::array();
  for (const auto& t : tables) {
    ordered_json jt;
    jt["name"] = t.name;
    std::vector<std::string> cols = {"k"};
    cols.insert(cols.end(), t.coord_labels.begin(), t.coord_labels.end());
    cols.push_back("diff");
    cols.push_back("observed_order");
    jt["columns"] = cols;
    jt["rows"] = ordered_json::array();
    for (const auto& row : t.rows) {
      ordered_json jr = ordered_json::array();
      jr.push_back(row.k);
      for (double v : row.value_coords) jr.push_back(v);
      jr.push_back(row.diff);
      jr.push_back(row.observed_order);
      jt["rows"].push_back(jr);
    }
    j["tables"].push_back(jt);
  }
  return j.dump(2) + "\n";
}

void Report::write_csv(const std::string& dir) const {
  std::filesystem::create_directories(dir);
  for (const auto& t : tables) {
    std::ofstream out(dir + "/" + scenario + "_" + t.name + ".csv");
    out << "k";
    for (const auto& l : t.coord_labels) out << "," << l;
    out << ",diff,observed_order\n";
    char buf[40];
    auto cell = [&](double v) {
      if (std::isnan(v)) return std::string();
      std::snprintf(buf, sizeof buf, "%.17g", v);
      return std::string(buf);
    };
    for (const auto& row : t.rows) {
      out << row.k;
      for (double v : row.value_coords) out << "," << cell(v);
      out << "," << cell(row.diff) << "," << cell(row.observed_order) << "\n";
    }
  }
}

// ---------------------------------------------------------------------------
// Runners
// ---------------------------------------------------------------------------

Report run_validate(const Scenario& s) {
  Timer timer;
  Report rep = start_report(s, "validate");
  ValidationReport v = validate(*s.cm(), 1000, kValidateTol, s.run().seed);
  for (const auto& r : v.records) {
    std::string note = r.max_residual > kValidateTol ? "worst witness: " + r.worst_witness : "";
    rep.checks.push_back(residual_check("axiom-" + r.axiom, "crossed-module-axioms",
                                        r.max_residual, kValidateTol, note));
  }
  if (!s.run().alpha.empty() && !s.run().beta.empty()) {
    TwoConnection conn(s.cm(), s.form(s.run().alpha), s.form(s.run().beta),
                       /*enforce=*/false, 64, s.run().seed);
    const FakeFlatReport& ff = conn.fake_flat_report();
    if (s.run().enforce_fake_flatness) {
      rep.checks.push_back(
          residual_check("fake-flatness", "fake-flatness", ff.max_residual, kPointwiseTol));
    } else {
      rep.checks.push_back(make_check("fake-flatness", "fake-flatness", ff.max_residual, kNaN,
                                      true, "scenario opted out of fake-flatness"));
    }
  }
  rep.wall_ms = timer.ms();
  return rep;
}

Report run_path(const Scenario& s) {
  Timer timer;
  Report rep = start_report(s, "path");
  const LieValuedForm& alpha = s.form(s.run().alpha.empty() ? "alpha" : s.run().alpha);
  MIResult r = mi_path(alpha, resolve_path(s), s.run().tol, path_levels(s));
  rep.tables.push_back(level_table("path_mi", r));
  rep.checks.push_back(make_check("path-mi-converged", "path-transport", r.diffs.empty() ? 0.0 : r.diffs.back(),
                                  r.tol, r.converged));
  rep.wall_ms = timer.ms();
  return rep;
}

Report run_surface(const Scenario& s) {
  Timer timer;
  Report rep = start_report(s, "surface");
  TwoConnection conn = s.connection();
  if (s.run().kite.empty()) throw scenario_error("scenario run section must name a kite");
  const Kite& kite = s.kite(s.run().kite);
  MIResult r = mi_surface(conn, kite, s.run().tol, surface_levels(s));
  rep.tables.push_back(level_table("surface_mi", r));
  rep.checks.push_back(make_check("surface-mi-converged", "surface-transport",
                                  r.diffs.empty() ? 0.0 : r.diffs.back(), r.tol, r.converged));
  if (degenerate(kite.face)) {
    double worst = 0;
    for (const auto& [k, g] : r.per_level)
      worst = std::max(worst, group_dist(g, GroupElement::identity(conn.cm().H())));
    rep.checks.push_back(residual_check("thin-homotopy", "thin-homotopy-degeneracy", worst,
                                        kThinTol, "degenerate face"));
  }
  rep.wall_ms = timer.ms();
  return rep;
}

namespace {

void append_boundary_compat(Report& rep, const Scenario& s, const TwoConnection& conn,
                            const Kite& kite, int levels) {
  PiecewisePath loop = kite_boundary_path(kite);
  std::vector<double> residuals;
  LevelTable table;
  table.name = "boundary_compat";
  table.coord_labels = {"residual"};
  for (int k = 1; k <= levels; ++k) {
    GroupElement lhs = conn.cm().phi(rp_surface(conn, kite, k));
    GroupElement rhs = rp_path(conn.alpha(), loop, k);
    double r = group_dist(lhs, rhs);
    residuals.push_back(r);
    LevelRow row;
    row.k = k;
    row.value_coords = {r};
    row.diff = k == 1 ? kNaN : residuals[residuals.size() - 2] - r;
    row.observed_order =
        k == 1 ? kNaN : std::log2(residuals[residuals.size() - 2] / std::max(r, 1e-300));
    table.rows.push_back(row);
  }
  rep.tables.push_back(std::move(table));
  rep.checks.push_back(residual_check("boundary-compatibility", "boundary-compatibility",
                                      residuals.back(), kBoundaryFinal));
  double worst_ratio = 0;
  for (std::size_t i = 2; i + 1 < residuals.size(); ++i) {
    if (residuals[i] < 1e-13) break;  // at numerical noise, ratios are meaningless
    worst_ratio = std::max(worst_ratio, residuals[i + 1] / residuals[i]);
  }
  rep.checks.push_back(make_check("boundary-compatibility-decay", "boundary-compatibility",
                                  worst_ratio, kBoundaryRatio, worst_ratio <= kBoundaryRatio,
                                  "max residual ratio for k >= 3"));
}

Kite builtin_degenerate_kite(int ambient_dim) {
  // the face factors through a curve, so its rank never reaches 2
  auto ref = reference_chart(2);
  Expr st = Expr::var("s") + Expr::var("t");
  std::vector<Expr> comps = {Expr::constant(0.7) * st, Expr::constant(0.3) * Expr::sin(st),
                             Expr::constant(0.2) * st * st};
  while (static_cast<int>(comps.size()) < ambient_dim) comps.push_back(Expr());
  comps.resize(static_cast<std::size_t>(ambient_dim));
  return Kite::based(Simplex(std::make_shared<SmoothMap>(2, ambient_dim, comps), 2));
}

}  // namespace

Report run_stokes2(const Scenario& s) {
  Timer timer;
  Report rep = start_report(s, "stokes2");
  TwoConnection conn = s.connection();
  if (s.run().kite.empty()) throw scenario_error("scenario run section must name a kite");
  append_boundary_compat(rep, s, conn, s.kite(s.run().kite), surface_levels(s));
  rep.wall_ms = timer.ms();
  return rep;
}

Report run_functor_suite(const Scenario& s) {
  Timer timer;
  Report rep = start_report(s, "functor");
  TwoConnection conn = s.connection();
  const double tol = s.run().tol;
  const LieValuedForm& alpha = conn.alpha();

  // path composition: split at a non-dyadic parameter so the halves'
  // subdivisions never align with the whole path's
  PiecewisePath whole = resolve_path(s);
  const Simplex& seg = whole.segments().front();
  Simplex first = restrict_path(seg, 0.0, 0.375);
  Simplex second = restrict_path(seg, 0.375, 1.0);
  {
    MIResult mw = mi_path(alpha, PiecewisePath(seg), tol, path_levels(s));
    MIResult m1 = mi_path(alpha, PiecewisePath(first), tol, path_levels(s));
    MIResult m2 = mi_path(alpha, PiecewisePath(second), tol, path_levels(s));
    double r = group_dist(mw.value, m1.value * m2.value);
    rep.checks.push_back(residual_check("path-composition", "composition-law", r, 2 * tol));
    double ri = group_dist(mi_path(alpha, PiecewisePath(seg.reversed()), tol, path_levels(s)).value,
                           mw.value.inverse());
    rep.checks.push_back(residual_check("path-inversion", "path-inversion", ri, 2 * tol));
    rep.tables.push_back(level_table("path_mi", mw));
  }

  if (!s.run().kite.empty()) {
    const Kite& kite = s.kite(s.run().kite);
    int kl = surface_levels(s);

    // gluing: the level-k product equals the ordered product of the
    // children at level k-1 by construction
    int kc = std::min(3, kl);
    GroupElement parent = rp_surface(conn, kite, kc);
    auto children = subdivide_kite(kite);
    OrderedProduct prod(conn.cm().H());
    for (const auto& ch : children) prod.append(rp_surface(conn, ch, kc - 1));
    rep.checks.push_back(residual_check("surface-subdivision-exact", "surface-composition",
                                        group_dist(parent, prod.value()), 1e-12));

    MIResult ms = mi_surface(conn, kite, tol, kl);
    OrderedProduct lim(conn.cm().H());
    for (const auto& ch : children) lim.append(mi_surface(conn, ch, tol, kl).value);
    rep.checks.push_back(residual_check("surface-composition", "surface-composition",
                                        group_dist(ms.value, lim.value()), 6 * tol));

    MIResult mrev = mi_surface(conn, kite.reversed(), tol, kl);
    rep.checks.push_back(residual_check(
        "surface-inversion", "surface-inversion",
        group_dist(mrev.value * ms.value, GroupElement::identity(conn.cm().H())), 6 * tol));
    rep.tables.push_back(level_table("surface_mi", ms));

    append_boundary_compat(rep, s, conn, kite, kl);
  }

  // thin homotopy on a built-in degenerate face
  {
    Kite dk = builtin_degenerate_kite(s.ambient_dim());
    double worst = 0;
    for (int k = 0; k <= std::min(4, surface_levels(s)); ++k)
      worst = std::max(worst, group_dist(rp_surface(conn, dk, k),
                                         GroupElement::identity(conn.cm().H())));
    rep.checks.push_back(
        residual_check("thin-homotopy", "thin-homotopy-degeneracy", worst, kThinTol));
  }

  rep.wall_ms = timer.ms();
  return rep;
}

Report run_stokes_suite(const Scenario& s) {
  Timer timer;
  Report rep = start_report(s, "stokes3");
  TwoConnection conn = s.connection();
  const RunParams& rp = s.run();

  if (!rp.pair.empty()) {
    const SurfacePair& pair = s.surface_pair(rp.pair);
    int levels = rp.levels > 0 ? rp.levels : 3;
    StokesReport sr = stokes3_defect(conn, pair, levels, rp.jobs);
    rep.checks.push_back(
        residual_check("global-stokes-defect", "global-stokes", sr.defect, kGlobalDefect));
    bool monotone = true;
    for (std::size_t i = 0; i + 1 < sr.defects.size(); ++i)
      monotone = monotone && (sr.defects[i + 1] < sr.defects[i] || sr.defects[i + 1] <= 1e-13);
    rep.checks.push_back(make_check("global-stokes-monotone", "global-stokes",
                                    sr.defects.empty() ? 0 : sr.defects.back(), kNaN, monotone,
                                    "defects must decrease with the refinement level"));
    LevelTable table;
    table.name = "stokes3_defects";
    table.coord_labels = {"defect"};
    for (std::size_t i = 0; i < sr.defects.size(); ++i) {
      LevelRow row;
      row.k = sr.levels[i];
      row.value_coords = {sr.defects[i]};
      row.diff = i == 0 ? kNaN : sr.defects[i - 1] - sr.defects[i];
      row.observed_order = i == 0 ? kNaN : std::log2(sr.defects[i - 1] / sr.defects[i]);
      table.rows.push_back(row);
    }
    rep.tables.push_back(std::move(table));

    if (rp.analytic_flux) {
      // abelian oracle: the phase ratio must match exp(i * analytic flux)
      Vec c(1);
      c(0) = *rp.analytic_flux;
      GroupElement expected = exp_alg(AlgebraElement::from_coordinates(conn.cm().H(), c));
      GroupElement lhs = surface_product(conn, pair.sigma1, levels, rp.jobs);
      GroupElement rhs = surface_product(conn, pair.sigma0, levels, rp.jobs) * expected;
      rep.checks.push_back(residual_check("global-stokes-analytic", "wess-zumino-phase",
                                          group_dist(lhs, rhs), kGlobalDefect));
    }

    // two fillings of the same pair must give matching defects; the
    // second filling is a finer decomposition of the same body, so its
    // boundary triangulation differs and only the defects are compared
    {
      Chain3 finer = pair.filling.refined(1);
      GroupElement expflux2 = exp_alg(integrate_3form(conn.three_curv(), finer, 3));
      GroupElement lhs = surface_product(conn, pair.sigma1, levels, rp.jobs);
      GroupElement rhs = surface_product(conn, pair.sigma0, levels, rp.jobs) * expflux2;
      double defect2 = group_dist(lhs, rhs);
      rep.checks.push_back(residual_check("filling-independence", "filling-independence",
                                          std::abs(sr.defect - defect2), kFillingTol));
    }
  }

  // local tetrahedron study
  {
    Eigen::VectorXd base =
        rp.tet_base.size() == 3 ? rp.tet_base : Eigen::VectorXd(Eigen::Vector3d(0.25, 0.2, 0.3));
    LieValuedForm h3 = conn.three_curv();
    // with a trivial G the factors commute and any level measures pure
    // quadrature; otherwise the face products must outrun the d^4 defect
    bool trivial_g = conn.cm().G()->dim() == 0;
    std::vector<double> defects, fluxes;
    LevelTable table;
    table.name = "tet_shrink";
    table.coord_labels = {"defect", "flux_norm"};
    for (int j = 1; j <= 5; ++j) {
      double d = std::pow(2.0, -j);
      std::vector<Eigen::VectorXd> verts = {base, base + d * Eigen::Vector3d(1, 0, 0),
                                            base + d * Eigen::Vector3d(0, 1, 0),
                                            base + d * Eigen::Vector3d(0, 0, 1)};
      Simplex tet = Simplex::affine_from_vertices(verts);
      int k = trivial_g ? 3 : std::min(9, j + 4);
      GroupElement prod = tet_boundary_product(conn, tet, k);
      AlgebraElement flux = integrate_3form(h3, Chain3{{{tet, 1}}}, 2);
      defects.push_back(group_dist(prod, exp_alg(flux)));
      fluxes.push_back(flux.norm());
      LevelRow row;
      row.k = j;
      row.value_coords = {defects.back(), fluxes.back()};
      row.diff = kNaN;
      row.observed_order = j == 1 ? kNaN : std::log2(defects[defects.size() - 2] / defects.back());
      table.rows.push_back(row);
    }
    rep.tables.push_back(std::move(table));
    if (*std::max_element(defects.begin(), defects.end()) < 1e-13) {
      rep.checks.push_back(make_check("local-stokes-slope", "local-stokes-tetrahedron", 0.0, kNaN,
                                      true, "defect at numerical noise on every tet"));
    } else {
      double slope = fit_slope(defects);
      rep.checks.push_back(make_check("local-stokes-slope", "local-stokes-tetrahedron", slope,
                                      kSlopeMin, slope >= kSlopeMin,
                                      "log-log slope of the boundary-product defect"));
    }
    bool flux_nonzero = *std::min_element(fluxes.begin(), fluxes.end()) > 1e-13;
    if (flux_nonzero) {
      double fslope = fit_slope(fluxes);
      rep.checks.push_back(make_check("flux-volume-scaling", "local-stokes-tetrahedron", fslope,
                                      kFluxSlopeHi, fslope >= kFluxSlopeLo && fslope <= kFluxSlopeHi,
                                      "slope of |int H| itself; expected close to 3"));
    } else {
      rep.checks.push_back(make_check("flux-volume-scaling", "local-stokes-tetrahedron", 0.0, kNaN,
                                      true, "3-curvature vanishes identically (flat case)"));
    }
  }

  rep.wall_ms = timer.ms();
  return rep;
}

Report run_wz_suite(const Scenario& s) {
  Timer timer;
  Report rep = start_report(s, "wz");
  const RunParams& rp = s.run();
  if (s.cm()->H()->name() != "u1" || s.cm()->G()->dim() != 0)
    throw scenario_error("the flux quantization suite needs the abelian crossed module");
  if (rp.closed_surface.empty())
    throw scenario_error("scenario run section must name a closed_surface");
  const auto& kites = s.closed_surface(rp.closed_surface);
  const LieValuedForm& beta_unit = s.form(rp.beta.empty() ? "beta" : rp.beta);
  LieValuedForm alpha = LieValuedForm::zero(1, beta_unit.chart(), s.cm()->G());

  std::vector<double> fluxes = rp.flux_values;
  if (fluxes.empty()) fluxes = {2 * M_PI, 4 * M_PI, M_PI, 3.0};
  int level = rp.levels > 0 ? rp.levels : 2;
  for (double c : fluxes) {
    TwoConnection conn(s.cm(), alpha, beta_unit.scaled(c));
    GroupElement w = closed_surface_mi(conn, kites, level, rp.jobs);
    double dist = group_dist(w, GroupElement::identity(s.cm()->H()));
    double expected = std::abs(std::polar(1.0, c) - 1.0);
    char label[64];
    std::snprintf(label, sizeof label, "flux-%g", c);
    rep.checks.push_back(residual_check(label, "flux-quantization", std::abs(dist - expected),
                                        kWzTol,
                                        expected < kWzTol ? "quantized flux: holonomy trivial"
                                                          : "non-quantized flux: holonomy off identity"));
  }
  rep.wall_ms = timer.ms();
  return rep;
}

Report run_gauge_suite(const Scenario& s) {
  Timer timer;
  Report rep = start_report(s, "gauge");
  const RunParams& rp = s.run();
  const std::string& mod = s.cm()->name();
  if (mod != "identity_su2" && mod != "cover_su2_so3")
    throw scenario_error("the gauge suite needs identity_su2 or cover_su2_so3");
  auto lambda = s.lambda();
  if (!lambda) throw scenario_error("scenario run section must define lambda (axis + angle)");
  const LieValuedForm& A = s.form(rp.alpha.empty() ? "alpha" : rp.alpha);
  const LieValuedForm& B = s.form(rp.beta.empty() ? "beta" : rp.beta);

  auto pts = sample_points(s.ambient_dim(), 12, rp.seed);
  double h = 1e-3;
  auto res = gauge_variation_check(*s.cm(), A, B, *lambda, h, pts);
  auto res2 = gauge_variation_check(*s.cm(), A, B, *lambda, h / 2, pts);
  rep.checks.push_back(residual_check("gauge-variation-residual", "gauge-variation", res.residual,
                                      kGaugeBudget * res.rhs_scale,
                                      "budget is 1e-2 * |act(F_A, B)| scale"));
  double ratio = res2.residual > 1e-300 ? res.residual / res2.residual : kNaN;
  rep.checks.push_back(make_check("gauge-variation-step-ratio", "gauge-variation", ratio, kGaugeRatioHi,
                                  ratio >= kGaugeRatioLo && ratio <= kGaugeRatioHi,
                                  "halving the step must roughly halve the residual"));

  // pointwise covariance of the curvature under the finite transformation
  if (auto g = s.gauge()) {
    auto [ag, bg] = gauge_transform(*s.cm(), A, B, *g);
    LieValuedForm Fg = curvature(ag);
    LieValuedForm F0 = curvature(A);
    auto chart = A.chart();
    std::vector<std::pair<std::string, double>> bind(chart.size());
    double worst = 0;
    for (const auto& p : pts) {
      for (std::size_t c = 0; c < chart.size(); ++c) bind[c] = {chart[c], p(static_cast<int>(c))};
      double lam = g->angle.eval(bind);
      GroupElement gx = exp_alg(AlgebraElement{s.cm()->G(), Mat(lam * g->axis.matrix)});
      for (int i = 0; i < s.ambient_dim(); ++i)
        for (int j = i + 1; j < s.ambient_dim(); ++j) {
          Eigen::MatrixXd v = Eigen::MatrixXd::Zero(s.ambient_dim(), 2);
          v(i, 0) = v(j, 1) = 1;
          Mat lhs = Fg.eval(p, v).matrix;
          Mat rhs = gx.matrix.adjoint() * F0.eval(p, v).matrix * gx.matrix;
          worst = std::max(worst, (lhs - rhs).norm());
        }
    }
    rep.checks.push_back(
        residual_check("curvature-covariance", "gauge-covariance", worst, kPointwiseTol));

    // alpha = 0 transforms to a pure gauge field with vanishing curvature
    LieValuedForm zero1 = LieValuedForm::zero(1, A.chart(), s.cm()->G());
    LieValuedForm zero2 = LieValuedForm::zero(2, B.chart(), s.cm()->H());
    auto [pg, pgb] = gauge_transform(*s.cm(), zero1, zero2, *g);
    LieValuedForm Fpg = curvature(pg);
    double worst2 = 0;
    for (const auto& p : pts)
      for (int i = 0; i < s.ambient_dim(); ++i)
        for (int j = i + 1; j < s.ambient_dim(); ++j) {
          Eigen::MatrixXd v = Eigen::MatrixXd::Zero(s.ambient_dim(), 2);
          v(i, 0) = v(j, 1) = 1;
          worst2 = std::max(worst2, Fpg.eval(p, v).matrix.norm());
        }
    rep.checks.push_back(
        residual_check("pure-gauge-flatness", "gauge-covariance", worst2, kPointwiseTol));
  }

  rep.wall_ms = timer.ms();
  return rep;
}

Report run_converge(const Scenario& s) {
  Timer timer;
  Report rep = start_report(s, "converge");
  auto check_monotone = [&](const MIResult& r, const std::string& name) {
    double worst = 0;
    bool ok = true;
    for (std::size_t i = 0; i + 1 < r.diffs.size(); ++i) {
      if (r.diffs[i] < 1e-13 && r.diffs[i + 1] < 1e-13) break;
      double ratio = r.diffs[i + 1] / std::max(r.diffs[i], 1e-300);
      worst = std::max(worst, ratio);
      ok = ok && r.diffs[i + 1] <= r.diffs[i];
    }
    rep.checks.push_back(
        make_check(name + "-diffs-monotone", "refinement-convergence", worst, 1.0, ok,
                   "successive level differences must decrease"));
  };
  bool any = false;
  if (!s.run().path.empty()) {
    const LieValuedForm& alpha = s.form(s.run().alpha.empty() ? "alpha" : s.run().alpha);
    MIResult r = mi_path(alpha, resolve_path(s), s.run().tol, path_levels(s));
    rep.tables.push_back(level_table("path_mi", r));
    check_monotone(r, "path");
    any = true;
  }
  if (!s.run().kite.empty()) {
    TwoConnection conn = s.connection();
    MIResult r = mi_surface(conn, s.kite(s.run().kite), s.run().tol, surface_levels(s));
    rep.tables.push_back(level_table("surface_mi", r));
    check_monotone(r, "surface");
    any = true;
  }
  if (!any) throw scenario_error("converge needs a path or a kite in the run section");
  rep.wall_ms = timer.ms();
  return rep;
}

}  // namespace mint
