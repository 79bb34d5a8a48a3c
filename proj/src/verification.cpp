#include "kls/verification.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include <json.hpp>

#include "kls/numio.hpp"
#include "kls/version.hpp"

namespace kls {

std::vector<Vec3d> coefficients_from_dofs(const Eigen::VectorXd& x) {
  std::vector<Vec3d> c(x.size() / 3);
  for (size_t k = 0; k < c.size(); ++k) c[k] = {x(3 * k), x(3 * k + 1), x(3 * k + 2)};
  return c;
}

namespace {

SurfaceJet subtract(const SurfaceJet& a, const SurfaceJet& b) {
  SurfaceJet r;
  r.order = std::min(a.order, b.order);
  for (int m = 0; m < num_multi_indices(r.order); ++m) r.d[m] = a.d[m] - b.d[m];
  return r;
}

double double_contract(const Mat2<double>& s, const Mat2<double>& e) {
  return s[0][0] * e[0][0] + s[1][1] * e[1][1] + s[0][1] * e[0][1] + s[1][0] * e[1][0];
}

double energy_density(const ElasticityTensor<double>& c, const Kinematics<double>& k,
                      const Material& m) {
  const double bend = m.zeta * m.zeta * m.zeta / 12.0;
  return m.zeta * double_contract(c.contract(k.alpha), k.alpha) + bend * double_contract(c.contract(k.beta), k.beta);
}

double metric_norm_sq(const SurfaceFrame& f, const std::array<double, 2>& v) {
  double s = 0.0;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) s += f.a_cov[a][b] * v[a] * v[b];
  return s;
}

struct BoundarySums {
  double eta = 0.0;   // trace-weighted boundary action terms
  double pen = 0.0;   // penalty-weighted trace terms
};

// Triple-norm boundary contributions of the field discrete - exact, or of the
// exact field alone when coeffs is null.
BoundarySums boundary_norm_terms(const Discretization& disc, const std::vector<Vec3d>* coeffs,
                                 const PenaltyConfig& pen) {
  const Material& mat = disc.spec.material;
  const double cmag = mat.c_magnitude();
  const double z = mat.zeta, z3c = z * z * z * cmag;
  const auto cp = pen.cpen();
  const auto& ctr = pen.ctr;
  BoundarySums s;
  auto field_at = [&](double x1, double x2) {
    SurfaceJet ue = eval_exact<double>(disc.spec, x1, x2, 3);
    if (!coeffs) return ue;
    return subtract(eval_field(disc.patch, *coeffs, x1, x2, 3), ue);
  };
  for (int e = 0; e < 4; ++e) {
    const Edge edge = static_cast<Edge>(e);
    const BoundaryType bt = disc.spec.edge_type(edge);
    if (!is_d1(bt) && !is_d2(bt)) continue;
    for (int k = 0; k < disc.rule.num_edge(); ++k) {
      const auto xi = edge_point(edge, disc.rule.points[k]);
      const SurfaceFrame f = build_frame<double>(eval_surface(disc.patch, xi[0], xi[1], 3), true);
      const EdgeFrame ef = build_edge_frame(f, edge);
      const SurfaceJet u = field_at(xi[0], xi[1]);
      const Kinematics<double> kin = kinematics(f, u, true);
      const ElasticityTensor<double> c = elasticity(f, mat);
      const BoundaryActions<double> ba = boundary_actions(f, ef, c, kin, mat);
      const double W = disc.rule.weights[k] * ef.s_norm;
      const double h = disc.topo.edge_h(edge, k / disc.rule.nq);
      if (is_d1(bt)) {
        if (ctr[0] > 0) s.eta += W * h * h * h / (ctr[0] * z3c) * ba.T3 * ba.T3;
        if (ctr[3] > 0) s.eta += W * h / (ctr[3] * z3c) * metric_norm_sq(f, ba.TB);
        if (ctr[4] > 0) s.eta += W * h / (ctr[4] * z * cmag) * metric_norm_sq(f, ba.TA);
        const double u3 = dot(f.a3, u.x());
        const Vec3d ubar = u.x() - f.a3 * u3;
        s.pen += W * (cp[0] * z3c / (h * h * h) * u3 * u3 + cp[3] * z * cmag / h * dot(ubar, ubar));
      }
      if (is_d2(bt)) {
        if (ctr[2] > 0) s.eta += W * h / (ctr[2] * z3c) * ba.Bnn * ba.Bnn;
        const double th = rotation_n(f, ef, kin);
        s.pen += W * cp[2] * z3c / h * th * th;
      }
    }
  }
  for (const auto& info : corner_table()) {
    if (!disc.spec.corner_dirichlet(info.corner)) continue;
    const double h = disc.topo.corner_h(info.corner);
    const SurfaceFrame f = build_frame<double>(eval_surface(disc.patch, info.xi1, info.xi2, 3), true);
    const SurfaceJet u = field_at(info.xi1, info.xi2);
    const Kinematics<double> kin = kinematics(f, u, true);
    const ElasticityTensor<double> c = elasticity(f, mat);
    const double before = boundary_actions(f, build_edge_frame(f, info.before), c, kin, mat).Bnt;
    const double after = boundary_actions(f, build_edge_frame(f, info.after), c, kin, mat).Bnt;
    const double jump = corner_jump(before, after);
    if (ctr[1] > 0) s.eta += h * h / (ctr[1] * z3c) * jump * jump;
    const double u3 = dot(f.a3, u.x());
    s.pen += cp[1] * z3c / (h * h) * u3 * u3;
  }
  return s;
}

struct InteriorSums {
  double l2e = 0, l2u = 0, h1e = 0, h1u = 0, ene = 0, enu = 0;
};

InteriorSums interior_norm_terms(const Discretization& disc, const std::vector<Vec3d>& coeffs, bool full) {
  const auto& rule = disc.rule;
  const int n1d = rule.n1d();
  const double ell = patch_diameter(disc.spec.patch);
  const Material& mat = disc.spec.material;
  std::vector<InteriorSums> rows(n1d);
  // Per-row partial sums, combined serially, keep results independent of the thread count.
#pragma omp parallel for schedule(dynamic, 1)
  for (int k2 = 0; k2 < n1d; ++k2) {
    InteriorSums r;
    for (int k1 = 0; k1 < n1d; ++k1) {
      const double x1 = rule.points[k1], x2 = rule.points[k2];
      const int order = full ? 2 : 0;
      const SurfaceJet ue = eval_exact<double>(disc.spec, x1, x2, order);
      const SurfaceJet uh = eval_field(disc.patch, coeffs, x1, x2, order);
      const SurfaceJet e = subtract(uh, ue);
      const SurfaceFrame f = build_frame<double>(eval_surface(disc.patch, x1, x2, 2), false);
      const double w = rule.weights[k1] * rule.weights[k2] * f.det_a;
      r.l2e += w * dot(e.x(), e.x());
      r.l2u += w * dot(ue.x(), ue.x());
      if (!full) continue;
      auto grad_sq = [&](const SurfaceJet& v) {
        double s = 0.0;
        for (int a = 0; a < 2; ++a)
          for (int b = 0; b < 2; ++b) s += f.a_con[a][b] * dot(v.d1(a), v.d1(b));
        return s;
      };
      r.h1e += w * (dot(e.x(), e.x()) / (ell * ell) + grad_sq(e));
      r.h1u += w * (dot(ue.x(), ue.x()) / (ell * ell) + grad_sq(ue));
      const ElasticityTensor<double> c = elasticity(f, mat);
      r.ene += w * energy_density(c, kinematics(f, e, false), mat);
      r.enu += w * energy_density(c, kinematics(f, ue, false), mat);
    }
    rows[k2] = r;
  }
  InteriorSums t;
  for (const auto& r : rows) {
    t.l2e += r.l2e;
    t.l2u += r.l2u;
    t.h1e += r.h1e;
    t.h1u += r.h1u;
    t.ene += r.ene;
    t.enu += r.enu;
  }
  return t;
}

double safe_ratio(double a, double b) {
  if (!(b > 0.0)) throw Error(ErrorKind::Domain, "error_norms: exact field has zero norm");
  return a / b;
}

}  // namespace

ErrorNorms error_norms(const Discretization& disc, const Eigen::VectorXd& x, const PenaltyConfig& pen) {
  const std::vector<Vec3d> coeffs = coefficients_from_dofs(x);
  const InteriorSums in = interior_norm_terms(disc, coeffs, true);
  const BoundarySums be = boundary_norm_terms(disc, &coeffs, pen);
  ErrorNorms n;
  n.l2_abs = std::sqrt(in.l2e);
  n.l2_exact = std::sqrt(in.l2u);
  n.h1_abs = std::sqrt(in.h1e);
  n.h1_exact = std::sqrt(in.h1u);
  n.energy_abs = std::sqrt(std::max(0.0, in.ene));
  n.energy_exact = std::sqrt(std::max(0.0, in.enu));
  n.triple_abs = std::sqrt(std::max(0.0, in.ene + be.eta + 2.0 * be.pen));
  // The penalty part of the exact field's triple norm grows without bound as
  // h shrinks, so the energy norm serves as the reference for both.
  n.triple_exact = n.energy_exact;
  n.l2 = safe_ratio(n.l2_abs, n.l2_exact);
  n.h1 = safe_ratio(n.h1_abs, n.h1_exact);
  n.energy = safe_ratio(n.energy_abs, n.energy_exact);
  n.triple = safe_ratio(n.triple_abs, n.triple_exact);
  return n;
}

double relative_l2_error(const Discretization& disc, const Eigen::VectorXd& x) {
  const InteriorSums in = interior_norm_terms(disc, coefficients_from_dofs(x), false);
  return std::sqrt(safe_ratio(in.l2e, in.l2u));
}

RateFit fit_rate(const std::vector<double>& h, const std::vector<double>& err, int tail) {
  if (h.size() != err.size()) throw Error(ErrorKind::Domain, "fit_rate: size mismatch");
  RateFit f;
  const size_t n = h.size();
  f.flagged.assign(n, false);
  for (size_t i = 1; i < n; ++i) {
    if (!(h[i] < h[i - 1])) throw Error(ErrorKind::Domain, "fit_rate: h must decrease");
    if (err[i] > err[i - 1]) f.flagged[i] = true;
  }
  std::vector<int> usable;
  for (size_t i = 0; i < n; ++i)
    if (!f.flagged[i] && err[i] > 0.0 && std::isfinite(err[i])) usable.push_back(static_cast<int>(i));
  if (usable.size() < 3) {
    std::ostringstream os;
    os << "fit_rate: " << usable.size() << " usable points, at least 3 are needed";
    throw Error(ErrorKind::InsufficientData, os.str());
  }
  if (tail > 0 && static_cast<int>(usable.size()) > tail) usable.erase(usable.begin(), usable.end() - tail);
  f.window = usable;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i : usable) {
    const double lx = std::log(h[i]), ly = std::log(err[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double m = static_cast<double>(usable.size());
  f.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  f.intercept = (sy - f.slope * sx) / m;
  return f;
}

RecoveredMultiplier recover_multiplier(const Discretization& disc, const Eigen::VectorXd& x, const LoadData& loads,
                                       const PenaltyConfig& pen, ErsatzVariant variant) {
  loads.validate(disc.rule);
  const std::vector<Vec3d> coeffs = coefficients_from_dofs(x);
  const Material& mat = disc.spec.material;
  const double cmag = mat.c_magnitude();
  const double z = mat.zeta, z3c = z * z * z * cmag;
  const auto cp = pen.cpen();
  RecoveredMultiplier r;
  for (int e = 0; e < 4; ++e) {
    const Edge edge = static_cast<Edge>(e);
    const BoundaryType bt = disc.spec.edge_type(edge);
    if (!is_d1(bt) && !is_d2(bt)) continue;
    const EdgeLoad& el = loads.edges[e];
    for (int k = 0; k < disc.rule.num_edge(); ++k) {
      const auto xi = edge_point(edge, disc.rule.points[k]);
      const SurfaceFrame f = build_frame<double>(eval_surface(disc.patch, xi[0], xi[1], 3), true);
      const EdgeFrame ef = build_edge_frame(f, edge);
      const SurfaceJet u = eval_field(disc.patch, coeffs, xi[0], xi[1], 3);
      const Kinematics<double> kin = kinematics(f, u, true);
      const BoundaryActions<double> ba = boundary_actions(f, ef, elasticity(f, mat), kin, mat, variant);
      const double h = disc.topo.edge_h(edge, k / disc.rule.nq);
      MultiplierPoint mp;
      mp.xi1 = xi[0];
      mp.xi2 = xi[1];
      if (is_d1(bt)) {
        const Vec3d d = u.x() - el.u[k];
        const double d3 = dot(f.a3, d);
        const Vec3d dbar = d - f.a3 * d3;
        mp.force = -ba.T + f.a3 * (cp[0] * z3c / (h * h * h) * d3) + dbar * (cp[3] * z * cmag / h);
      }
      if (is_d2(bt)) {
        mp.moment = -ba.Bnn + cp[2] * z3c / h * (rotation_n(f, ef, kin) - el.theta_n[k]);
      }
      r.edges[e].push_back(mp);
    }
  }
  for (const auto& info : corner_table()) {
    const int c = static_cast<int>(info.corner);
    if (!disc.spec.corner_dirichlet(info.corner)) continue;
    const double h = disc.topo.corner_h(info.corner);
    const SurfaceFrame f = build_frame<double>(eval_surface(disc.patch, info.xi1, info.xi2, 3), true);
    const SurfaceJet u = eval_field(disc.patch, coeffs, info.xi1, info.xi2, 3);
    const Kinematics<double> kin = kinematics(f, u, true);
    const ElasticityTensor<double> ct = elasticity(f, mat);
    const double jump = corner_jump(boundary_actions(f, build_edge_frame(f, info.before), ct, kin, mat).Bnt,
                                    boundary_actions(f, build_edge_frame(f, info.after), ct, kin, mat).Bnt);
    const double d3 = dot(f.a3, u.x() - loads.corners[c].u);
    r.corners[c] = -jump + cp[1] * z3c / (h * h) * d3;
    r.corner_active[c] = true;
  }
  return r;
}

std::vector<IdentityResult> verify_green_identity(const ProblemSpec& spec, int degree, int mesh, int pairs,
                                                  std::uint64_t seed, ErsatzVariant variant) {
  const Discretization disc = make_discretization(spec, degree, mesh);
  const Eigen::MatrixXd K = assemble_stiffness(disc);
  const Material& mat = spec.material;
  const int n = disc.num_dofs();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  const auto& rule = disc.rule;
  const int n1d = rule.n1d();
  std::vector<IdentityResult> out;
  for (int p = 0; p < pairs; ++p) {
    Eigen::VectorXd w(n), v(n);
    for (int i = 0; i < n; ++i) w(i) = dist(rng);
    for (int i = 0; i < n; ++i) v(i) = dist(rng);
    const auto wc = coefficients_from_dofs(w), vc = coefficients_from_dofs(v);
    IdentityResult res;
    res.a = v.dot(K * w);
    std::vector<double> rows(n1d), rows_abs(n1d);
#pragma omp parallel for schedule(dynamic, 1)
    for (int k2 = 0; k2 < n1d; ++k2) {
      double s = 0.0, sa = 0.0;
      for (int k1 = 0; k1 < n1d; ++k1) {
        const double x1 = rule.points[k1], x2 = rule.points[k2];
        const SurfaceJet g = eval_surface(disc.patch, x1, x2, 4);
        const SurfaceJet wj = eval_field(disc.patch, wc, x1, x2, 4);
        const SurfaceJet vj = eval_field(disc.patch, vc, x1, x2, 0);
        const StrongFormLoad<double> f = strong_form_load<double>(g, wj, mat);
        const SurfaceFrame fr = build_frame<double>(g, false);
        const double t = rule.weights[k1] * rule.weights[k2] * fr.det_a * dot(f.f, vj.x());
        s += t;
        sa += std::fabs(t);
      }
      rows[k2] = s;
      rows_abs[k2] = sa;
    }
    double interior = 0.0, scale = 0.0;
    for (int k = 0; k < n1d; ++k) {
      interior += rows[k];
      scale += rows_abs[k];
    }
    double boundary = 0.0;
    for (int e = 0; e < 4; ++e) {
      const Edge edge = static_cast<Edge>(e);
      for (int k = 0; k < rule.num_edge(); ++k) {
        const auto xi = edge_point(edge, rule.points[k]);
        const SurfaceFrame f = build_frame<double>(eval_surface(disc.patch, xi[0], xi[1], 3), true);
        const EdgeFrame ef = build_edge_frame(f, edge);
        const Kinematics<double> kw = kinematics(f, eval_field(disc.patch, wc, xi[0], xi[1], 3), true);
        const Kinematics<double> kv = kinematics(f, eval_field(disc.patch, vc, xi[0], xi[1], 3), false);
        const SurfaceJet vj = eval_field(disc.patch, vc, xi[0], xi[1], 0);
        const BoundaryActions<double> ba = boundary_actions(f, ef, elasticity(f, mat), kw, mat, variant);
        const double W = rule.weights[k] * ef.s_norm;
        const double t = W * (dot(ba.T, vj.x()) + ba.Bnn * rotation_n(f, ef, kv));
        boundary += t;
        scale += std::fabs(t);
      }
    }
    for (const auto& info : corner_table()) {
      const SurfaceFrame f = build_frame<double>(eval_surface(disc.patch, info.xi1, info.xi2, 3), true);
      const Kinematics<double> kw = kinematics(f, eval_field(disc.patch, wc, info.xi1, info.xi2, 3), true);
      const ElasticityTensor<double> c = elasticity(f, mat);
      const double jump = corner_jump(boundary_actions(f, build_edge_frame(f, info.before), c, kw, mat).Bnt,
                                      boundary_actions(f, build_edge_frame(f, info.after), c, kw, mat).Bnt);
      const double t = jump * dot(f.a3, eval_field(disc.patch, vc, info.xi1, info.xi2, 0).x());
      boundary += t;
      scale += std::fabs(t);
    }
    res.rhs = interior + boundary;
    res.residual = std::fabs(res.a - res.rhs);
    res.tolerance = 1e-6 * std::fabs(res.a) + 1e-12 * scale;
    res.pass = res.residual <= res.tolerance;
    out.push_back(res);
  }
  return out;
}

// ---------------------------------------------------------------- studies

void StudyConfig::validate() const {
  std::vector<std::string> bad;
  if (problems.empty()) bad.push_back("problem list is empty");
  for (int p : problems)
    if (p < 1 || p > 8) bad.push_back("problem " + std::to_string(p) + " is not in 1..8");
  if (degrees.empty()) bad.push_back("degree list is empty");
  for (int d : degrees)
    if (d < 2 || d > 8) bad.push_back("degree " + std::to_string(d) + " is not in 2..8");
  if (meshes.empty()) bad.push_back("mesh list is empty");
  for (int m : meshes)
    if (m < 1 || m > 128) bad.push_back("mesh " + std::to_string(m) + " is not in 1..128");
  for (int i = 0; i < 4; ++i)
    if (!(gammas[i] > 1.0)) bad.push_back("gamma_" + std::to_string(i + 1) + " must exceed 1");
  if (quadrature_points < 0) bad.push_back("quadrature points must be non-negative");
  if (trace_mesh < 1) bad.push_back("trace mesh must be positive");
  if (refinement_iters < 0) bad.push_back("refinement iterations must be non-negative");
  if (!bad.empty()) {
    std::string msg = "invalid configuration:";
    for (const auto& b : bad) msg += "\n  - " + b;
    throw Error(ErrorKind::Validation, msg);
  }
}

namespace {

struct StudyCaches {
  std::map<std::tuple<int, int, int>, LoadData> loads;                // (problem, mesh, nq)
  std::map<std::tuple<int, int, int>, TraceConstants> trace;          // (problem, degree, variant)
};

const LoadData& cached_loads(StudyCaches* caches, const StudyConfig& cfg, const Discretization& disc, LoadData& local) {
  const auto key = std::make_tuple(disc.spec.id, disc.mesh, disc.rule.nq);
  if (caches) {
    auto it = caches->loads.find(key);
    if (it != caches->loads.end()) return it->second;
  }
  LoadData d;
  if (!cfg.load_data_dir.empty()) {
    std::ostringstream name;
    name << "load_P" << disc.spec.id << "_m" << disc.mesh << "_q" << disc.rule.nq << ".json";
    d = import_load_data((std::filesystem::path(cfg.load_data_dir) / name.str()).string(), disc.spec.id, disc.rule);
  } else {
    d = generate_load_data(disc.spec, disc.rule, disc.degree);
  }
  if (caches) {
    // Drop the cache once it holds a few grids to bound memory on large sweeps.
    if (caches->loads.size() > 4) caches->loads.clear();
    return caches->loads.emplace(key, std::move(d)).first->second;
  }
  local = std::move(d);
  return local;
}

CellResult run_cell_impl(const StudyConfig& cfg, int problem, int degree, int mesh, StudyCaches* caches) {
  CellResult c;
  c.problem = problem;
  c.degree = degree;
  c.mesh = mesh;
  c.variant = cfg.variant;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const ProblemSpec spec = get_problem(problem);
    const auto tkey = std::make_tuple(problem, degree, static_cast<int>(cfg.variant));
    if (caches && caches->trace.count(tkey)) {
      c.trace = caches->trace.at(tkey);
    } else {
      c.trace = cached_trace_constants(cfg.cache_dir, spec, degree, cfg.trace_mesh, cfg.variant, cfg.force_trace);
      if (caches) caches->trace[tkey] = c.trace;
    }
    const PenaltyConfig pen = compute_penalties(c.trace, cfg.gammas, cfg.convention);
    const Discretization disc = make_discretization(spec, degree, mesh, cfg.quadrature_points);
    LoadData local;
    const LoadData& loads = cached_loads(caches, cfg, disc, local);
    AssemblyOptions opt;
    opt.variant = cfg.variant;
    const AssembledSystem sys = assemble(disc, &loads, pen, opt);
    const SolveReport rep = solve_spd(sys.K, sys.F, cfg.refinement_iters);
    c.norms = error_norms(disc, rep.x, pen);
    c.h = *std::max_element(disc.topo.h.begin(), disc.topo.h.end());
    c.dofs = disc.num_dofs();
    c.final_residual = rep.residuals.back();
    c.ok = true;
  } catch (const std::exception& e) {
    c.ok = false;
    c.error = e.what();
  }
  c.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return c;
}

double norm_value(const ErrorNorms& n, const std::string& which) {
  if (which == "l2") return n.l2;
  if (which == "h1") return n.h1;
  if (which == "energy") return n.energy;
  return n.triple;
}

const char* variant_name(ErsatzVariant v) { return v == ErsatzVariant::Consistent ? "consistent" : "inconsistent"; }

}  // namespace

CellResult run_cell(const StudyConfig& cfg, int problem, int degree, int mesh) {
  cfg.validate();
  return run_cell_impl(cfg, problem, degree, mesh, nullptr);
}

std::vector<RateSummary> summarize_rates(const std::vector<CellResult>& cells) {
  std::map<std::pair<int, int>, std::vector<const CellResult*>> groups;
  for (const auto& c : cells) groups[{c.problem, c.degree}].push_back(&c);
  std::vector<RateSummary> out;
  for (auto& [key, list] : groups) {
    std::sort(list.begin(), list.end(), [](auto* a, auto* b) { return a->mesh < b->mesh; });
    for (const char* norm : {"l2", "h1", "energy", "triple"}) {
      RateSummary s;
      s.problem = key.first;
      s.degree = key.second;
      s.norm = norm;
      std::vector<double> h, e;
      for (const auto* c : list) {
        if (!c->ok) continue;
        h.push_back(1.0 / c->mesh);
        e.push_back(norm_value(c->norms, norm));
      }
      try {
        s.fit = fit_rate(h, e);
        s.ok = true;
      } catch (const std::exception& ex) {
        s.error = ex.what();
      }
      out.push_back(s);
    }
  }
  return out;
}

ConvergenceReport run_study(const StudyConfig& cfg) {
  cfg.validate();
  ConvergenceReport r;
  r.config = cfg;
  StudyCaches caches;
  for (int p : cfg.problems)
    for (int d : cfg.degrees)
      for (int m : cfg.meshes) r.cells.push_back(run_cell_impl(cfg, p, d, m, &caches));
  r.rates = summarize_rates(r.cells);
  return r;
}

std::string report_to_csv(const ConvergenceReport& r) {
  std::ostringstream os;
  os << "# kls " << version_string() << "\n";
  os << "problem,degree,mesh,variant,norm,relative_error,absolute_error,h_max,dofs,status\n";
  for (const auto& c : r.cells) {
    const std::pair<const char*, std::pair<double, double>> rows[] = {
        {"l2", {c.norms.l2, c.norms.l2_abs}},
        {"h1", {c.norms.h1, c.norms.h1_abs}},
        {"energy", {c.norms.energy, c.norms.energy_abs}},
        {"triple", {c.norms.triple, c.norms.triple_abs}}};
    for (const auto& [name, v] : rows) {
      os << c.problem << ',' << c.degree << ',' << c.mesh << ',' << variant_name(c.variant) << ',' << name << ','
         << format_double(c.ok ? v.first : std::nan("")) << ',' << format_double(c.ok ? v.second : std::nan(""))
         << ',' << format_double(c.h) << ',' << c.dofs << ',' << (c.ok ? "ok" : "failed") << '\n';
    }
  }
  return os.str();
}

std::string report_to_json(const ConvergenceReport& r) {
  using nlohmann::json;
  json j;
  j["version"] = version_string();
  json cfg;
  cfg["problems"] = r.config.problems;
  cfg["degrees"] = r.config.degrees;
  cfg["meshes"] = r.config.meshes;
  cfg["gammas"] = r.config.gammas;
  cfg["quadrature_points"] = r.config.quadrature_points;
  cfg["variant"] = variant_name(r.config.variant);
  cfg["convention"] = convention_name(r.config.convention);
  cfg["trace_mesh"] = r.config.trace_mesh;
  cfg["refinement_iters"] = r.config.refinement_iters;
  j["config"] = cfg;
  json cells = json::array();
  for (const auto& c : r.cells) {
    json cj;
    cj["problem"] = c.problem;
    cj["degree"] = c.degree;
    cj["mesh"] = c.mesh;
    cj["variant"] = variant_name(c.variant);
    cj["ok"] = c.ok;
    if (!c.ok) cj["error"] = c.error;
    cj["l2"] = format_double(c.norms.l2);
    cj["h1"] = format_double(c.norms.h1);
    cj["energy"] = format_double(c.norms.energy);
    cj["triple"] = format_double(c.norms.triple);
    cj["h_max"] = format_double(c.h);
    cj["dofs"] = c.dofs;
    cj["final_residual"] = format_double(c.final_residual);
    cj["seconds"] = format_double(c.seconds);
    json lam = json::array();
    for (double l : c.trace.lambda_max) lam.push_back(format_double(l));
    cj["lambda_max"] = lam;
    cells.push_back(cj);
  }
  j["cells"] = cells;
  json rates = json::array();
  for (const auto& s : r.rates) {
    json sj;
    sj["problem"] = s.problem;
    sj["degree"] = s.degree;
    sj["norm"] = s.norm;
    sj["ok"] = s.ok;
    if (s.ok) {
      sj["slope"] = format_double(s.fit.slope);
      sj["window"] = s.fit.window;
      sj["flagged"] = s.fit.flagged;
    } else {
      sj["error"] = s.error;
    }
    rates.push_back(sj);
  }
  j["rates"] = rates;
  return j.dump(2);
}

std::string report_to_svg(const ConvergenceReport& r, int problem, const std::string& norm) {
  struct Series {
    int degree;
    std::vector<std::pair<double, double>> pts;
  };
  std::vector<Series> series;
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (int d : r.config.degrees) {
    Series s{d, {}};
    for (const auto& c : r.cells) {
      if (c.problem != problem || c.degree != d || !c.ok) continue;
      const double e = norm_value(c.norms, norm);
      if (!(e > 0.0)) continue;
      const double lx = std::log10(1.0 / c.mesh), ly = std::log10(e);
      s.pts.push_back({lx, ly});
      xmin = std::min(xmin, lx);
      xmax = std::max(xmax, lx);
      ymin = std::min(ymin, ly);
      ymax = std::max(ymax, ly);
    }
    if (!s.pts.empty()) series.push_back(s);
  }
  const double W = 640, H = 480, L = 70, R = 130, T = 40, B = 60;
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">"
     << "Problem " << problem << ", relative " << norm << " error (" << version_string() << ")</text>\n";
  if (series.empty()) {
    os << "<text x=\"" << W / 2 << "\" y=\"" << H / 2 << "\" text-anchor=\"middle\">no data</text>\n</svg>\n";
    return os.str();
  }
  if (xmax - xmin < 1e-9) {
    xmin -= 0.5;
    xmax += 0.5;
  }
  ymin = std::floor(ymin);
  ymax = std::ceil(ymax);
  if (ymax - ymin < 1) ymax = ymin + 1;
  auto px = [&](double x) { return L + (x - xmin) / (xmax - xmin) * (W - L - R); };
  auto py = [&](double y) { return T + (ymax - y) / (ymax - ymin) * (H - T - B); };
  os << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\"" << H - T - B
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int y = static_cast<int>(ymin); y <= static_cast<int>(ymax); ++y) {
    os << "<text x=\"" << L - 8 << "\" y=\"" << py(y) + 4 << "\" text-anchor=\"end\" font-size=\"11\">1e" << y
       << "</text>\n";
  }
  for (const auto& c : r.config.meshes) {
    const double lx = std::log10(1.0 / c);
    if (lx < xmin - 1e-12 || lx > xmax + 1e-12) continue;
    os << "<text x=\"" << px(lx) << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\" font-size=\"11\">1/" << c
       << "</text>\n";
  }
  os << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 18 << "\" text-anchor=\"middle\" font-size=\"12\">h"
     << "</text>\n";
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2"};
  int ci = 0;
  for (const auto& s : series) {
    const char* col = colors[ci++ % 7];
    os << "<polyline fill=\"none\" stroke=\"" << col << "\" stroke-width=\"2\" points=\"";
    for (const auto& [x, y] : s.pts) os << px(x) << ',' << py(y) << ' ';
    os << "\"/>\n";
    for (const auto& [x, y] : s.pts)
      os << "<circle cx=\"" << px(x) << "\" cy=\"" << py(y) << "\" r=\"4\" fill=\"" << col << "\"/>\n";
    // Reference slope anchored at the coarsest point.
    const int d = s.degree;
    const double rate = norm == "l2" ? std::min(d + 1, 2 * d - 2) : (norm == "h1" ? d : d - 1);
    const auto& p0 = s.pts.front();
    const double x1 = s.pts.back().first;
    os << "<line x1=\"" << px(p0.first) << "\" y1=\"" << py(p0.second) << "\" x2=\"" << px(x1) << "\" y2=\""
       << py(std::max(ymin, p0.second + rate * (x1 - p0.first))) << "\" stroke=\"" << col
       << "\" stroke-dasharray=\"6,4\"/>\n";
    os << "<text x=\"" << W - R + 10 << "\" y=\"" << T + 20 * ci << "\" font-size=\"12\" fill=\"" << col << "\">p = "
       << d << " (ref " << rate << ")</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

namespace {

void write_atomic(const std::filesystem::path& path, const std::string& text) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw Error(ErrorKind::Validation, "cannot write '" + tmp + "'");
    out << text;
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace

void write_report(const ConvergenceReport& r, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  write_atomic(fs::path(dir) / "report.csv", report_to_csv(r));
  write_atomic(fs::path(dir) / "report.json", report_to_json(r));
  for (int p : r.config.problems)
    for (const char* norm : {"l2", "energy"}) {
      std::ostringstream name;
      name << "problem" << p << "_" << norm << ".svg";
      write_atomic(fs::path(dir) / name.str(), report_to_svg(r, p, norm));
    }
}

}  // namespace kls
