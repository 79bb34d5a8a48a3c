// Acceptance run: evaluates every acceptance criterion at desk scale and
// prints one PASS/FAIL line per criterion. Arguments select a subset of
// criteria by number; with none, all nine run. Exits 1 if any selected
// criterion fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <set>
#include <sstream>
#include <string>

#include "test_util.hpp"

namespace kls {
namespace {

// Pinned tolerances.
constexpr double kRateBand = 0.3;
constexpr double kInSpanP5 = 1e-9;
constexpr double kInSpanP3 = 1e-7;
constexpr double kSymmetry = 1e-12;
constexpr double kTraceDrift = 0.25;
constexpr double kElasticity = 1e-12;
constexpr double kRigid = 1e-12;
constexpr double kRefinementGain = 1e3;
constexpr std::uint64_t kIdentitySeed = 20240611;

struct Outcome {
  bool pass = true;
  std::ostringstream log;

  void check(bool ok, const std::string& what) {
    if (!ok) pass = false;
    log << "    " << (ok ? "ok   " : "FAIL ") << what << '\n';
  }
};

std::string fmt(double v, int prec = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", prec, v);
  return buf;
}

const RateSummary* find_rate(const ConvergenceReport& r, int problem, int degree, const std::string& norm) {
  for (const auto& s : r.rates)
    if (s.problem == problem && s.degree == degree && s.norm == norm) return &s;
  return nullptr;
}

void check_slope(Outcome& o, const ConvergenceReport& r, int problem, int degree, const std::string& norm,
                 double target) {
  std::ostringstream what;
  what << "P" << problem << " p=" << degree << " " << norm << " target " << target;
  const RateSummary* s = find_rate(r, problem, degree, norm);
  if (!s) {
    o.check(false, what.str() + ": no cells");
    return;
  }
  if (!s->ok) {
    o.check(false, what.str() + ": " + s->error);
    return;
  }
  what << " slope " << fmt(s->fit.slope);
  o.check(std::fabs(s->fit.slope - target) <= kRateBand, what.str());
}

void report_failed_cells(Outcome& o, const ConvergenceReport& r) {
  for (const auto& c : r.cells)
    if (!c.ok) o.check(false, "P" + std::to_string(c.problem) + " p=" + std::to_string(c.degree) + " m=" +
                                  std::to_string(c.mesh) + ": " + c.error);
}

// Criteria 1 and 2 share one consistent study.
const ConvergenceReport& consistent_study() {
  static const ConvergenceReport r = [] {
    StudyConfig c;
    c.problems = {1, 2, 3, 4, 5, 6, 7, 8};
    c.degrees = {2, 3, 4};
    c.meshes = {4, 8, 16, 32};
    return run_study(c);
  }();
  return r;
}

Outcome criterion1() {
  Outcome o;
  const ConvergenceReport& r = consistent_study();
  report_failed_cells(o, r);
  for (int p = 1; p <= 8; ++p)
    for (int d = 2; d <= 4; ++d) check_slope(o, r, p, d, "l2", std::min(d + 1, 2 * d - 2));
  return o;
}

Outcome criterion2() {
  Outcome o;
  const ConvergenceReport& r = consistent_study();
  for (int p = 1; p <= 8; ++p)
    for (int d = 2; d <= 4; ++d) check_slope(o, r, p, d, "energy", d - 1);
  return o;
}

Outcome criterion3() {
  Outcome o;
  StudyConfig c;
  for (int d = 2; d <= 4; ++d) {
    const CellResult r = run_cell(c, 5, d, 4);
    o.check(r.ok && r.norms.l2 <= kInSpanP5,
            "P5 p=" + std::to_string(d) + " m=4 L2 " + (r.ok ? fmt(r.norms.l2) : r.error) + " <= " + fmt(kInSpanP5));
  }
  const CellResult r = run_cell(c, 3, 6, 2);
  o.check(r.ok && r.norms.l2 <= kInSpanP3, "P3 p=6 m=2 L2 " + (r.ok ? fmt(r.norms.l2) : r.error) + " <= " + fmt(kInSpanP3));
  return o;
}

Outcome criterion4() {
  Outcome o;
  StudyConfig c;
  c.variant = ErsatzVariant::Inconsistent;
  c.problems = {5};
  c.degrees = {2, 3, 4};
  c.meshes = {4, 8, 16, 32};
  const ConvergenceReport r5 = run_study(c);
  report_failed_cells(o, r5);
  for (int d = 2; d <= 4; ++d) {
    check_slope(o, r5, 5, d, "energy", 0.5);
    check_slope(o, r5, 5, d, "l2", 1.5);
  }
  // Loss of in-span exactness: the coarsest inconsistent error fails the
  // bound that the consistent method meets in criterion 3.
  for (const auto& cell : r5.cells)
    if (cell.mesh == 4 && cell.ok)
      o.check(cell.norms.l2 > kInSpanP5,
              "P5 p=" + std::to_string(cell.degree) + " m=4 inconsistent L2 " + fmt(cell.norms.l2) + " > " + fmt(kInSpanP5));
  // Problem 3 reaches its inconsistent regime at p=4 on meshes up to 64.
  c.problems = {3};
  c.degrees = {4};
  c.meshes = {8, 16, 32, 64};
  const ConvergenceReport r3 = run_study(c);
  report_failed_cells(o, r3);
  check_slope(o, r3, 3, 4, "energy", 0.5);
  check_slope(o, r3, 3, 4, "l2", 1.5);
  return o;
}

Outcome criterion5() {
  Outcome o;
  for (int id = 1; id <= 8; ++id) {
    const auto res = verify_green_identity(get_problem(id), 4, 2, 5, kIdentitySeed);
    double worst = 0.0;
    bool all = true;
    for (const auto& r : res) {
      all = all && r.pass;
      worst = std::max(worst, r.residual / std::max(std::fabs(r.a), 1e-300));
    }
    o.check(all && res.size() == 5, "P" + std::to_string(id) + " 5 pairs, worst |residual|/|a| " + fmt(worst));
  }
  return o;
}

Outcome criterion6() {
  Outcome o;
  for (int id = 1; id <= 8; ++id) {
    const Discretization d = make_discretization(get_problem(id), 2, 4);
    const PenaltyConfig pen = compute_penalties(compute_trace_constants(d), {2, 2, 2, 2});
    const AssembledSystem s = assemble(d, nullptr, pen);
    const double asym = (s.K - s.K.transpose()).cwiseAbs().maxCoeff() / s.K.cwiseAbs().maxCoeff();
    const double lmin = sym_gen_eig(s.K)(0);
    o.check(asym <= kSymmetry && lmin > 0.0,
            "P" + std::to_string(id) + " asymmetry " + fmt(asym) + ", min eigenvalue " + fmt(lmin));
  }
  return o;
}

Outcome criterion7() {
  Outcome o;
  for (int id : {1, 3}) {
    const ProblemSpec spec = get_problem(id);
    const TraceConstants a = compute_trace_constants(make_discretization(spec, 2, 4));
    const TraceConstants b = compute_trace_constants(make_discretization(spec, 2, 16));
    for (int i = 0; i < 5; ++i) {
      if (!a.active[i]) continue;
      const double ref = std::max(a.lambda_max[i], b.lambda_max[i]);
      const double drift = ref == 0.0 ? 0.0 : std::fabs(b.lambda_max[i] - a.lambda_max[i]) / a.lambda_max[i];
      o.check(drift < kTraceDrift, "P" + std::to_string(id) + " lambda_" + std::to_string(i + 1) + " " +
                                       fmt(a.lambda_max[i]) + " -> " + fmt(b.lambda_max[i]) + " drift " + fmt(drift));
    }
  }
  return o;
}

Outcome criterion8() {
  Outcome o;
  const SurfaceFrame f = build_frame(eval_surface(get_problem(5).patch, 0.3, 0.7, 2));
  for (double nu : {0.0, 0.3, 0.5 - 1e-6}) {
    const Material m{1.0e7, nu, 0.1};
    const double contracted = elasticity_magnitude_sq(f, elasticity(f, m));
    const double closed = m.c_magnitude() * m.c_magnitude();
    const double rel = std::fabs(contracted - closed) / closed;
    o.check(rel <= kElasticity, "|C|^2 nu=" + fmt(nu, 7) + " relative mismatch " + fmt(rel));
  }
  for (int id = 1; id <= 8; ++id) {
    const Discretization d = make_discretization(get_problem(id), 2, 4);
    const Eigen::MatrixXd K = assemble_stiffness(d);
    for (int dir = 0; dir < 3; ++dir) {
      Eigen::VectorXd t = Eigen::VectorXd::Zero(d.num_dofs());
      for (int k = 0; k < d.num_basis(); ++k) t(dof_index(k, dir)) = 1.0;
      const double e = std::fabs(t.dot(K * t));
      const double scale = K.cwiseAbs().maxCoeff() * t.squaredNorm();
      o.check(e <= kRigid * scale, "P" + std::to_string(id) + " translation e" + std::to_string(dir + 1) +
                                       " energy/scale " + fmt(e / scale));
    }
  }
  for (int id : {1, 2}) {
    const Discretization d = make_discretization(get_problem(id), 3, 2);
    double worst = 0.0;
    for (int e = 0; e < 4; ++e)
      for (int k = 0; k < d.rule.num_edge(); ++k)
        for (const BoundaryDof& bd : eval_boundary_point(d, static_cast<Edge>(e), k, ErsatzVariant::Consistent).dofs)
          worst = std::max({worst, std::fabs(bd.ba.TB[0]), std::fabs(bd.ba.TB[1])});
    o.check(worst == 0.0, "P" + std::to_string(id) + " flat T^(B) max " + fmt(worst));
  }
  return o;
}

Outcome criterion9() {
  Outcome o;
  const test::ExactSystem s = test::ill_conditioned_system();
  const SolveReport r0 = solve_spd(s.K, s.F, 0);
  const SolveReport r3 = solve_spd(s.K, s.F, 3);
  const double before = residual_dd(s.K, r0.x, s.F).norm();
  const double after = residual_dd(s.K, r3.x, s.F).norm();
  const bool ok = before > 0.0 && (after == 0.0 || before / after >= kRefinementGain);
  o.check(ok, "residual " + fmt(before) + " -> " + fmt(after) + " after 3 refinement steps");
  const double err0 = (r0.x - s.x).norm() / s.x.norm(), err3 = (r3.x - s.x).norm() / s.x.norm();
  o.log << "    info forward error " << fmt(err0) << " -> " << fmt(err3) << '\n';
  return o;
}

}  // namespace
}  // namespace kls

int main(int argc, char** argv) {
  using namespace kls;
  const std::function<Outcome()> criteria[9] = {criterion1, criterion2, criterion3, criterion4, criterion5,
                                                criterion6, criterion7, criterion8, criterion9};
  const char* names[9] = {"optimal L2 rates",
                          "optimal energy rates",
                          "in-span exactness",
                          "inconsistent-variant negative control",
                          "Green's identity",
                          "symmetry and positive definiteness",
                          "trace-constant robustness",
                          "mechanics oracles",
                          "iterative refinement"};
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) {
    const int k = std::atoi(argv[i]);
    if (k < 1 || k > 9) {
      std::fprintf(stderr, "unknown criterion '%s' (expected 1..9)\n", argv[i]);
      return 2;
    }
    selected.insert(k);
  }
  if (selected.empty())
    for (int k = 1; k <= 9; ++k) selected.insert(k);

  bool all = true;
  for (int k : selected) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[k - 1]();
    } catch (const std::exception& e) {
      o.check(false, std::string("exception: ") + e.what());
    }
    const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %d: %s - %s (%.1f s)\n%s", k, o.pass ? "PASS" : "FAIL", names[k - 1], sec,
                o.log.str().c_str());
    std::fflush(stdout);
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
