// Error norms against exact fields, rate fitting, multiplier recovery, the
// Green's identity check, and convergence-study orchestration with reports.
#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "kls/assembly.hpp"
#include "kls/solve.hpp"
#include "kls/trace.hpp"

namespace kls {

// Discrete field sum_k c_k R_k from a dof vector (dof 3k + i).
std::vector<Vec3d> coefficients_from_dofs(const Eigen::VectorXd& x);

struct ErrorNorms {
  // Relative errors ||u_h - u|| / ||u||; the triple norm is taken relative to
  // the energy norm of u.
  double l2 = 0.0, h1 = 0.0, energy = 0.0, triple = 0.0;
  // Absolute error norms and exact-field norms.
  double l2_abs = 0.0, h1_abs = 0.0, energy_abs = 0.0, triple_abs = 0.0;
  double l2_exact = 0.0, h1_exact = 0.0, energy_exact = 0.0, triple_exact = 0.0;
};

// H1 uses ||v||^2 = l^-2 ||v||_0^2 + ||grad_s v||_0^2 with l the patch
// diameter; energy is sqrt(a(e,e)); the triple norm adds the boundary terms
// weighted by the trace and penalty constants of `pen`.
ErrorNorms error_norms(const Discretization& disc, const Eigen::VectorXd& x, const PenaltyConfig& pen);

// Relative L2 error only (cheaper).
double relative_l2_error(const Discretization& disc, const Eigen::VectorXd& x);

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  std::vector<bool> flagged;  // roundoff-dominated points
  std::vector<int> window;    // indices used in the fit
};

// Least-squares slope of log(err) against log(h) over the last `tail`
// unflagged points (all unflagged when tail <= 0). A point is flagged when its
// error exceeds that of the previous (coarser) point. h must decrease.
// Throws InsufficientData with fewer than 3 usable points.
RateFit fit_rate(const std::vector<double>& h, const std::vector<double>& err, int tail = 3);

struct MultiplierPoint {
  double xi1 = 0.0, xi2 = 0.0;
  Vec3d force;          // D1 edges: -T(u_h) + penalty (u_h - g)
  double moment = 0.0;  // D2 edges: -B_nn(u_h) + penalty (theta_n(u_h) - g)
};

struct RecoveredMultiplier {
  std::array<std::vector<MultiplierPoint>, 4> edges;  // empty unless the edge carries a Dirichlet condition
  std::array<double, 4> corners{};                    // Dirichlet corners only
  std::array<bool, 4> corner_active{};
};

RecoveredMultiplier recover_multiplier(const Discretization& disc, const Eigen::VectorXd& x, const LoadData& loads,
                                       const PenaltyConfig& pen, ErsatzVariant variant = ErsatzVariant::Consistent);

// Green's identity a(w,v) = <f(w), v> + <boundary actions of w, traces of v>
// for random discrete fields on the refined patch.
struct IdentityResult {
  double a = 0.0;         // a(w, v)
  double rhs = 0.0;       // interior plus boundary plus corner terms
  double residual = 0.0;  // |a - rhs|
  double tolerance = 0.0; // 1e-6 |a| + 1e-12 scale
  bool pass = false;
};

std::vector<IdentityResult> verify_green_identity(const ProblemSpec& spec, int degree, int mesh, int pairs,
                                                  std::uint64_t seed,
                                                  ErsatzVariant variant = ErsatzVariant::Consistent);

// One solve of the full pipeline.
struct CellResult {
  int problem = 0, degree = 0, mesh = 0;
  ErsatzVariant variant = ErsatzVariant::Consistent;
  bool ok = false;
  std::string error;
  ErrorNorms norms;
  double h = 0.0;  // largest element size
  int dofs = 0;
  double final_residual = 0.0;
  double seconds = 0.0;
  TraceConstants trace;
};

struct StudyConfig {
  std::vector<int> problems{1, 2, 3, 4, 5, 6, 7, 8};
  std::vector<int> degrees{2, 3, 4};
  std::vector<int> meshes{4, 8, 16, 32};
  std::array<double, 4> gammas{2, 2, 2, 2};
  int quadrature_points = 0;  // 0 = default rule
  ErsatzVariant variant = ErsatzVariant::Consistent;
  TraceConvention convention = TraceConvention::Proved;
  int trace_mesh = 4;         // coarse mesh on which trace constants are computed
  std::string cache_dir;      // trace-constant and load-data cache, empty = none
  std::string load_data_dir;  // import load data from here instead of generating
  bool force_trace = false;
  int refinement_iters = 3;

  void validate() const;  // throws Validation listing every problem found
};

CellResult run_cell(const StudyConfig& cfg, int problem, int degree, int mesh);

struct RateSummary {
  int problem = 0, degree = 0;
  std::string norm;  // "l2", "h1", "energy", "triple"
  bool ok = false;
  std::string error;
  RateFit fit;
};

struct ConvergenceReport {
  StudyConfig config;
  std::vector<CellResult> cells;  // ordered by (problem, degree, mesh)
  std::vector<RateSummary> rates;
};

// Cells run sequentially; assembly and load generation use OpenMP inside.
ConvergenceReport run_study(const StudyConfig& cfg);

// Rate fits for every (problem, degree) and norm present in the cells.
std::vector<RateSummary> summarize_rates(const std::vector<CellResult>& cells);

std::string report_to_csv(const ConvergenceReport& r);
std::string report_to_json(const ConvergenceReport& r);
// Log-log plot of one norm for one problem with reference slopes.
std::string report_to_svg(const ConvergenceReport& r, int problem, const std::string& norm);

// Writes CSV, JSON and one SVG per (problem, norm) atomically into dir.
void write_report(const ConvergenceReport& r, const std::string& dir);

}  // namespace kls
