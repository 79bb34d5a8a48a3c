// Trace constants from generalized eigenproblems (A - lambda B) x = 0, where
// A is a boundary form weighted by element size and B is the bilinear form a,
// and the penalty constants derived from them.
#pragma once

#include <array>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "kls/assembly.hpp"

namespace kls {

// Proved: C_tr = 5 lambda_max (satisfies the trace inequalities as stated).
// PaperLiteral: C_tr = lambda_max / 5.
enum class TraceConvention { Proved, PaperLiteral };
const char* convention_name(TraceConvention c);

struct TraceConstants {
  int problem_id = 0;
  int degree = 0;
  int mesh = 0;
  ErsatzVariant variant = ErsatzVariant::Consistent;
  std::array<double, 5> lambda_max{};
  std::array<bool, 5> active{};  // false when the boundary set of the inequality is empty

  std::array<double, 5> ctr(TraceConvention c = TraceConvention::Proved) const;
};

// Boundary matrix A of inequality `which` (1..5):
//   1: D1 edges, h^3/(zeta^3 |C|) T3 T3
//   2: Dirichlet corners, h^2/(zeta^3 |C|) [B_nt] [B_nt]
//   3: D2 edges, h/(zeta^3 |C|) B_nn B_nn
//   4: D1 edges, h/(zeta^3 |C|) T^(B) . T^(B)
//   5: D1 edges, h/(zeta |C|) T^(A) . T^(A)
Eigen::MatrixXd assemble_trace_matrix(const Discretization& disc, int which,
                                      ErsatzVariant variant = ErsatzVariant::Consistent);

// (A, B) with B = assembled a.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> assemble_trace_pencil(const Discretization& disc, int which,
                                                                  ErsatzVariant variant = ErsatzVariant::Consistent);

struct FiniteEigenResult {
  double lambda = 0.0;      // largest finite eigenvalue at delta
  double lambda_fine = 0.0; // same eigenvalue at delta / 10
  int infinite = 0;         // eigenvalues discarded as infinite
};

// Regularizes B by delta * tr(B)/n * I, repeats with delta/10, discards the
// eigenvalues that grow with 1/delta and checks that the largest remaining
// one moves by less than 1%. Throws Eigen on failure.
FiniteEigenResult largest_finite_eigenvalue(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                            double delta = 1e-10);

TraceConstants compute_trace_constants(const Discretization& disc, ErsatzVariant variant = ErsatzVariant::Consistent);

// Rejects gamma <= 1.
PenaltyConfig compute_penalties(const TraceConstants& tc, const std::array<double, 4>& gammas = {2, 2, 2, 2},
                                TraceConvention conv = TraceConvention::Proved);

std::string trace_constants_to_json(const TraceConstants& tc);
TraceConstants trace_constants_from_json(const std::string& text);

// Constants for (problem, degree, mesh, variant), read from a JSON sidecar in
// cache_dir when present unless `force`, computed and written otherwise.
// An empty cache_dir disables caching.
TraceConstants cached_trace_constants(const std::string& cache_dir, const ProblemSpec& spec, int degree, int mesh,
                                      ErsatzVariant variant, bool force = false);

}  // namespace kls
