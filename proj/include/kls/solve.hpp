// Dense symmetric solves with extended-precision iterative refinement and the
// symmetric (generalized) eigensolver.
#pragma once

#include <vector>

#include <Eigen/Dense>

namespace kls {

struct SolveReport {
  Eigen::VectorXd x;
  // ||F - K x||_2 / ||F||_2 of the returned solution after the initial solve
  // (entry 0) and after each refinement step; non-increasing.
  std::vector<double> residuals;
  // The same norm for every iterate, accepted or not.
  std::vector<double> iterate_residuals;
  int refinement_steps = 0;
};

// Cholesky factorization once, then up to `refinement_iters` corrections with
// residuals accumulated in double-double. Stops early on a zero residual. The
// iterate with the smallest residual is returned.
// Throws NotSpdError with the failing pivot when K is not positive definite.
SolveReport solve_spd(const Eigen::MatrixXd& K, const Eigen::VectorXd& F, int refinement_iters = 3);

// r = F - K x with every dot product accumulated in double-double.
Eigen::VectorXd residual_dd(const Eigen::MatrixXd& K, const Eigen::VectorXd& x, const Eigen::VectorXd& F);

// Eigenvalues (ascending) of A v = lambda B v with B symmetric positive
// definite, or of A alone when B is empty.
Eigen::VectorXd sym_gen_eig(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B = Eigen::MatrixXd());

// Full eigen-decomposition; columns of `vectors` are B-orthonormal.
void sym_gen_eig_vectors(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, Eigen::VectorXd& values,
                         Eigen::MatrixXd& vectors);

}  // namespace kls
