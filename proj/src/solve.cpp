#include "kls/solve.hpp"

#include <sstream>

#include "kls/dd.hpp"
#include "kls/errors.hpp"

namespace kls {

Eigen::VectorXd residual_dd(const Eigen::MatrixXd& K, const Eigen::VectorXd& x, const Eigen::VectorXd& F) {
  const Eigen::Index n = K.rows();
  // Column-wise accumulation keeps memory access contiguous.
  std::vector<dd> acc(F.data(), F.data() + n);
  for (Eigen::Index j = 0; j < K.cols(); ++j) {
    const double xj = x(j);
    const double* col = K.col(j).data();
    for (Eigen::Index i = 0; i < n; ++i) acc[i] -= ddx::two_prod(col[i], xj);
  }
  Eigen::VectorXd r(n);
  for (Eigen::Index i = 0; i < n; ++i) r(i) = static_cast<double>(acc[i]);
  return r;
}

namespace {

void check_square(const Eigen::MatrixXd& A, const char* what) {
  if (A.rows() != A.cols()) throw Error(ErrorKind::Domain, std::string(what) + ": matrix is not square");
}

}  // namespace

SolveReport solve_spd(const Eigen::MatrixXd& K, const Eigen::VectorXd& F, int refinement_iters) {
  check_square(K, "solve_spd");
  if (F.size() != K.rows()) throw Error(ErrorKind::Domain, "solve_spd: right-hand side size mismatch");
  if (!F.allFinite()) throw Error(ErrorKind::NonFinite, "solve_spd: right-hand side is not finite");
  // The blocked in-place factorization reports the first failing pivot,
  // which the public LLT interface does not expose.
  Eigen::MatrixXd L = K;
  const Eigen::Index bad = Eigen::internal::llt_inplace<double, Eigen::Lower>::blocked(L);
  if (bad >= 0) {
    std::ostringstream os;
    os << "matrix is not positive definite: non-positive pivot at row " << bad;
    throw NotSpdError(static_cast<int>(bad), os.str());
  }
  auto back_solve = [&](Eigen::VectorXd& b) {
    L.triangularView<Eigen::Lower>().solveInPlace(b);
    L.triangularView<Eigen::Lower>().adjoint().solveInPlace(b);
  };
  SolveReport rep;
  rep.x = F;
  back_solve(rep.x);
  const double fnorm = F.norm() > 0.0 ? F.norm() : 1.0;
  Eigen::VectorXd r = residual_dd(K, rep.x, F);
  double rn = r.norm() / fnorm;
  rep.residuals.push_back(rn);
  rep.iterate_residuals.push_back(rn);
  // Corrections continue from the latest iterate even when its residual sits
  // at the rounding floor, since the forward error may still be shrinking; the
  // returned solution is the iterate with the smallest residual.
  Eigen::VectorXd x = rep.x;
  for (int it = 0; it < refinement_iters; ++it) {
    if (r.squaredNorm() == 0.0) break;
    Eigen::VectorXd d = r;
    back_solve(d);
    if (!d.allFinite()) break;
    x += d;
    r = residual_dd(K, x, F);
    const double rn_new = r.norm() / fnorm;
    rep.iterate_residuals.push_back(rn_new);
    ++rep.refinement_steps;
    if (rn_new <= rn) {
      rep.x = x;
      rn = rn_new;
    }
    rep.residuals.push_back(rn);
  }
  return rep;
}

namespace {

[[noreturn]] void eigen_failure(const char* what) {
  throw Error(ErrorKind::Eigen, std::string("symmetric eigensolver failed: ") + what);
}

void check_pair(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  check_square(A, "sym_gen_eig");
  if (B.size() != 0 && (B.rows() != A.rows() || B.cols() != A.cols()))
    throw Error(ErrorKind::Domain, "sym_gen_eig: size mismatch");
}

}  // namespace

// Both solvers read only the lower triangle.
void sym_gen_eig_vectors(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, Eigen::VectorXd& values,
                         Eigen::MatrixXd& vectors) {
  check_pair(A, B);
  if (B.size() == 0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A, Eigen::ComputeEigenvectors);
    if (es.info() != Eigen::Success) eigen_failure("no convergence");
    values = es.eigenvalues();
    vectors = es.eigenvectors();
    return;
  }
  Eigen::LLT<Eigen::MatrixXd> llt(B);
  if (llt.info() != Eigen::Success) eigen_failure("B is not positive definite");
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(A, B, Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
  if (es.info() != Eigen::Success) eigen_failure("no convergence");
  values = es.eigenvalues();
  vectors = es.eigenvectors();
}

Eigen::VectorXd sym_gen_eig(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  check_pair(A, B);
  if (B.size() == 0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) eigen_failure("no convergence");
    return es.eigenvalues();
  }
  Eigen::LLT<Eigen::MatrixXd> llt(B);
  if (llt.info() != Eigen::Success) eigen_failure("B is not positive definite");
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(A, B, Eigen::EigenvaluesOnly | Eigen::Ax_lBx);
  if (es.info() != Eigen::Success) eigen_failure("no convergence");
  return es.eigenvalues();
}

}  // namespace kls
