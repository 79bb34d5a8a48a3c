#include <gtest/gtest.h>

#include <cmath>

#include "test_util.hpp"

namespace kls {
namespace {

TEST(SolveSpd, IdentityReturnsRightHandSide) {
  const Eigen::VectorXd F = Eigen::VectorXd::LinSpaced(5, -2.0, 2.0);
  const SolveReport r = solve_spd(Eigen::MatrixXd::Identity(5, 5), F);
  EXPECT_EQ((r.x - F).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(r.residuals.front(), 0.0);
  EXPECT_EQ(r.refinement_steps, 0);
}

TEST(SolveSpd, SmallSystemByHand) {
  // [[4, 2], [2, 3]] x = [2, 1] has x = [1/2, 0].
  Eigen::MatrixXd K(2, 2);
  K << 4, 2, 2, 3;
  const SolveReport r = solve_spd(K, Eigen::Vector2d(2, 1));
  EXPECT_NEAR(r.x(0), 0.5, 1e-16);
  EXPECT_NEAR(r.x(1), 0.0, 1e-16);
}

TEST(SolveSpd, RefinementReducesResidualOnIllConditionedSystem) {
  const test::ExactSystem s = test::ill_conditioned_system();
  const SolveReport r0 = solve_spd(s.K, s.F, 0);
  const SolveReport r3 = solve_spd(s.K, s.F, 3);
  const double before = residual_dd(s.K, r0.x, s.F).norm();
  const double after = residual_dd(s.K, r3.x, s.F).norm();
  EXPECT_GT(before, 0.0);
  EXPECT_LE(after * 1e3, before);
}

TEST(SolveSpd, ReportedResidualsAreNonIncreasing) {
  const test::ExactSystem s = test::ill_conditioned_system();
  const SolveReport r = solve_spd(s.K, s.F, 5);
  ASSERT_EQ(r.residuals.size(), r.iterate_residuals.size());
  for (size_t i = 1; i < r.residuals.size(); ++i) EXPECT_LE(r.residuals[i], r.residuals[i - 1]);
  EXPECT_EQ(r.residuals.back(), *std::min_element(r.iterate_residuals.begin(), r.iterate_residuals.end()));
  // The returned iterate has the reported residual.
  EXPECT_NEAR(residual_dd(s.K, r.x, s.F).norm() / s.F.norm(), r.residuals.back(), 1e-30);
}

TEST(SolveSpd, ShellSystemSolvesToRoundoff) {
  const ProblemSpec spec = get_problem(3);
  const Discretization d = make_discretization(spec, 4, 16);
  const LoadData loads = generate_load_data(spec, d.rule, d.degree);
  const PenaltyConfig pen = compute_penalties(cached_trace_constants("", spec, 4, 4, ErsatzVariant::Consistent));
  const AssembledSystem sys = assemble(d, &loads, pen);
  const SolveReport r = solve_spd(sys.K, sys.F, 3);
  EXPECT_LE(r.residuals.back(), 1e-12);
}

TEST(SolveSpd, IndefiniteMatrixReportsPivot) {
  Eigen::MatrixXd K = Eigen::MatrixXd::Identity(4, 4);
  K(2, 2) = -1.0;
  try {
    solve_spd(K, Eigen::VectorXd::Ones(4));
    FAIL();
  } catch (const NotSpdError& e) {
    EXPECT_EQ(e.pivot(), 2);
    EXPECT_EQ(e.kind(), ErrorKind::NotSpd);
  }
}

TEST(SolveSpd, RejectsMismatchedAndNonFiniteInput) {
  EXPECT_THROW(solve_spd(Eigen::MatrixXd::Identity(3, 3), Eigen::VectorXd::Ones(2)), Error);
  Eigen::VectorXd F = Eigen::VectorXd::Ones(3);
  F(1) = std::nan("");
  EXPECT_THROW(solve_spd(Eigen::MatrixXd::Identity(3, 3), F), Error);
}

TEST(ResidualDd, RecoversCancelledDigits) {
  // 1e16 + 1 - 1e16 is lost in double arithmetic but not in double-double.
  Eigen::MatrixXd K(1, 3);
  K << 1e16, 1.0, -1e16;
  Eigen::MatrixXd Kt = K;
  Eigen::VectorXd x = Eigen::VectorXd::Ones(3);
  Eigen::VectorXd F = Eigen::VectorXd::Zero(1);
  EXPECT_EQ(residual_dd(Kt, x, F)(0), -1.0);
}

TEST(SymGenEig, DiagonalPencil) {
  const Eigen::MatrixXd A = Eigen::Vector3d(2, 6, 12).asDiagonal();
  const Eigen::MatrixXd B = Eigen::Vector3d(1, 2, 3).asDiagonal();
  const Eigen::VectorXd ev = sym_gen_eig(A, B);
  EXPECT_NEAR(ev(0), 2.0, 1e-14);
  EXPECT_NEAR(ev(1), 3.0, 1e-14);
  EXPECT_NEAR(ev(2), 4.0, 1e-14);
}

TEST(SymGenEig, StandardProblemByHand) {
  Eigen::MatrixXd A(2, 2);
  A << 2, 1, 1, 2;
  const Eigen::VectorXd ev = sym_gen_eig(A);
  EXPECT_NEAR(ev(0), 1.0, 1e-15);
  EXPECT_NEAR(ev(1), 3.0, 1e-15);
}

TEST(SymGenEig, EigenpairsSatisfyThePencil) {
  std::mt19937_64 g(7);
  std::normal_distribution<double> nd;
  const int n = 30;
  Eigen::MatrixXd M(n, n), N(n, n);
  for (int i = 0; i < n * n; ++i) {
    M.data()[i] = nd(g);
    N.data()[i] = nd(g);
  }
  const Eigen::MatrixXd A = M + M.transpose();
  const Eigen::MatrixXd B = N * N.transpose() + n * Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd vals;
  Eigen::MatrixXd vecs;
  sym_gen_eig_vectors(A, B, vals, vecs);
  const Eigen::MatrixXd R = A * vecs - B * vecs * vals.asDiagonal();
  EXPECT_LE(R.cwiseAbs().maxCoeff(), 1e-11 * A.cwiseAbs().maxCoeff());
  const Eigen::MatrixXd G = vecs.transpose() * B * vecs;
  EXPECT_LE((G - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff(), 1e-12);
  for (int i = 1; i < n; ++i) EXPECT_LE(vals(i - 1), vals(i));
}

TEST(SymGenEig, IndefiniteMetricIsAnEigenError) {
  Eigen::MatrixXd B = Eigen::MatrixXd::Identity(3, 3);
  B(0, 0) = -1;
  try {
    sym_gen_eig(Eigen::MatrixXd::Identity(3, 3), B);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Eigen);
  }
}

}  // namespace
}  // namespace kls
