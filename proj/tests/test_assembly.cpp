#include <gtest/gtest.h>

#include <cmath>

#include "test_util.hpp"

namespace kls {
namespace {

PenaltyConfig computed_penalties(const Discretization& disc) {
  return compute_penalties(compute_trace_constants(disc), {2, 2, 2, 2}, TraceConvention::Proved);
}

double asymmetry(const Eigen::MatrixXd& K) { return (K - K.transpose()).cwiseAbs().maxCoeff() / K.cwiseAbs().maxCoeff(); }

TEST(Mesh, FlatSquareElementSizes) {
  const Discretization d = make_discretization(test::flat_square_spec(), 2, 4);
  ASSERT_EQ(d.topo.h.size(), 16u);
  for (double h : d.topo.h) EXPECT_NEAR(h, std::sqrt(2.0) / 4.0, 1e-15);
}

TEST(Mesh, AnnulusInnerElementsAreSmaller) {
  const Discretization d = make_discretization(get_problem(1), 2, 4);
  for (int e2 = 0; e2 < 4; ++e2) EXPECT_LT(d.topo.h[d.topo.element(0, e2)], d.topo.h[d.topo.element(3, e2)]);
}

TEST(Mesh, BoundaryOwners) {
  const Discretization d = make_discretization(get_problem(3), 2, 3);
  EXPECT_EQ(d.topo.corner_owner(Corner::SW), 0);
  EXPECT_EQ(d.topo.corner_owner(Corner::SE), 2);
  EXPECT_EQ(d.topo.corner_owner(Corner::NE), 8);
  EXPECT_EQ(d.topo.corner_owner(Corner::NW), 6);
  EXPECT_EQ(d.topo.edge_owner(Edge::E, 1), 5);
  EXPECT_EQ(d.topo.edge_owner(Edge::N, 1), 7);
}

TEST(Mesh, RejectsBadArguments) {
  EXPECT_THROW(make_discretization(get_problem(1), 1, 4), Error);
  EXPECT_THROW(make_discretization(get_problem(1), 2, 0), Error);
}

TEST(Assembly, SystemIsSymmetric) {
  for (int id = 1; id <= 8; ++id) {
    const Discretization d = make_discretization(get_problem(id), 2, 4);
    const AssembledSystem s = assemble(d, nullptr, PenaltyConfig{});
    EXPECT_LE(asymmetry(s.K), 1e-12) << "problem " << id;
  }
}

TEST(Assembly, SerialAndParallelAreBitIdentical) {
  const ProblemSpec spec = get_problem(3);
  const Discretization d = make_discretization(spec, 3, 4);
  const LoadData loads = generate_load_data(spec, d.rule, d.degree);
  AssemblyOptions serial, parallel;
  serial.exec = Execution::Serial;
  parallel.exec = Execution::Parallel;
  const AssembledSystem a = assemble(d, &loads, PenaltyConfig{}, serial);
  const AssembledSystem b = assemble(d, &loads, PenaltyConfig{}, parallel);
  EXPECT_TRUE((a.K.array() == b.K.array()).all());
  EXPECT_TRUE((a.F.array() == b.F.array()).all());
}

TEST(Assembly, RigidMotionsHaveNoInteriorEnergy) {
  for (int id : {2, 3, 5, 7}) {
    const Discretization d = make_discretization(get_problem(id), 3, 3);
    const Eigen::MatrixXd K = assemble_stiffness(d, Execution::Serial);
    const double scale = K.cwiseAbs().maxCoeff();
    const Vec3d omega{0.3, -0.7, 0.5}, shift{1.0, 2.0, -1.0};
    Eigen::VectorXd r(d.num_dofs());
    for (int k = 0; k < d.num_basis(); ++k) {
      // Translation plus the infinitesimal rotation omega x P_k.
      const Vec3d v = shift + cross(omega, d.patch.points[k]);
      for (int c = 0; c < 3; ++c) r(dof_index(k, c)) = v[c];
    }
    EXPECT_LE((K * r).cwiseAbs().maxCoeff(), 1e-9 * scale * r.cwiseAbs().maxCoeff()) << "problem " << id;
  }
}

TEST(Assembly, MembraneAndBendingEnergyOnFlatSquare) {
  // On the unit square with one biquadratic element, u = (x, 0, 0) has
  // a(u,u) = zeta E / (1 - nu^2) and u = (0, 0, x^2) has
  // a(u,u) = zeta^3 / 12 * 4 E / (1 - nu^2).
  const Discretization d = make_discretization(test::flat_square_spec(), 2, 1);
  const Eigen::MatrixXd K = assemble_stiffness(d, Execution::Serial);
  const Material& m = d.spec.material;
  const double plate = m.E / (1 - m.nu * m.nu);
  Eigen::VectorXd stretch = Eigen::VectorXd::Zero(d.num_dofs()), bend = stretch;
  for (int j = 0; j < 3; ++j)
    for (int i = 0; i < 3; ++i) {
      stretch(dof_index(i + 3 * j, 0)) = 0.5 * i;
      bend(dof_index(i + 3 * j, 2)) = i == 2 ? 1.0 : 0.0;
    }
  EXPECT_NEAR(stretch.dot(K * stretch), m.zeta * plate, 1e-9 * m.zeta * plate);
  const double eb = std::pow(m.zeta, 3) / 12.0 * 4.0 * plate;
  EXPECT_NEAR(bend.dot(K * bend), eb, 1e-9 * eb);
}

TEST(Assembly, ExactDiscreteFieldSatisfiesTheSystem) {
  // Problems whose exact field lies in the discrete space: K u = F up to
  // quadrature and roundoff.
  struct Case {
    int problem, degree, mesh;
    double tol;
  };
  for (const Case c : {Case{5, 2, 2, 1e-10}, Case{5, 3, 2, 1e-10}, Case{3, 6, 1, 1e-8}}) {
    const ProblemSpec spec = get_problem(c.problem);
    const Discretization d = make_discretization(spec, c.degree, c.mesh);
    const LoadData loads = generate_load_data(spec, d.rule, d.degree);
    const AssembledSystem s = assemble(d, &loads, computed_penalties(d));
    const Eigen::VectorXd x = test::greville_interpolant(d);
    const double res = (s.K * x - s.F).norm() / s.F.norm();
    EXPECT_LE(res, c.tol) << "problem " << c.problem << " p=" << c.degree;
  }
}

TEST(Assembly, ThicknessScalingOfPenaltyTerms) {
  ProblemSpec thin = get_problem(3), thick = get_problem(3);
  thick.material.zeta = 2 * thin.material.zeta;
  const Discretization a = make_discretization(thin, 2, 2), b = make_discretization(thick, 2, 2);
  AssemblyOptions out, in;
  out.terms = kD1PenaltyOut;
  in.terms = kD1PenaltyIn;
  const Eigen::MatrixXd Ka = assemble(a, nullptr, PenaltyConfig{}, out).K, Kb = assemble(b, nullptr, PenaltyConfig{}, out).K;
  EXPECT_LE((Kb - 8.0 * Ka).cwiseAbs().maxCoeff(), 1e-12 * Kb.cwiseAbs().maxCoeff());
  const Eigen::MatrixXd Ia = assemble(a, nullptr, PenaltyConfig{}, in).K, Ib = assemble(b, nullptr, PenaltyConfig{}, in).K;
  EXPECT_LE((Ib - 2.0 * Ia).cwiseAbs().maxCoeff(), 1e-12 * Ib.cwiseAbs().maxCoeff());
}

TEST(Assembly, PenaltyScalesWithGammaSquared) {
  const Discretization d = make_discretization(get_problem(7), 2, 2);
  AssemblyOptions opt;
  opt.terms = kD2Penalty;
  PenaltyConfig p2, p4;
  p4.gamma = {4, 4, 4, 4};
  const Eigen::MatrixXd K2 = assemble(d, nullptr, p2, opt).K, K4 = assemble(d, nullptr, p4, opt).K;
  EXPECT_LE((K4 - 4.0 * K2).cwiseAbs().maxCoeff(), 1e-12 * K4.cwiseAbs().maxCoeff());
}

TEST(Assembly, VariantsCoincideOnFlatGeometry) {
  for (int id : {1, 2}) {
    const Discretization d = make_discretization(get_problem(id), 2, 2);
    AssemblyOptions inc;
    inc.variant = ErsatzVariant::Inconsistent;
    const Eigen::MatrixXd a = assemble(d, nullptr, PenaltyConfig{}).K;
    const Eigen::MatrixXd b = assemble(d, nullptr, PenaltyConfig{}, inc).K;
    EXPECT_EQ((a - b).cwiseAbs().maxCoeff(), 0.0) << "problem " << id;
  }
  const Discretization d = make_discretization(get_problem(3), 2, 2);
  AssemblyOptions inc;
  inc.variant = ErsatzVariant::Inconsistent;
  EXPECT_GT((assemble(d, nullptr, PenaltyConfig{}).K - assemble(d, nullptr, PenaltyConfig{}, inc).K).norm(), 0.0);
}

TEST(Assembly, PenalizedSystemIsPositiveDefinite) {
  for (int id : {1, 3, 6}) {
    const Discretization d = make_discretization(get_problem(id), 2, 4);
    const AssembledSystem s = assemble(d, nullptr, computed_penalties(d));
    const Eigen::VectorXd ev = sym_gen_eig(s.K);
    EXPECT_GT(ev(0), 0.0) << "problem " << id;
  }
}

TEST(Assembly, InteriorStiffnessIsPositiveSemidefinite) {
  const Discretization d = make_discretization(get_problem(5), 2, 3);
  const Eigen::VectorXd ev = sym_gen_eig(assemble_stiffness(d));
  EXPECT_GT(ev(0), -1e-9 * ev(ev.size() - 1));
  // Exactly six rigid motions span the kernel.
  int small = 0;
  for (int i = 0; i < ev.size(); ++i) small += ev(i) < 1e-9 * ev(ev.size() - 1);
  EXPECT_EQ(small, 6);
}

TEST(Assembly, RejectsSpecWithoutDisplacementEdge) {
  const Discretization d = make_discretization(test::flat_square_spec(BoundaryType::Free), 2, 1);
  EXPECT_THROW(assemble(d, nullptr, PenaltyConfig{}), Error);
}

TEST(Assembly, GammaAtMostOneIsRejected) {
  const Discretization d = make_discretization(get_problem(3), 2, 1);
  PenaltyConfig p;
  p.gamma[2] = 1.0;
  EXPECT_THROW(assemble(d, nullptr, p), Error);
}

}  // namespace
}  // namespace kls
