#include <gtest/gtest.h>

#include <cmath>

#include "test_util.hpp"

namespace kls {
namespace {

using test::uniform;

// Derivative table of c * xi1^p * xi2^q placed in component `comp`.
SurfaceJet monomial_jet(int comp, int p, int q, double xi1, double xi2, int order, double c = 1.0) {
  auto falling = [](int n, int k) {
    double r = 1.0;
    for (int i = 0; i < k; ++i) r *= n - i;
    return r;
  };
  SurfaceJet j;
  j.order = order;
  for (int d = 0; d <= order; ++d)
    for (int jj = 0; jj <= d; ++jj) {
      const int i = d - jj;
      if (i > p || jj > q) continue;
      j.d[multi_index(i, jj)][comp] = c * falling(p, i) * falling(q, jj) * std::pow(xi1, p - i) * std::pow(xi2, q - jj);
    }
  return j;
}

SurfaceJet add(const SurfaceJet& a, const SurfaceJet& b) {
  SurfaceJet r = a;
  for (size_t k = 0; k < r.d.size(); ++k) r.d[k] += b.d[k];
  return r;
}

TEST(Elasticity, MagnitudeMatchesClosedForm) {
  const SurfaceFrame f = build_frame(eval_surface(get_problem(5).patch, 0.3, 0.7, 2));
  for (double nu : {0.0, 0.3, 0.5 - 1e-6}) {
    const Material m{1.0e7, nu, 0.1};
    const double sq = elasticity_magnitude_sq(f, elasticity(f, m));
    const double closed = m.c_magnitude() * m.c_magnitude();
    EXPECT_NEAR(sq, closed, 1e-12 * closed) << "nu=" << nu;
  }
  EXPECT_NEAR(Material{}.c_magnitude() / 1e7, std::sqrt(3.22425 / 1.0), 1e-5);
}

TEST(Elasticity, MagnitudeBoundOverPoissonRange) {
  for (int k = 0; k <= 50; ++k) {
    const Material m{2.0, 0.5 * k / 50.0, 0.1};
    EXPECT_LE(m.c_magnitude() * m.c_magnitude(), 44.0 / 9.0 * 4.0 * (1 + 1e-14));
  }
}

TEST(Elasticity, NoCrossCouplingWithoutPoisson) {
  const SurfaceFrame f = build_frame(eval_surface(test::flat_square(), 0.5, 0.5, 2));
  const ElasticityTensor<double> c = elasticity(f, Material{1.0, 0.0, 0.1});
  EXPECT_EQ(c.C[0][0][1][1], 0.0);
  EXPECT_DOUBLE_EQ(c.C[0][0][0][0], 1.0);
}

TEST(Material, RejectsInvalidParameters) {
  EXPECT_THROW((Material{-1.0, 0.3, 0.1}).validate(), Error);
  EXPECT_THROW((Material{1.0, 0.6, 0.1}).validate(), Error);
  EXPECT_THROW((Material{1.0, 0.3, 0.0}).validate(), Error);
}

TEST(Kinematics, RigidTranslationIsStrainFree) {
  for (int id : {3, 5, 7}) {
    const SurfaceJet x = eval_geometry<double>(get_problem(id).patch, 0.4, 0.6, 3);
    const SurfaceFrame f = build_frame<double>(x, true);
    SurfaceJet u;
    u.order = 3;
    u.d[0] = Vec3d{0.3, -1.2, 2.0};
    const Kinematics<double> k = kinematics(f, u, true);
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        EXPECT_EQ(k.alpha[a][b], 0.0);
        EXPECT_EQ(k.beta[a][b], 0.0);
      }
  }
}

TEST(Kinematics, UniaxialStretchOnFlatSquare) {
  const SurfaceFrame f = build_frame(eval_surface(test::flat_square(), 0.3, 0.2, 3));
  const Kinematics<double> k = kinematics(f, monomial_jet(0, 1, 0, 0.3, 0.2, 3), true);
  EXPECT_NEAR(k.alpha[0][0], 1.0, 1e-15);
  EXPECT_NEAR(k.alpha[0][1], 0.0, 1e-15);
  EXPECT_NEAR(k.alpha[1][1], 0.0, 1e-15);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) EXPECT_NEAR(k.beta[a][b], 0.0, 1e-15);
}

TEST(Kinematics, BendingStrainDerivativeMatchesFiniteDifferences) {
  // Oracle: beta_{ab|n} = d_n beta_ab - Gamma^l_{an} beta_lb - Gamma^l_{bn} beta_al.
  const ProblemSpec spec = get_problem(3);
  auto state = [&](double a, double b) {
    const SurfaceFrame f = build_frame<double>(eval_geometry<double>(spec.patch, a, b, 3), true);
    return std::pair{f, kinematics(f, eval_exact<double>(spec, a, b, 3), true)};
  };
  const double step = 1e-5;
  const double a = 0.37, b = 0.61;
  const auto [f, k] = state(a, b);
  for (int n = 0; n < 2; ++n) {
    const double da = n == 0 ? step : 0.0, db = n == 1 ? step : 0.0;
    const auto kp = state(a + da, b + db).second, km = state(a - da, b - db).second;
    for (int al = 0; al < 2; ++al)
      for (int be = 0; be < 2; ++be) {
        double v = (kp.beta[al][be] - km.beta[al][be]) / (2 * step);
        for (int l = 0; l < 2; ++l) v -= f.Gamma[l][al][n] * k.beta[l][be] + f.Gamma[l][be][n] * k.beta[al][l];
        EXPECT_NEAR(k.beta_d[n][al][be], v, 1e-7 * std::max(1.0, std::fabs(v)));
      }
  }
}

TEST(BoundaryActions, FlatGeometryHasNoBendingForce) {
  const ProblemSpec spec = get_problem(1);
  for (int e = 0; e < 4; ++e) {
    const SurfaceFrame f = build_frame<double>(eval_geometry<double>(spec.patch, 0.3, 0.8, 3), true);
    const EdgeFrame ef = build_edge_frame(f, static_cast<Edge>(e));
    const Kinematics<double> k = kinematics(f, eval_exact<double>(spec, 0.3, 0.8, 3), true);
    const BoundaryActions<double> ba = boundary_actions(f, ef, elasticity(f, spec.material), k, spec.material);
    EXPECT_EQ(ba.TB[0], 0.0);
    EXPECT_EQ(ba.TB[1], 0.0);
  }
}

TEST(BoundaryActions, InPlaneFieldHasNoTransverseForce) {
  const Material m;
  const double a = 0.4, b = 0.7;
  const SurfaceFrame f = build_frame(eval_surface(test::flat_square(), a, b, 3));
  const SurfaceJet u = add(monomial_jet(0, 2, 0, a, b, 3), monomial_jet(1, 1, 1, a, b, 3));
  const Kinematics<double> k = kinematics(f, u, true);
  for (int e = 0; e < 4; ++e) {
    const BoundaryActions<double> ba = boundary_actions(f, build_edge_frame(f, static_cast<Edge>(e)), elasticity(f, m), k, m);
    EXPECT_EQ(ba.T3, 0.0);
    EXPECT_EQ(ba.Bnn, 0.0);
  }
}

TEST(BoundaryActions, TransverseForceMatchesDivergencePlusTwistDerivative) {
  // Oracle: T3 = n_a B^{ab}_{|b} + d(B_nt)/ds, with the divergence and the
  // arc-length derivative both taken by central differences of B.
  const ProblemSpec spec = get_problem(3);
  const Material& m = spec.material;
  const double bend = m.zeta * m.zeta * m.zeta / 12.0;
  auto moment = [&](double a, double b) {
    const SurfaceFrame f = build_frame<double>(eval_geometry<double>(spec.patch, a, b, 3), true);
    const Kinematics<double> k = kinematics(f, eval_exact<double>(spec, a, b, 2), false);
    Mat2<double> B = elasticity(f, m).contract(k.beta);
    for (auto& row : B)
      for (auto& v : row) v *= bend;
    return std::pair{f, B};
  };
  const double step = 1e-4;
  for (int e = 0; e < 4; ++e) {
    const Edge edge = static_cast<Edge>(e);
    const double a = uniform(0.2, 0.8), b = uniform(0.2, 0.8);
    const auto [f, B] = moment(a, b);
    const EdgeFrame ef = build_edge_frame(f, edge);
    std::array<Mat2<double>, 2> dB;
    std::array<double, 2> dBnt{};
    for (int l = 0; l < 2; ++l) {
      const double da = l == 0 ? step : 0.0, db = l == 1 ? step : 0.0;
      const auto [fp, Bp] = moment(a + da, b + db);
      const auto [fm, Bm] = moment(a - da, b - db);
      const EdgeFrame ep = build_edge_frame(fp, edge), em = build_edge_frame(fm, edge);
      double bntp = 0, bntm = 0;
      for (int al = 0; al < 2; ++al)
        for (int be = 0; be < 2; ++be) {
          dB[l][al][be] = (Bp[al][be] - Bm[al][be]) / (2 * step);
          bntp += ep.n_cov[al] * Bp[al][be] * ep.t_cov[be];
          bntm += em.n_cov[al] * Bm[al][be] * em.t_cov[be];
        }
      dBnt[l] = (bntp - bntm) / (2 * step);
    }
    double expect = ef.t_up[0] * dBnt[0] + ef.t_up[1] * dBnt[1];
    for (int al = 0; al < 2; ++al) {
      double div = 0.0;
      for (int be = 0; be < 2; ++be) {
        div += dB[be][al][be];
        for (int mm = 0; mm < 2; ++mm) div += f.Gamma[al][be][mm] * B[mm][be] + f.Gamma[be][be][mm] * B[al][mm];
      }
      expect += ef.n_cov[al] * div;
    }
    const Kinematics<double> k = kinematics(f, eval_exact<double>(spec, a, b, 3), true);
    const BoundaryActions<double> ba = boundary_actions(f, ef, elasticity(f, m), k, m);
    const double scale = bend * m.c_magnitude() * 0.01;
    EXPECT_NEAR(ba.T3, expect, 1e-6 * std::max(scale, std::fabs(expect))) << edge_name(edge);
  }
}

TEST(BoundaryActions, CornerJumpOfTwistOnFlatPlate) {
  // u3 = xy gives beta_12 = -1 and B^12 = -2 mu zeta^3/12, so the jump
  // after (E) minus before (S) at the SE corner is 2 B^12.
  const Material m;
  const SurfaceFrame f = build_frame(eval_surface(test::flat_square(), 1.0, 0.0, 3));
  const Kinematics<double> k = kinematics(f, monomial_jet(2, 1, 1, 1.0, 0.0, 3), true);
  const ElasticityTensor<double> c = elasticity(f, m);
  const double s = boundary_actions(f, build_edge_frame(f, Edge::S), c, k, m).Bnt;
  const double e = boundary_actions(f, build_edge_frame(f, Edge::E), c, k, m).Bnt;
  const double mu = m.E / (2 * (1 + m.nu));
  EXPECT_NEAR(corner_jump(s, e), -4.0 * mu * m.zeta * m.zeta * m.zeta / 12.0, 1e-9);
  EXPECT_EQ(corner_jump(1.0, 3.0), 2.0);
}

TEST(BoundaryActions, VariantsAgreeOnFlatAndDifferOnCurved) {
  for (int id : {1, 3}) {
    const ProblemSpec spec = get_problem(id);
    const SurfaceFrame f = build_frame<double>(eval_geometry<double>(spec.patch, 0.0, 0.45, 3), true);
    const EdgeFrame ef = build_edge_frame(f, Edge::W);
    const Kinematics<double> k = kinematics(f, eval_exact<double>(spec, 0.0, 0.45, 3), true);
    const ElasticityTensor<double> c = elasticity(f, spec.material);
    const auto con = boundary_actions(f, ef, c, k, spec.material, ErsatzVariant::Consistent);
    const auto inc = boundary_actions(f, ef, c, k, spec.material, ErsatzVariant::Inconsistent);
    const double diff = test::vec_norm(con.T - inc.T);
    if (id == 1) {
      EXPECT_EQ(diff, 0.0);
    } else {
      EXPECT_GT(diff, 1e-6 * test::vec_norm(con.T));
    }
  }
}

TEST(StrongForm, ZeroFieldGivesZeroLoad) {
  SurfaceJet u;
  u.order = 4;
  const auto r = strong_form_load(eval_geometry<double>(get_problem(7).patch, 0.3, 0.4, 4), u, Material{});
  EXPECT_EQ(test::vec_norm(r.f), 0.0);
}

TEST(StrongForm, LinearMembraneFieldIsSelfEquilibrated) {
  const SurfaceJet u = add(monomial_jet(0, 1, 0, 0.3, 0.4, 4), monomial_jet(1, 0, 1, 0.3, 0.4, 4, -0.5));
  const auto r = strong_form_load(eval_surface(test::flat_square(), 0.3, 0.4, 4), u, Material{});
  EXPECT_LT(test::vec_norm(r.f), 1e-9);
}

TEST(StrongForm, FlatPlateBendingIsBiharmonic) {
  // f3 = D Laplacian^2 w with D = E zeta^3 / (12 (1 - nu^2)); w = x^2 y^2 gives 8 D.
  const Material m;
  const double D = m.E * std::pow(m.zeta, 3) / (12 * (1 - m.nu * m.nu));
  const auto r = strong_form_load(eval_surface(test::flat_square(), 0.3, 0.4, 4), monomial_jet(2, 2, 2, 0.3, 0.4, 4), m);
  EXPECT_NEAR(r.f3, 8 * D, 1e-9 * D);
  EXPECT_NEAR(r.fbar[0], 0.0, 1e-9 * D);
}

TEST(StrongForm, FlatPlateMembraneStretch) {
  // u = (x^2, 0, 0): div A = 2 zeta E / (1 - nu^2) along x, and f = -div A.
  const Material m;
  const auto r = strong_form_load(eval_surface(test::flat_square(), 0.3, 0.4, 4), monomial_jet(0, 2, 0, 0.3, 0.4, 4), m);
  const double expect = -2 * m.zeta * m.E / (1 - m.nu * m.nu);
  EXPECT_NEAR(r.f[0], expect, 1e-12 * std::fabs(expect));
  EXPECT_NEAR(r.f[1], 0.0, 1e-9);
  EXPECT_NEAR(r.f[2], 0.0, 1e-9);
}

}  // namespace
}  // namespace kls
