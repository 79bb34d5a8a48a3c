#include <gtest/gtest.h>

#include <cmath>

#include "test_util.hpp"

namespace kls {
namespace {

using test::uniform;

TEST(FindSpan, SingleElementBernstein) {
  EXPECT_EQ(find_span(KnotVector::bezier(2), 0.5), 2);
}

TEST(FindSpan, RightEndClosesLastSpan) {
  const KnotVector kv(2, {0, 0, 0, 0.5, 1, 1, 1});
  EXPECT_EQ(find_span(kv, 1.0), 3);
}

TEST(FindSpan, MatchesLinearScan) {
  const KnotVector kv(2, {0, 0, 0, 0.25, 0.5, 0.75, 1, 1, 1});
  // Oracle: the last index i with knots[i] <= xi < knots[i+1].
  const double xi = 0.6;
  int expect = -1;
  for (size_t i = 0; i + 1 < kv.values.size(); ++i)
    if (kv.values[i] <= xi && xi < kv.values[i + 1]) expect = static_cast<int>(i);
  EXPECT_EQ(expect, 4);
  EXPECT_EQ(find_span(kv, xi), expect);
}

TEST(EvalBasis, BernsteinAtMidpoint) {
  const BasisEval b = eval_basis(KnotVector::bezier(2), 0.5, 0);
  EXPECT_DOUBLE_EQ(b(0, 0), 0.25);
  EXPECT_DOUBLE_EQ(b(0, 1), 0.5);
  EXPECT_DOUBLE_EQ(b(0, 2), 0.25);
}

TEST(EvalBasis, PartitionOfUnityAndZeroSumDerivatives) {
  for (int p = 2; p <= 6; ++p) {
    const KnotVector kv = KnotVector::uniform(p, 5);
    for (int t = 0; t < 1000; ++t) {
      const double xi = uniform(0.0, 1.0);
      const BasisEval b = eval_basis(kv, xi, 3);
      for (int k = 0; k <= 3; ++k) {
        double s = 0.0, scale = 0.0;
        for (int j = 0; j <= p; ++j) {
          s += b(k, j);
          scale += std::fabs(b(k, j));
        }
        EXPECT_NEAR(s, k == 0 ? 1.0 : 0.0, 1e-12 * std::max(1.0, scale)) << "p=" << p << " order " << k;
      }
    }
  }
}

TEST(EvalBasis, DerivativesMatchFiniteDifferences) {
  const KnotVector kv = KnotVector::uniform(4, 3);
  const double step = 1e-5;
  for (double xi : {0.1, 0.45, 0.8}) {
    const BasisEval b = eval_basis(kv, xi, 3);
    for (int k = 1; k <= 3; ++k) {
      const BasisEval bp = eval_basis(kv, xi + step, k - 1), bm = eval_basis(kv, xi - step, k - 1);
      for (int j = 0; j <= 4; ++j) {
        const double fd = (bp(k - 1, j) - bm(k - 1, j)) / (2 * step);
        EXPECT_NEAR(b(k, j), fd, 1e-6 * std::max(1.0, std::fabs(b(k, j)))) << "order " << k;
      }
    }
  }
}

TEST(EvalSurface, ProblemOneFirstControlPoint) {
  const SurfaceJet j = eval_surface(get_problem(1).patch, 0.0, 0.0, 0);
  EXPECT_DOUBLE_EQ(j.x()[0], 1.0);
  EXPECT_DOUBLE_EQ(j.x()[1], 0.0);
  EXPECT_DOUBLE_EQ(j.x()[2], 0.0);
}

TEST(EvalSurface, CylinderArcHasUnitRadius) {
  const NurbsPatch patch = get_problem(3).patch;
  for (int t = 0; t < 20; ++t) {
    const Vec3d x = eval_surface(patch, t / 19.0, 0.37, 0).x();
    EXPECT_NEAR(x[0] * x[0] + x[1] * x[1], 1.0, 1e-12);
  }
}

TEST(EvalSurface, UnitWeightsGivePlainBSpline) {
  const NurbsPatch patch = get_problem(2).patch;
  for (int t = 0; t < 10; ++t) {
    const double u = uniform(0, 1), v = uniform(0, 1);
    // Oracle: tensor-product Bernstein sum with no rational correction.
    auto bern = [](int i, double s) {
      const double c[3] = {1, 2, 1};
      return c[i] * std::pow(s, i) * std::pow(1 - s, 2 - i);
    };
    Vec3d expect;
    for (int j = 0; j < 3; ++j)
      for (int i = 0; i < 3; ++i) expect += patch.points[i + 3 * j] * (bern(i, u) * bern(j, v));
    const Vec3d got = eval_surface(patch, u, v, 0).x();
    for (int c = 0; c < 3; ++c) EXPECT_NEAR(got[c], expect[c], 1e-14);
  }
}

TEST(EvalSurface, CornerInterpolation) {
  for (int id = 1; id <= 8; ++id) {
    const NurbsPatch patch = get_problem(id).patch;
    const Vec3d x = eval_surface(patch, 0.0, 0.0, 0).x();
    for (int c = 0; c < 3; ++c) EXPECT_NEAR(x[c], patch.points[0][c], 1e-15);
  }
}

TEST(EvalSurface, DerivativesMatchFiniteDifferences) {
  for (int id : {1, 3, 5, 7}) {
    for (int deg : {2, 4}) {
      const NurbsPatch patch = refine(get_problem(id).patch, deg, 2);
      auto f = [&](double a, double b, int k) { return eval_surface(patch, a, b, k); };
      for (int t = 0; t < 5; ++t) {
        // Stay inside one element so the finite-difference stencil sees a smooth map.
        const double a = uniform(0.05, 0.45), b = uniform(0.55, 0.95);
        EXPECT_LT(test::jet_fd_mismatch(f, a, b, 4, 1e-3, 1.0), 1e-5) << "problem " << id << " p=" << deg;
      }
    }
  }
}

TEST(Refine, DegreeTwoOneElementIsIdentity) {
  const NurbsPatch master = get_problem(7).patch;
  const NurbsPatch r = refine(master, 2, 1);
  ASSERT_EQ(r.points.size(), master.points.size());
  for (size_t k = 0; k < master.points.size(); ++k) {
    for (int c = 0; c < 3; ++c) EXPECT_EQ(r.points[k][c], master.points[k][c]);
    EXPECT_EQ(r.weights[k], master.weights[k]);
  }
}

TEST(Refine, KnotInsertionPreservesTheMap) {
  for (int id = 1; id <= 8; ++id) {
    const NurbsPatch master = get_problem(id).patch;
    const double diam = patch_diameter(master);
    for (auto [deg, m] : {std::pair{2, 4}, std::pair{4, 2}, std::pair{3, 8}}) {
      const NurbsPatch r = refine(master, deg, m);
      for (int t = 0; t < 25; ++t) {
        const double u = uniform(0, 1), v = uniform(0, 1);
        const Vec3d d = eval_surface(master, u, v, 0).x() - eval_surface(r, u, v, 0).x();
        EXPECT_LE(test::vec_norm(d), 1e-12 * diam) << "problem " << id << " p=" << deg << " m=" << m;
      }
    }
  }
}

TEST(Refine, BasisCountArithmetic) {
  const NurbsPatch r = refine(get_problem(3).patch, 4, 2);
  EXPECT_EQ(r.n(0), 4 + 2);
  EXPECT_EQ(r.n(1), 4 + 2);
  EXPECT_EQ(r.num_basis(), 36);
}

TEST(Refine, RationalBasisPartitionOfUnity) {
  const NurbsPatch r = refine(get_problem(1).patch, 5, 3);
  for (int t = 0; t < 200; ++t) {
    const RationalBasis rb = eval_rational_basis(r, uniform(0, 1), uniform(0, 1), 2);
    double s = 0, s1 = 0;
    for (int k = 0; k < rb.size(); ++k) {
      s += rb(k, 0, 0);
      s1 += rb(k, 1, 0);
    }
    EXPECT_NEAR(s, 1.0, 1e-12);
    EXPECT_NEAR(s1, 0.0, 1e-10);
  }
}

TEST(KnotVector, RejectsDecreasingKnots) {
  EXPECT_THROW(KnotVector(2, {0, 0, 0, 0.6, 0.4, 1, 1, 1}).validate(), Error);
}

}  // namespace
}  // namespace kls
