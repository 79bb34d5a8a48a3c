#include "kls/quadrature.hpp"

#include <cmath>
#include <numbers>

#include "kls/errors.hpp"

namespace kls {

GaussRule gauss_legendre(int n) {
  if (n < 1 || n > 400) throw Error(ErrorKind::Domain, "gauss_legendre: point count must lie in [1, 400]");
  GaussRule r;
  r.x.assign(n, 0.0);
  r.w.assign(n, 0.0);
  // Newton iteration on P_n from the Chebyshev-like initial guess; nodes are
  // symmetric, so only half are computed.
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      double dz = p1 / dp;
      z -= dz;
      if (std::fabs(dz) < 1e-16) break;
    }
    // Recompute the derivative at the converged node.
    double p0 = 1.0, p1 = z;
    for (int k = 2; k <= n; ++k) {
      double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    if (n == 1) p0 = 1.0;
    dp = n * (z * p1 - p0) / (z * z - 1.0);
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    // z is descending in i; map [-1,1] -> [0,1] in ascending order.
    r.x[i] = 0.5 * (1.0 - z);
    r.x[n - 1 - i] = 0.5 * (1.0 + z);
    r.w[i] = r.w[n - 1 - i] = 0.5 * w;
  }
  if (n % 2 == 1) r.x[n / 2] = 0.5;
  return r;
}

int default_quadrature_points(int degree, int mesh) {
  if (mesh < 1) throw Error(ErrorKind::Domain, "quadrature: mesh must be positive");
  const int dense = (100 + mesh - 1) / mesh;
  return std::max(degree + 3, dense);
}

QuadratureRule QuadratureRule::uniform(int mesh, int nq) {
  if (mesh < 1) throw Error(ErrorKind::Domain, "quadrature: mesh must be positive");
  QuadratureRule q;
  q.mesh = mesh;
  q.nq = nq;
  q.base = gauss_legendre(nq);
  q.points.resize(static_cast<size_t>(mesh) * nq);
  q.weights.resize(q.points.size());
  const double h = 1.0 / mesh;
  for (int e = 0; e < mesh; ++e) {
    for (int k = 0; k < nq; ++k) {
      q.points[e * nq + k] = (e + q.base.x[k]) * h;
      q.weights[e * nq + k] = q.base.w[k] * h;
    }
  }
  return q;
}

}  // namespace kls
