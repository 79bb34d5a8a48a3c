// Gauss-Legendre rules on [0,1] and the global tensor-product layout used for
// interior, edge and corner data on a uniformly refined patch.
#pragma once

#include <vector>

namespace kls {

struct GaussRule {
  std::vector<double> x;  // nodes in (0,1), ascending
  std::vector<double> w;  // weights, summing to 1
};

// n-point rule, exact for polynomials of degree 2n-1.
GaussRule gauss_legendre(int n);

// Points per element and direction used for stiffness, load and error
// integrals: max(p + 3, ceil(100 / mesh)), so coarse meshes still see about
// 100 points per direction.
int default_quadrature_points(int degree, int mesh);

// The same n-point rule on each of the `mesh` uniform spans of [0,1].
// Global 1D point k = e * nq + q lies in span e; interior point (k1, k2) has
// flat index k1 + n1d * k2, and edge points follow the increasing varying
// parameter.
struct QuadratureRule {
  int mesh = 0;
  int nq = 0;
  GaussRule base;
  std::vector<double> points;   // global 1D points
  std::vector<double> weights;  // global 1D weights (sum 1)

  static QuadratureRule uniform(int mesh, int nq);

  int n1d() const { return mesh * nq; }
  int num_interior() const { return n1d() * n1d(); }
  int num_edge() const { return n1d(); }
};

}  // namespace kls
