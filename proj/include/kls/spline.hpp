// B-spline and NURBS kernel: knot vectors, basis functions with derivatives,
// tensor-product rational surfaces, and h/p refinement of a Bezier master patch.
#pragma once

#include <array>
#include <string>
#include <vector>

#include "kls/jet.hpp"
#include "kls/vec3.hpp"

namespace kls {

// Open knot vector on [0,1]. Interior knots must be simple (maximal smoothness).
struct KnotVector {
  int degree = 0;
  std::vector<double> values;

  KnotVector() = default;
  KnotVector(int p, std::vector<double> v);

  int num_basis() const { return static_cast<int>(values.size()) - degree - 1; }
  int num_elements() const { return num_basis() - degree; }
  // Distinct breakpoints 0 = z_0 < ... < z_m = 1.
  std::vector<double> breakpoints() const;

  void validate() const;

  static KnotVector bezier(int p);
  static KnotVector uniform(int p, int elements);
};

// Index k (0-based) with values[k] <= xi < values[k+1]; the last non-empty
// span is returned for xi == 1.
int find_span(const KnotVector& kv, double xi);

// Values and derivatives of the p+1 functions active in `span`.
struct BasisEval {
  int span = 0;
  int degree = 0;
  int max_order = 0;
  std::vector<double> table;  // (max_order+1) x (degree+1), row k = k-th derivative

  double operator()(int order, int j) const { return table[order * (degree + 1) + j]; }
};

BasisEval eval_basis(const KnotVector& kv, double xi, int n_d);

// Partial derivatives of the surface map up to `order` (<= 5) in multi-index layout.
template <class T>
struct SurfaceJetT {
  int order = 0;
  std::array<Vec3<T>, num_multi_indices(5)> d{};

  const Vec3<T>& x() const { return d[0]; }
  const Vec3<T>& at(int i, int j) const { return d[multi_index(i, j)]; }
  // x_{,a}, x_{,ab}, x_{,abc} with 0-based Greek indices.
  const Vec3<T>& d1(int a) const { return at(a == 0, a == 1); }
  const Vec3<T>& d2(int a, int b) const {
    int n2 = (a == 1) + (b == 1);
    return at(2 - n2, n2);
  }
  const Vec3<T>& d3(int a, int b, int c) const {
    int n2 = (a == 1) + (b == 1) + (c == 1);
    return at(3 - n2, n2);
  }
};
using SurfaceJet = SurfaceJetT<double>;

struct NurbsPatch {
  std::array<KnotVector, 2> knots;
  // Control points and weights, index i + n1 * j (i along xi1).
  std::vector<Vec3d> points;
  std::vector<double> weights;

  int degree(int dir) const { return knots[dir].degree; }
  int n(int dir) const { return knots[dir].num_basis(); }
  int num_basis() const { return n(0) * n(1); }
  int elements(int dir) const { return knots[dir].num_elements(); }
  bool is_polynomial() const;

  void validate() const;
};

SurfaceJet eval_surface(const NurbsPatch& patch, double xi1, double xi2, int order);

// Rational basis functions active at a point together with their partial
// derivatives up to `order` (<= 4), in multi-index layout.
struct RationalBasis {
  int order = 0;
  int nder = 0;
  std::vector<int> index;     // global basis index of each local function
  std::vector<double> values; // local function k, derivative m at values[k * nder + m]

  int size() const { return static_cast<int>(index.size()); }
  double operator()(int k, int i, int j) const { return values[k * nder + multi_index(i, j)]; }
  const double* row(int k) const { return values.data() + k * nder; }
};

RationalBasis eval_rational_basis(const NurbsPatch& patch, double xi1, double xi2, int order);

// Evaluate a field sum_k c_k R_k and its derivatives; c holds one 3-vector per basis.
SurfaceJet eval_field(const NurbsPatch& patch, const std::vector<Vec3d>& coeffs, double xi1, double xi2,
                      int order);

// Degree elevation (single-element patches only) followed by insertion of
// uniform knots k/m, each once.
NurbsPatch refine(const NurbsPatch& patch, int target_degree, int elements_per_dir);

// Symmetric elevation to target degree only (used internally and by tests).
NurbsPatch elevate_degree(const NurbsPatch& patch, int target_degree);
NurbsPatch insert_uniform_knots(const NurbsPatch& patch, int elements_per_dir);

// Taylor jet of the rational map of a single-element (Bezier) patch about a
// point, computed with jet arithmetic. Supports any order and scalar type.
template <class T, int N>
std::array<Jet<T, N>, 3> bezier_map_jet(const NurbsPatch& patch, const T& xi1, const T& xi2);

// JSON (de)serialization: {degrees, knots, control_points, weights}.
std::string patch_to_json(const NurbsPatch& patch);
NurbsPatch patch_from_json(const std::string& text);

}  // namespace kls

#include "kls/spline_impl.hpp"
