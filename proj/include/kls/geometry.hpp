// Pointwise differential geometry of the midsurface and of its boundary.
//
// Index conventions: Greek indices are 0-based {0,1}; 2x2 tensors are stored
// row-major [a][b]; Christoffel symbols Gamma[l][a][b] = Gamma^l_{ab} and
// their derivatives dGamma[l][a][b][m] = Gamma^l_{ab,m}.
#pragma once

#include <array>
#include <cmath>

#include "kls/errors.hpp"
#include "kls/jet.hpp"
#include "kls/spline.hpp"
#include "kls/vec3.hpp"

namespace kls {

template <class S>
using Mat2 = std::array<std::array<S, 2>, 2>;

template <class S>
struct SurfaceFrameT {
  Vec3<S> x;
  std::array<Vec3<S>, 2> a;     // covariant basis a_a = x_{,a}
  Vec3<S> a3;                   // unit director
  std::array<Vec3<S>, 2> acon;  // contravariant basis a^a
  Mat2<S> a_cov{};              // a_{ab}
  Mat2<S> a_con{};              // a^{ab}
  S det_a{};                    // sqrt(det a_{ab}), area element
  Mat2<S> b{};                  // b_{ab}
  Mat2<S> b_mix{};              // b_mix[a][b] = b^a_b
  Mat2<S> c{};                  // c_{ab} = b^l_a b_{lb}
  std::array<Mat2<S>, 2> Gamma{};
  Mat2<Vec3<S>> xdd{};          // x_{,ab}
  bool has_dGamma = false;
  std::array<std::array<std::array<std::array<S, 2>, 2>, 2>, 2> dGamma{};

  // Cartesian <-> curvilinear transforms: Lambda^i_a = a_a[i], Lambda^i_3 = a3[i].
  S Lambda(int i, int al) const { return a[al][i]; }
  S Lambda3(int i) const { return a3[i]; }
  // Lambda^i_{a,l} = Gamma^m_{al} Lambda^i_m + b_{al} Lambda^i_3
  S dLambda(int i, int al, int l) const {
    return Gamma[0][al][l] * a[0][i] + Gamma[1][al][l] * a[1][i] + b[al][l] * a3[i];
  }
  // Lambda^i_{3,l} = -b^m_l Lambda^i_m
  S dLambda3(int i, int l) const { return -(b_mix[0][l] * a[0][i] + b_mix[1][l] * a[1][i]); }
};
using SurfaceFrame = SurfaceFrameT<double>;

// Builds the frame from a jet of order >= 2 (>= 3 when with_dGamma).
template <class S>
SurfaceFrameT<S> build_frame(const SurfaceJetT<S>& jet, bool with_dGamma, double scale = 1.0);

inline SurfaceFrame build_frame(const SurfaceJet& jet) { return build_frame<double>(jet, jet.order >= 3); }

template <class S>
std::array<S, 2> raise_index(const SurfaceFrameT<S>& f, const std::array<S, 2>& v) {
  return {f.a_con[0][0] * v[0] + f.a_con[0][1] * v[1], f.a_con[1][0] * v[0] + f.a_con[1][1] * v[1]};
}
template <class S>
std::array<S, 2> lower_index(const SurfaceFrameT<S>& f, const std::array<S, 2>& v) {
  return {f.a_cov[0][0] * v[0] + f.a_cov[0][1] * v[1], f.a_cov[1][0] * v[0] + f.a_cov[1][1] * v[1]};
}

// Parametric boundary edges, listed counterclockwise: S (xi2=0), E (xi1=1), N (xi2=1), W (xi1=0).
enum class Edge { S = 0, E = 1, N = 2, W = 3 };
const char* edge_name(Edge e);

template <class S>
struct EdgeFrameT {
  Edge edge = Edge::S;
  std::array<S, 2> s_up{};  // constant non-normalized tangent components s^a
  S s_norm{};
  std::array<S, 2> t_up{}, t_cov{};
  std::array<S, 2> n_up{}, n_cov{};
  Vec3<S> t, n;
  Mat2<S> t_cov_d{};  // t_{a|b}
  Mat2<S> n_cov_d{};  // n_{a|b}
  Mat2<S> t_up_partial{};  // t^a_{,b}
};
using EdgeFrame = EdgeFrameT<double>;

template <class S>
EdgeFrameT<S> build_edge_frame(const SurfaceFrameT<S>& f, Edge edge);

// Parametric point of an edge at coordinate s in [0,1] of the varying parameter
// (increasing xi, not the ccw direction).
std::array<double, 2> edge_point(Edge e, double s);
// Tangent components s^a for an edge.
std::array<double, 2> edge_tangent(Edge e);

}  // namespace kls

#include "kls/geometry_impl.hpp"
