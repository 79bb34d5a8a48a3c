// Linear Kirchhoff-Love shell mechanics at a point: constitutive tensor,
// strains, stresses, boundary actions (ersatz forces, moments, corner jumps)
// and the strong-form operator that manufactures loads from a displacement.
//
// Displacements are Cartesian vector fields; all curvilinear quantities are
// obtained through the surface frame. Templates accept double, dd, or jets.
#pragma once

#include <array>

#include "kls/geometry.hpp"

namespace kls {

struct Material {
  double E = 1.0e7;   // Young's modulus [Pa]
  double nu = 0.3;    // Poisson ratio
  double zeta = 0.1;  // thickness [m]

  void validate() const;
  // |C| from the closed form sqrt(3 nu^2 - 2 nu + 3) E / (1 - nu^2).
  double c_magnitude() const;
};

template <class S>
using Tensor4 = std::array<std::array<Mat2<S>, 2>, 2>;

template <class S>
struct ElasticityTensor {
  Tensor4<S> C{};  // C^{ablm}

  // C^{ablm} e_{lm} for a symmetric covariant tensor e.
  Mat2<S> contract(const Mat2<S>& e) const {
    Mat2<S> r{};
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        r[a][b] = C[a][b][0][0] * e[0][0] + C[a][b][1][1] * e[1][1] + (C[a][b][0][1] + C[a][b][1][0]) * e[0][1];
    return r;
  }
};

template <class S>
ElasticityTensor<S> elasticity(const SurfaceFrameT<S>& f, const Material& m);

// |C|^2 = C^{ablm} C_{ablm} by explicit contraction with the covariant metric.
template <class S>
S elasticity_magnitude_sq(const SurfaceFrameT<S>& f, const ElasticityTensor<S>& c);

// Strains and covariant displacement derivatives of a Cartesian field u,
// given the frame and the partial derivatives of u (SurfaceJetT used as a
// generic vector-valued derivative table).
template <class S>
struct Kinematics {
  Mat2<Vec3<S>> u_cd{};    // u_{|ab}
  Mat2<S> alpha{};         // membrane strain alpha_{ab}
  Mat2<S> beta{};          // bending strain beta_{ab}
  bool has_third = false;
  std::array<Mat2<Vec3<S>>, 2> u_cdd{};  // u_cdd[m][a][b] = u_{|abm}
  std::array<Mat2<S>, 2> beta_d{};       // beta_d[n][a][b] = beta_{ab|n}
  std::array<Vec3<S>, 2> du{};           // u_{,a}
};

template <class S>
Kinematics<S> kinematics(const SurfaceFrameT<S>& f, const SurfaceJetT<S>& u, bool third);

// Normal and tangential rotations theta = -a3 . u_{,l} (n^l or t^l).
template <class S>
S rotation_n(const SurfaceFrameT<S>& f, const EdgeFrameT<S>& e, const Kinematics<S>& k);
template <class S>
S rotation_t(const SurfaceFrameT<S>& f, const EdgeFrameT<S>& e, const Kinematics<S>& k);

enum class ErsatzVariant { Consistent, Inconsistent };

template <class S>
struct BoundaryActions {
  std::array<S, 2> tau{};  // tau^a = A^{ab} n_b
  S Bnn{}, Bnt{};
  std::array<S, 2> TA{};   // membrane part of T^a
  std::array<S, 2> TB{};   // bending part of T^a
  S T3{};
  Vec3<S> T;               // Cartesian ersatz force (TA + TB)^a a_a + T3 a3
};

template <class S>
BoundaryActions<S> boundary_actions(const SurfaceFrameT<S>& f, const EdgeFrameT<S>& e, const ElasticityTensor<S>& c,
                                    const Kinematics<S>& k, const Material& m,
                                    ErsatzVariant variant = ErsatzVariant::Consistent);

// Twisting-moment jump at a corner: value after the corner minus value before
// (counterclockwise traversal).
inline double corner_jump(double bnt_before, double bnt_after) { return bnt_after - bnt_before; }

template <class T>
struct StrongFormLoad {
  std::array<T, 2> fbar{};  // in-plane contravariant components
  T f3{};                   // out-of-plane component
  Vec3<T> f;                // Cartesian load fbar^a a_a + f3 a3
};

// Strong-form operator of the shell applied to a displacement, from
// geometry and displacement derivatives up to order 4.
template <class T>
StrongFormLoad<T> strong_form_load(const SurfaceJetT<T>& x, const SurfaceJetT<T>& u, const Material& m);

}  // namespace kls

#include "kls/mechanics_impl.hpp"
