// Template definitions for geometry.hpp.
#pragma once

#include <sstream>

namespace kls {

template <class S>
SurfaceFrameT<S> build_frame(const SurfaceJetT<S>& jet, bool with_dGamma, double /*scale*/) {
  using std::sqrt;
  if (jet.order < 2 || (with_dGamma && jet.order < 3)) {
    throw Error(ErrorKind::Domain, "build_frame: surface jet order too low");
  }
  SurfaceFrameT<S> f;
  f.x = jet.x();
  f.a[0] = jet.d1(0);
  f.a[1] = jet.d1(1);
  Vec3<S> cr = cross(f.a[0], f.a[1]);
  S jac = norm(cr);
  {
    const double ref = value_of(norm(f.a[0])) * value_of(norm(f.a[1]));
    const double jv = value_of(jac);
    if (!(jv > 1e-14 * ref) || !(ref > 0.0)) {
      std::ostringstream os;
      os << "singular surface parameterization: |a1 x a2| = " << jv;
      throw Error(ErrorKind::SingularSurface, os.str());
    }
  }
  f.a3 = cr / jac;
  for (int al = 0; al < 2; ++al)
    for (int be = 0; be < 2; ++be) f.a_cov[al][be] = dot(f.a[al], f.a[be]);
  S det = f.a_cov[0][0] * f.a_cov[1][1] - f.a_cov[0][1] * f.a_cov[1][0];
  f.det_a = sqrt(det);
  S inv = S(1.0) / det;
  f.a_con[0][0] = f.a_cov[1][1] * inv;
  f.a_con[1][1] = f.a_cov[0][0] * inv;
  f.a_con[0][1] = -(f.a_cov[0][1] * inv);
  f.a_con[1][0] = f.a_con[0][1];
  for (int al = 0; al < 2; ++al) f.acon[al] = f.a[0] * f.a_con[al][0] + f.a[1] * f.a_con[al][1];

  for (int al = 0; al < 2; ++al)
    for (int be = 0; be < 2; ++be) f.xdd[al][be] = jet.d2(al, be);
  for (int la = 0; la < 2; ++la)
    for (int al = 0; al < 2; ++al)
      for (int be = 0; be < 2; ++be) f.Gamma[la][al][be] = dot(f.acon[la], f.xdd[al][be]);
  for (int al = 0; al < 2; ++al)
    for (int be = 0; be < 2; ++be) f.b[al][be] = dot(f.a3, f.xdd[al][be]);
  for (int al = 0; al < 2; ++al)
    for (int be = 0; be < 2; ++be) f.b_mix[al][be] = f.a_con[al][0] * f.b[0][be] + f.a_con[al][1] * f.b[1][be];
  for (int al = 0; al < 2; ++al)
    for (int be = 0; be < 2; ++be) f.c[al][be] = f.b_mix[0][al] * f.b[0][be] + f.b_mix[1][al] * f.b[1][be];

  if (with_dGamma) {
    f.has_dGamma = true;
    for (int la = 0; la < 2; ++la)
      for (int al = 0; al < 2; ++al)
        for (int be = 0; be < 2; ++be)
          for (int mu = 0; mu < 2; ++mu) {
            S v = f.b[al][be] * f.b_mix[la][mu] + dot(f.acon[la], jet.d3(al, be, mu));
            for (int nu = 0; nu < 2; ++nu) v -= f.Gamma[la][nu][mu] * f.Gamma[nu][al][be];
            f.dGamma[la][al][be][mu] = v;
          }
  }
  return f;
}

template <class S>
EdgeFrameT<S> build_edge_frame(const SurfaceFrameT<S>& f, Edge edge) {
  using std::sqrt;
  EdgeFrameT<S> e;
  e.edge = edge;
  const auto st = edge_tangent(edge);
  e.s_up = {S(st[0]), S(st[1])};
  std::array<S, 2> s_cov = lower_index(f, e.s_up);
  e.s_norm = sqrt(e.s_up[0] * s_cov[0] + e.s_up[1] * s_cov[1]);
  for (int al = 0; al < 2; ++al) {
    e.t_up[al] = e.s_up[al] / e.s_norm;
    e.t_cov[al] = s_cov[al] / e.s_norm;
  }
  e.n_cov = {f.det_a * e.t_up[1], -(f.det_a * e.t_up[0])};
  e.n_up = raise_index(f, e.n_cov);
  e.t = f.a[0] * e.t_up[0] + f.a[1] * e.t_up[1];
  e.n = f.a[0] * e.n_up[0] + f.a[1] * e.n_up[1];

  // s^a_{|b} = Gamma^a_{lb} s^l (the components s^a are constant), s_{a|b} = a_{al} s^l_{|b}.
  Mat2<S> s_up_d{}, s_cov_d{};
  for (int al = 0; al < 2; ++al)
    for (int be = 0; be < 2; ++be) s_up_d[al][be] = f.Gamma[al][0][be] * e.s_up[0] + f.Gamma[al][1][be] * e.s_up[1];
  for (int al = 0; al < 2; ++al)
    for (int be = 0; be < 2; ++be) s_cov_d[al][be] = f.a_cov[al][0] * s_up_d[0][be] + f.a_cov[al][1] * s_up_d[1][be];
  // ||s||_{,b} = t^l s_{l|b}
  std::array<S, 2> snorm_d{};
  for (int be = 0; be < 2; ++be) snorm_d[be] = e.t_up[0] * s_cov_d[0][be] + e.t_up[1] * s_cov_d[1][be];
  for (int al = 0; al < 2; ++al)
    for (int be = 0; be < 2; ++be) {
      e.t_cov_d[al][be] = (s_cov_d[al][be] - e.t_cov[al] * snorm_d[be]) / e.s_norm;
      e.t_up_partial[al][be] = -(e.t_up[al] * snorm_d[be]) / e.s_norm;
    }
  // n_{a,b} = |a| (t^2_{,b}, -t^1_{,b}) + |a|_{,b} (t^2, -t^1) with |a|_{,b} = Gamma^l_{lb} |a|;
  // n_{a|b} = n_{a,b} - Gamma^l_{ab} n_l.
  for (int be = 0; be < 2; ++be) {
    S deta_d = (f.Gamma[0][0][be] + f.Gamma[1][1][be]) * f.det_a;
    std::array<S, 2> n_partial = {f.det_a * e.t_up_partial[1][be] + deta_d * e.t_up[1],
                                  -(f.det_a * e.t_up_partial[0][be] + deta_d * e.t_up[0])};
    for (int al = 0; al < 2; ++al) {
      e.n_cov_d[al][be] = n_partial[al] - (f.Gamma[0][al][be] * e.n_cov[0] + f.Gamma[1][al][be] * e.n_cov[1]);
    }
  }
  return e;
}

}  // namespace kls
