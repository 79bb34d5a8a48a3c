// Template definitions for mechanics.hpp.
#pragma once

#include "kls/errors.hpp"

namespace kls {

template <class S>
ElasticityTensor<S> elasticity(const SurfaceFrameT<S>& f, const Material& m) {
  ElasticityTensor<S> t;
  const double mu = m.E / (2.0 * (1.0 + m.nu));
  const double lam = 2.0 * m.nu / (1.0 - m.nu);
  const auto& g = f.a_con;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int l = 0; l < 2; ++l)
        for (int n = 0; n < 2; ++n)
          t.C[a][b][l][n] = (g[a][l] * g[b][n] + g[a][n] * g[b][l] + g[a][b] * g[l][n] * lam) * mu;
  return t;
}

template <class S>
S elasticity_magnitude_sq(const SurfaceFrameT<S>& f, const ElasticityTensor<S>& c) {
  // Lower all four indices with a_{ab}, then contract.
  Tensor4<S> low{};
  const auto& g = f.a_cov;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int l = 0; l < 2; ++l)
        for (int n = 0; n < 2; ++n) {
          S v(0.0);
          for (int p = 0; p < 2; ++p)
            for (int q = 0; q < 2; ++q)
              for (int r = 0; r < 2; ++r)
                for (int s = 0; s < 2; ++s) v += g[a][p] * g[b][q] * g[l][r] * g[n][s] * c.C[p][q][r][s];
          low[a][b][l][n] = v;
        }
  S sum(0.0);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int l = 0; l < 2; ++l)
        for (int n = 0; n < 2; ++n) sum += c.C[a][b][l][n] * low[a][b][l][n];
  return sum;
}

template <class S>
Kinematics<S> kinematics(const SurfaceFrameT<S>& f, const SurfaceJetT<S>& u, bool third) {
  if (u.order < 2 || (third && (u.order < 3 || !f.has_dGamma))) {
    throw Error(ErrorKind::Domain, "kinematics: third derivatives of geometry and field are required");
  }
  Kinematics<S> k;
  for (int a = 0; a < 2; ++a) k.du[a] = u.d1(a);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      k.u_cd[a][b] = u.d2(a, b) - k.du[0] * f.Gamma[0][a][b] - k.du[1] * f.Gamma[1][a][b];
    }
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      k.alpha[a][b] = (dot(f.a[a], k.du[b]) + dot(f.a[b], k.du[a])) * 0.5;
      k.beta[a][b] = -dot(f.a3, k.u_cd[a][b]);
    }
  if (!third) return k;
  k.has_third = true;
  for (int m = 0; m < 2; ++m)
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        Vec3<S> v = u.d3(a, b, m);
        for (int l = 0; l < 2; ++l) {
          v -= k.du[l] * f.dGamma[l][a][b][m];
          v -= u.d2(l, m) * f.Gamma[l][a][b];
          v -= k.u_cd[l][b] * f.Gamma[l][a][m];
          v -= k.u_cd[a][l] * f.Gamma[l][b][m];
        }
        k.u_cdd[m][a][b] = v;
      }
  // beta_{ab|n} = b^l_n a_l . u_{|ab} - a3 . u_{|abn}
  for (int n = 0; n < 2; ++n)
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        S v = -dot(f.a3, k.u_cdd[n][a][b]);
        for (int l = 0; l < 2; ++l) v += f.b_mix[l][n] * dot(f.a[l], k.u_cd[a][b]);
        k.beta_d[n][a][b] = v;
      }
  return k;
}

template <class S>
S rotation_n(const SurfaceFrameT<S>& f, const EdgeFrameT<S>& e, const Kinematics<S>& k) {
  return -dot(f.a3, k.du[0] * e.n_up[0] + k.du[1] * e.n_up[1]);
}

template <class S>
S rotation_t(const SurfaceFrameT<S>& f, const EdgeFrameT<S>& e, const Kinematics<S>& k) {
  return -dot(f.a3, k.du[0] * e.t_up[0] + k.du[1] * e.t_up[1]);
}

template <class S>
BoundaryActions<S> boundary_actions(const SurfaceFrameT<S>& f, const EdgeFrameT<S>& e, const ElasticityTensor<S>& c,
                                    const Kinematics<S>& k, const Material& m, ErsatzVariant variant) {
  if (!k.has_third) throw Error(ErrorKind::Domain, "boundary_actions: kinematics without third derivatives");
  BoundaryActions<S> r;
  const double bend = m.zeta * m.zeta * m.zeta / 12.0;
  Mat2<S> A = c.contract(k.alpha);
  Mat2<S> B = c.contract(k.beta);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      A[a][b] = A[a][b] * m.zeta;
      B[a][b] = B[a][b] * bend;
    }
  std::array<Mat2<S>, 2> Bd;  // Bd[l][a][b] = B^{ab}_{|l}
  for (int l = 0; l < 2; ++l) {
    Bd[l] = c.contract(k.beta_d[l]);
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) Bd[l][a][b] = Bd[l][a][b] * bend;
  }
  std::array<S, 2> Bn{};
  for (int a = 0; a < 2; ++a) {
    r.tau[a] = A[a][0] * e.n_cov[0] + A[a][1] * e.n_cov[1];
    Bn[a] = B[a][0] * e.n_cov[0] + B[a][1] * e.n_cov[1];
  }
  r.Bnn = e.n_cov[0] * Bn[0] + e.n_cov[1] * Bn[1];
  r.Bnt = e.t_cov[0] * Bn[0] + e.t_cov[1] * Bn[1];
  for (int a = 0; a < 2; ++a) {
    r.TA[a] = r.tau[a];
    S bBn = f.b_mix[a][0] * Bn[0] + f.b_mix[a][1] * Bn[1];
    if (variant == ErsatzVariant::Inconsistent) {
      r.TB[a] = -(bBn * 2.0);
    } else {
      S bt = f.b_mix[a][0] * e.t_up[0] + f.b_mix[a][1] * e.t_up[1];
      r.TB[a] = -bBn - r.Bnt * bt;
    }
  }
  // T3 = n_a B^{ab}_{|b} + t^l (n_{a|l} B^{ab} t_b + n_a B^{ab}_{|l} t_b + n_a B^{ab} t_{b|l})
  S t3(0.0);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      t3 += e.n_cov[a] * Bd[b][a][b];
      for (int l = 0; l < 2; ++l) {
        S inner = e.n_cov_d[a][l] * B[a][b] * e.t_cov[b] + e.n_cov[a] * Bd[l][a][b] * e.t_cov[b] +
                  e.n_cov[a] * B[a][b] * e.t_cov_d[b][l];
        t3 += e.t_up[l] * inner;
      }
    }
  r.T3 = t3;
  r.T = f.a[0] * (r.TA[0] + r.TB[0]) + f.a[1] * (r.TA[1] + r.TB[1]) + f.a3 * r.T3;
  return r;
}

namespace mechx {

// Taylor expansion (order 2) of every derivative of order <= 2 of a table of
// order >= 4: entry (i,j) becomes the jet of d^{i+j}/dxi1^i dxi2^j.
template <class T>
SurfaceJetT<Jet<T, 2>> lift2(const SurfaceJetT<T>& s) {
  SurfaceJetT<Jet<T, 2>> r;
  r.order = 2;
  for (int d = 0; d <= 2; ++d)
    for (int j = 0; j <= d; ++j) {
      const int i = d - j;
      Vec3<Jet<T, 2>> v;
      for (int e = 0; e <= 2; ++e)
        for (int l = 0; l <= e; ++l) {
          const int k = e - l;
          const double scale = 1.0 / (factorial(k) * factorial(l));
          for (int c = 0; c < 3; ++c) v[c].coef(k, l) = s.at(i + k, j + l)[c] * T(scale);
        }
      r.d[multi_index(i, j)] = v;
    }
  return r;
}

// Covariant divergence div(T)^a = T^{al}_{|l} of a contravariant tensor field.
template <class T, int N>
std::array<Jet<T, N - 1>, 2> divergence(const Mat2<Jet<T, N>>& t, const std::array<Mat2<Jet<T, 2>>, 2>& gamma) {
  std::array<Jet<T, N - 1>, 2> r;
  for (int a = 0; a < 2; ++a) {
    Jet<T, N - 1> v = partial(t[a][0], 0) + partial(t[a][1], 1);
    for (int m = 0; m < 2; ++m)
      for (int l = 0; l < 2; ++l) {
        v += truncate<N - 1>(gamma[a][m][l]) * truncate<N - 1>(t[m][l]);
        v += truncate<N - 1>(gamma[l][m][l]) * truncate<N - 1>(t[a][m]);
      }
    r[a] = v;
  }
  return r;
}

}  // namespace mechx

template <class T>
StrongFormLoad<T> strong_form_load(const SurfaceJetT<T>& x, const SurfaceJetT<T>& u, const Material& m) {
  using J = Jet<T, 2>;
  if (x.order < 4 || u.order < 4) throw Error(ErrorKind::Domain, "strong_form_load: jets of order 4 are required");
  const SurfaceJetT<J> lx = mechx::lift2(x);
  const SurfaceJetT<J> lu = mechx::lift2(u);
  const SurfaceFrameT<J> f = build_frame<J>(lx, false);
  const Kinematics<J> k = kinematics(f, lu, false);
  const ElasticityTensor<J> c = elasticity(f, m);
  const double bend = m.zeta * m.zeta * m.zeta / 12.0;
  Mat2<J> A = c.contract(k.alpha);
  Mat2<J> B = c.contract(k.beta);
  Mat2<J> M{};
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      A[a][b] = A[a][b] * T(m.zeta);
      B[a][b] = B[a][b] * T(bend);
    }
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) M[a][b] = f.b_mix[a][0] * B[0][b] + f.b_mix[a][1] * B[1][b];

  const auto V = mechx::divergence<T, 2>(B, f.Gamma);  // order 1
  const auto divA = mechx::divergence<T, 2>(A, f.Gamma);
  const auto divM = mechx::divergence<T, 2>(M, f.Gamma);
  T divV = V[0].deriv(1, 0) + V[1].deriv(0, 1);
  for (int a = 0; a < 2; ++a)
    for (int l = 0; l < 2; ++l) divV += f.Gamma[a][l][a].value() * V[l].value();

  StrongFormLoad<T> r;
  for (int a = 0; a < 2; ++a) {
    T v = divM[a].value() - divA[a].value();
    for (int n = 0; n < 2; ++n) v += f.b_mix[a][n].value() * V[n].value();
    r.fbar[a] = v;
  }
  T f3 = -divV;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) f3 += B[a][b].value() * f.c[a][b].value() - A[a][b].value() * f.b[a][b].value();
  r.f3 = f3;
  for (int i = 0; i < 3; ++i) {
    r.f[i] = r.fbar[0] * f.a[0][i].value() + r.fbar[1] * f.a[1][i].value() + r.f3 * f.a3[i].value();
  }
  return r;
}

}  // namespace kls
