// Truncated bivariate Taylor arithmetic ("jets").
//
// A Jet<T, N> holds the Taylor coefficients c_{ij}, i + j <= N, of a function
// of (xi1, xi2) about a base point. Arithmetic on jets propagates exact
// partial derivatives up to order N, which is how the code differentiates
// composite expressions (director fields, stresses) without finite differences.
//
// Coefficient layout is by total degree d = i + j, then by j:
//   (0,0) (1,0) (0,1) (2,0) (1,1) (0,2) (3,0) ...
// The same layout indexes derivative tables elsewhere (see multi_index()).
#pragma once

#include <array>
#include <cmath>
#include <cstddef>

#include "kls/dd.hpp"

namespace kls {

constexpr int num_multi_indices(int order) { return (order + 1) * (order + 2) / 2; }

// Position of the multi-index (i, j) in the layout above.
constexpr int multi_index(int i, int j) {
  const int d = i + j;
  return d * (d + 1) / 2 + j;
}

constexpr double factorial(int n) {
  double f = 1.0;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

template <class T, int N>
struct Jet {
  static constexpr int kOrder = N;
  static constexpr int kSize = num_multi_indices(N);
  std::array<T, kSize> c{};

  Jet() { c.fill(T(0.0)); }
  Jet(const T& v) {  // NOLINT implicit constant embedding
    c.fill(T(0.0));
    c[0] = v;
  }
  Jet(double v)  // NOLINT
    requires(!std::is_same_v<T, double>)
  {
    c.fill(T(0.0));
    c[0] = T(v);
  }

  // Independent variable xi_k evaluated at `value` (k = 0 or 1).
  static Jet variable(int k, const T& value) {
    Jet j(value);
    if constexpr (N >= 1) j.c[k == 0 ? 1 : 2] = T(1.0);
    return j;
  }

  const T& value() const { return c[0]; }
  T& coef(int i, int j) { return c[multi_index(i, j)]; }
  const T& coef(int i, int j) const { return c[multi_index(i, j)]; }

  // Partial derivative d^{i+j} / dxi1^i dxi2^j at the base point.
  T deriv(int i, int j) const { return c[multi_index(i, j)] * T(factorial(i) * factorial(j)); }

  Jet& operator+=(const Jet& o) {
    for (int k = 0; k < kSize; ++k) c[k] += o.c[k];
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    for (int k = 0; k < kSize; ++k) c[k] -= o.c[k];
    return *this;
  }
  Jet& operator*=(const Jet& o) { return *this = *this * o; }
  Jet& operator/=(const Jet& o) { return *this = *this / o; }
};

template <class T, int N>
Jet<T, N> operator-(const Jet<T, N>& a) {
  Jet<T, N> r;
  for (int k = 0; k < Jet<T, N>::kSize; ++k) r.c[k] = -a.c[k];
  return r;
}

template <class T, int N>
Jet<T, N> operator+(Jet<T, N> a, const Jet<T, N>& b) {
  return a += b;
}
template <class T, int N>
Jet<T, N> operator-(Jet<T, N> a, const Jet<T, N>& b) {
  return a -= b;
}
template <class T, int N>
Jet<T, N> operator+(Jet<T, N> a, const T& s) {
  a.c[0] += s;
  return a;
}
template <class T, int N>
Jet<T, N> operator+(const T& s, Jet<T, N> a) {
  a.c[0] += s;
  return a;
}
template <class T, int N>
Jet<T, N> operator-(Jet<T, N> a, const T& s) {
  a.c[0] -= s;
  return a;
}
template <class T, int N>
Jet<T, N> operator-(const T& s, const Jet<T, N>& a) {
  Jet<T, N> r = -a;
  r.c[0] += s;
  return r;
}
template <class T, int N>
Jet<T, N> operator*(Jet<T, N> a, const T& s) {
  for (auto& v : a.c) v *= s;
  return a;
}
template <class T, int N>
Jet<T, N> operator*(const T& s, Jet<T, N> a) {
  for (auto& v : a.c) v *= s;
  return a;
}
template <class T, int N>
Jet<T, N> operator/(Jet<T, N> a, const T& s) {
  T inv = T(1.0) / s;
  for (auto& v : a.c) v *= inv;
  return a;
}

// Double literals mixed with dd-valued jets.
template <class T, int N>
  requires(!std::is_same_v<T, double>)
Jet<T, N> operator*(Jet<T, N> a, double s) {
  for (auto& v : a.c) v = v * s;
  return a;
}
template <class T, int N>
  requires(!std::is_same_v<T, double>)
Jet<T, N> operator*(double s, Jet<T, N> a) {
  return a * s;
}
template <class T, int N>
  requires(!std::is_same_v<T, double>)
Jet<T, N> operator+(Jet<T, N> a, double s) {
  a.c[0] = a.c[0] + s;
  return a;
}
template <class T, int N>
  requires(!std::is_same_v<T, double>)
Jet<T, N> operator-(Jet<T, N> a, double s) {
  a.c[0] = a.c[0] - s;
  return a;
}
template <class T, int N>
  requires(!std::is_same_v<T, double>)
Jet<T, N> operator-(double s, const Jet<T, N>& a) {
  Jet<T, N> r = -a;
  r.c[0] = r.c[0] + s;
  return r;
}
template <class T, int N>
  requires(!std::is_same_v<T, double>)
Jet<T, N> operator/(Jet<T, N> a, double s) {
  for (auto& v : a.c) v = v / s;
  return a;
}

template <class T, int N>
Jet<T, N> operator*(const Jet<T, N>& a, const Jet<T, N>& b) {
  Jet<T, N> r;
  for (int d1 = 0; d1 <= N; ++d1) {
    for (int j1 = 0; j1 <= d1; ++j1) {
      const T& av = a.c[multi_index(d1 - j1, j1)];
      for (int d2 = 0; d1 + d2 <= N; ++d2) {
        for (int j2 = 0; j2 <= d2; ++j2) {
          r.c[multi_index(d1 - j1 + d2 - j2, j1 + j2)] += av * b.c[multi_index(d2 - j2, j2)];
        }
      }
    }
  }
  return r;
}

namespace jetx {
// f(a) = sum_k coeffs[k] (a - a0)^k for a function with Taylor coefficients
// coeffs about a0; the nilpotent part h = a - a0 satisfies h^{N+1} = 0.
template <class T, int N>
Jet<T, N> compose(const Jet<T, N>& a, const std::array<T, N + 1>& coeffs) {
  Jet<T, N> h = a;
  h.c[0] = T(0.0);
  Jet<T, N> r(coeffs[0]);
  Jet<T, N> hp = h;
  for (int k = 1; k <= N; ++k) {
    r += hp * coeffs[k];
    if (k < N) hp = hp * h;
  }
  return r;
}
}  // namespace jetx

template <class T, int N>
Jet<T, N> reciprocal(const Jet<T, N>& a) {
  std::array<T, N + 1> co;
  T inv = T(1.0) / a.c[0];
  co[0] = inv;
  for (int k = 1; k <= N; ++k) co[k] = -co[k - 1] * inv;
  return jetx::compose(a, co);
}

template <class T, int N>
Jet<T, N> operator/(const Jet<T, N>& a, const Jet<T, N>& b) {
  return a * reciprocal(b);
}
template <class T, int N>
Jet<T, N> operator/(const T& s, const Jet<T, N>& b) {
  return reciprocal(b) * s;
}

template <class T, int N>
Jet<T, N> sqrt(const Jet<T, N>& a) {
  using std::sqrt;
  std::array<T, N + 1> co;
  T s = sqrt(a.c[0]);
  co[0] = s;
  // d^k/dx^k sqrt(x) / k! = binom(1/2, k) x^{1/2-k}
  T inv = T(1.0) / a.c[0];
  double binom = 1.0;
  T pw = s;
  for (int k = 1; k <= N; ++k) {
    binom *= (0.5 - (k - 1)) / k;
    pw = pw * inv;
    co[k] = pw * T(binom);
  }
  return jetx::compose(a, co);
}

template <class T, int N>
Jet<T, N> exp(const Jet<T, N>& a) {
  using std::exp;
  std::array<T, N + 1> co;
  T e = exp(a.c[0]);
  for (int k = 0; k <= N; ++k) co[k] = e / T(factorial(k));
  return jetx::compose(a, co);
}

template <class T, int N>
Jet<T, N> sin(const Jet<T, N>& a) {
  using std::cos;
  using std::sin;
  std::array<T, N + 1> co;
  T s = sin(a.c[0]);
  T cc = cos(a.c[0]);
  const T cyc[4] = {s, cc, -s, -cc};
  for (int k = 0; k <= N; ++k) co[k] = cyc[k % 4] / T(factorial(k));
  return jetx::compose(a, co);
}

template <class T, int N>
Jet<T, N> cos(const Jet<T, N>& a) {
  using std::cos;
  using std::sin;
  std::array<T, N + 1> co;
  T s = sin(a.c[0]);
  T cc = cos(a.c[0]);
  const T cyc[4] = {cc, -s, -cc, s};
  for (int k = 0; k <= N; ++k) co[k] = cyc[k % 4] / T(factorial(k));
  return jetx::compose(a, co);
}

// Partial derivative with respect to xi_k (k = 0 or 1); the result loses one order.
template <class T, int N>
Jet<T, N - 1> partial(const Jet<T, N>& a, int k) {
  static_assert(N >= 1, "cannot differentiate an order-0 jet");
  Jet<T, N - 1> r;
  for (int d = 0; d <= N - 1; ++d) {
    for (int j = 0; j <= d; ++j) {
      const int i = d - j;
      if (k == 0) {
        r.c[multi_index(i, j)] = a.c[multi_index(i + 1, j)] * T(double(i + 1));
      } else {
        r.c[multi_index(i, j)] = a.c[multi_index(i, j + 1)] * T(double(j + 1));
      }
    }
  }
  return r;
}

template <int M, class T, int N>
Jet<T, M> truncate(const Jet<T, N>& a) {
  static_assert(M <= N, "truncate can only lower the order");
  Jet<T, M> r;
  for (int k = 0; k < Jet<T, M>::kSize; ++k) r.c[k] = a.c[k];
  return r;
}

// Build a jet from a table of partial derivatives in multi-index layout.
template <int N, class T, class Table>
Jet<T, N> jet_from_derivatives(const Table& d) {
  Jet<T, N> r;
  for (int dd_ = 0; dd_ <= N; ++dd_) {
    for (int j = 0; j <= dd_; ++j) {
      const int i = dd_ - j;
      r.c[multi_index(i, j)] = d[multi_index(i, j)] / T(factorial(i) * factorial(j));
    }
  }
  return r;
}

// Scalar value of a (possibly nested) numeric type, rounded to double.
inline double value_of(double x) { return x; }
inline double value_of(const dd& x) { return x.hi + x.lo; }
template <class T, int N>
double value_of(const Jet<T, N>& j) {
  return value_of(j.c[0]);
}

}  // namespace kls
