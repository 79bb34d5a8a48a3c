// Double-double arithmetic: an unevaluated sum hi + lo of two doubles with
// |lo| <= ulp(hi)/2, giving roughly 31 significant decimal digits.
//
// The error-free transformations follow Dekker and Knuth; the composite
// operations follow the "accurate" variants used by the QD library.
#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>

namespace kls {

struct DoubleDouble {
  double hi = 0.0;
  double lo = 0.0;

  constexpr DoubleDouble() = default;
  constexpr DoubleDouble(double h) : hi(h), lo(0.0) {}  // NOLINT implicit on purpose
  constexpr DoubleDouble(double h, double l) : hi(h), lo(l) {}

  explicit operator double() const { return hi + lo; }
};

using dd = DoubleDouble;

namespace ddx {

inline dd two_sum(double a, double b) {
  double s = a + b;
  double bb = s - a;
  double e = (a - (s - bb)) + (b - bb);
  return {s, e};
}

inline dd quick_two_sum(double a, double b) {
  double s = a + b;
  double e = b - (s - a);
  return {s, e};
}

inline dd two_prod(double a, double b) {
  double p = a * b;
  double e = std::fma(a, b, -p);
  return {p, e};
}

}  // namespace ddx

inline dd operator-(const dd& a) { return {-a.hi, -a.lo}; }

inline dd operator+(const dd& a, const dd& b) {
  dd s = ddx::two_sum(a.hi, b.hi);
  dd t = ddx::two_sum(a.lo, b.lo);
  s.lo += t.hi;
  s = ddx::quick_two_sum(s.hi, s.lo);
  s.lo += t.lo;
  return ddx::quick_two_sum(s.hi, s.lo);
}

inline dd operator+(const dd& a, double b) {
  dd s = ddx::two_sum(a.hi, b);
  s.lo += a.lo;
  return ddx::quick_two_sum(s.hi, s.lo);
}
inline dd operator+(double a, const dd& b) { return b + a; }

inline dd operator-(const dd& a, const dd& b) { return a + (-b); }
inline dd operator-(const dd& a, double b) { return a + (-b); }
inline dd operator-(double a, const dd& b) { return (-b) + a; }

inline dd operator*(const dd& a, const dd& b) {
  dd p = ddx::two_prod(a.hi, b.hi);
  p.lo += a.hi * b.lo + a.lo * b.hi;
  return ddx::quick_two_sum(p.hi, p.lo);
}

inline dd operator*(const dd& a, double b) {
  dd p = ddx::two_prod(a.hi, b);
  p.lo += a.lo * b;
  return ddx::quick_two_sum(p.hi, p.lo);
}
inline dd operator*(double a, const dd& b) { return b * a; }

inline dd operator/(const dd& a, const dd& b) {
  double q1 = a.hi / b.hi;
  dd r = a - b * q1;
  double q2 = r.hi / b.hi;
  r = r - b * q2;
  double q3 = r.hi / b.hi;
  dd q = ddx::quick_two_sum(q1, q2);
  return q + q3;
}
inline dd operator/(const dd& a, double b) { return a / dd(b); }
inline dd operator/(double a, const dd& b) { return dd(a) / b; }

inline dd& operator+=(dd& a, const dd& b) { return a = a + b; }
inline dd& operator-=(dd& a, const dd& b) { return a = a - b; }
inline dd& operator*=(dd& a, const dd& b) { return a = a * b; }
inline dd& operator/=(dd& a, const dd& b) { return a = a / b; }

inline bool operator<(const dd& a, const dd& b) { return a.hi < b.hi || (a.hi == b.hi && a.lo < b.lo); }
inline bool operator>(const dd& a, const dd& b) { return b < a; }
inline bool operator<=(const dd& a, const dd& b) { return !(b < a); }
inline bool operator>=(const dd& a, const dd& b) { return !(a < b); }
inline bool operator==(const dd& a, const dd& b) { return a.hi == b.hi && a.lo == b.lo; }
inline bool operator!=(const dd& a, const dd& b) { return !(a == b); }

inline dd abs(const dd& a) { return a.hi < 0.0 ? -a : a; }
inline dd fabs(const dd& a) { return abs(a); }

inline dd sqr(const dd& a) { return a * a; }

inline dd sqrt(const dd& a) {
  if (a.hi <= 0.0) return dd(a.hi == 0.0 ? 0.0 : std::numeric_limits<double>::quiet_NaN());
  double x = 1.0 / std::sqrt(a.hi);
  double ax = a.hi * x;
  dd axx(ax);
  dd diff = a - axx * axx;
  return axx + diff.hi * (x * 0.5);
}

inline bool isfinite(const dd& a) { return std::isfinite(a.hi) && std::isfinite(a.lo); }
inline bool isnan(const dd& a) { return std::isnan(a.hi) || std::isnan(a.lo); }

inline dd ldexp(const dd& a, int e) { return {std::ldexp(a.hi, e), std::ldexp(a.lo, e)}; }

namespace ddc {
inline constexpr dd pi{3.141592653589793116e+00, 1.224646799147353207e-16};
inline constexpr dd half_pi{1.570796326794896558e+00, 6.123233995736766036e-17};
inline constexpr dd ln2{6.931471805599452862e-01, 2.319046813846299558e-17};
inline constexpr dd e{2.718281828459045091e+00, 1.445646891729250158e-16};
}  // namespace ddc

inline dd exp(const dd& a) {
  if (a.hi > 709.0) return dd(std::numeric_limits<double>::infinity());
  if (a.hi < -745.0) return dd(0.0);
  // a = k ln2 + r with |r| <= ln2/2, then exp(r) = (exp(r/2^9))^(2^9).
  double k = std::nearbyint(a.hi / ddc::ln2.hi);
  dd r = a - ddc::ln2 * k;
  r = ldexp(r, -9);
  dd term = r;
  dd sum = r;
  for (int n = 2; n < 30; ++n) {
    term = term * r / static_cast<double>(n);
    sum += term;
    if (std::fabs(term.hi) < 1e-34 * std::fabs(sum.hi) + 1e-300) break;
  }
  // sum = exp(r) - 1; squaring as (1+s)^2 - 1 = s(2+s) keeps the small part accurate.
  for (int i = 0; i < 9; ++i) sum = sum * (sum + 2.0);
  sum = sum + 1.0;
  return ldexp(sum, static_cast<int>(k));
}

namespace ddx {
// Taylor series of sin and cos for |r| <= pi/4.
inline dd sin_taylor(const dd& r) {
  dd r2 = r * r;
  dd term = r;
  dd sum = r;
  for (int n = 1; n < 30; ++n) {
    term = -term * r2 / static_cast<double>((2 * n) * (2 * n + 1));
    sum += term;
    if (std::fabs(term.hi) < 1e-34 * (std::fabs(sum.hi) + 1e-300)) break;
  }
  return sum;
}
inline dd cos_taylor(const dd& r) {
  dd r2 = r * r;
  dd term(1.0);
  dd sum(1.0);
  for (int n = 1; n < 30; ++n) {
    term = -term * r2 / static_cast<double>((2 * n - 1) * (2 * n));
    sum += term;
    if (std::fabs(term.hi) < 1e-34) break;
  }
  return sum;
}
// Reduce a = k*(pi/2) + r. Adequate for the modest arguments used here.
inline dd reduce_half_pi(const dd& a, int& quadrant) {
  double k = std::nearbyint(a.hi / ddc::half_pi.hi);
  dd r = a - ddc::half_pi * k;
  long q = static_cast<long>(k) % 4;
  if (q < 0) q += 4;
  quadrant = static_cast<int>(q);
  return r;
}
}  // namespace ddx

inline dd sin(const dd& a) {
  int q = 0;
  dd r = ddx::reduce_half_pi(a, q);
  switch (q) {
    case 0: return ddx::sin_taylor(r);
    case 1: return ddx::cos_taylor(r);
    case 2: return -ddx::sin_taylor(r);
    default: return -ddx::cos_taylor(r);
  }
}

inline dd cos(const dd& a) {
  int q = 0;
  dd r = ddx::reduce_half_pi(a, q);
  switch (q) {
    case 0: return ddx::cos_taylor(r);
    case 1: return -ddx::sin_taylor(r);
    case 2: return -ddx::cos_taylor(r);
    default: return ddx::sin_taylor(r);
  }
}

inline std::ostream& operator<<(std::ostream& os, const dd& a) {
  return os << a.hi << (a.lo >= 0 ? "+" : "") << a.lo;
}

// Scalar traits shared by double and dd so templated numerics can ask for
// constants and a rounded double value without special-casing.
template <class T>
struct ScalarTraits;

template <>
struct ScalarTraits<double> {
  static double pi() { return 3.141592653589793; }
  static double euler() { return 2.718281828459045; }
  static double to_double(double x) { return x; }
};

template <>
struct ScalarTraits<dd> {
  static dd pi() { return ddc::pi; }
  static dd euler() { return ddc::e; }
  static double to_double(const dd& x) { return x.hi + x.lo; }
};

// Dot product of two double vectors accumulated in double-double.
inline dd dot_dd(const double* a, const double* b, std::size_t n) {
  dd s(0.0);
  for (std::size_t i = 0; i < n; ++i) s += ddx::two_prod(a[i], b[i]);
  return s;
}

}  // namespace kls
