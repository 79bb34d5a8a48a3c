// Minimal 3-vector over an arbitrary scalar (double, dd, or a jet).
#pragma once

#include <array>
#include <cmath>

namespace kls {

template <class S>
struct Vec3 {
  std::array<S, 3> v{S(0.0), S(0.0), S(0.0)};

  Vec3() = default;
  Vec3(const S& x, const S& y, const S& z) : v{x, y, z} {}

  S& operator[](int i) { return v[i]; }
  const S& operator[](int i) const { return v[i]; }

  Vec3& operator+=(const Vec3& o) {
    for (int i = 0; i < 3; ++i) v[i] += o.v[i];
    return *this;
  }
  Vec3& operator-=(const Vec3& o) {
    for (int i = 0; i < 3; ++i) v[i] -= o.v[i];
    return *this;
  }
};

template <class S>
Vec3<S> operator+(Vec3<S> a, const Vec3<S>& b) {
  return a += b;
}
template <class S>
Vec3<S> operator-(Vec3<S> a, const Vec3<S>& b) {
  return a -= b;
}
template <class S>
Vec3<S> operator-(const Vec3<S>& a) {
  return {-a[0], -a[1], -a[2]};
}
template <class S, class F>
Vec3<S> operator*(const Vec3<S>& a, const F& s) {
  return {a[0] * s, a[1] * s, a[2] * s};
}
template <class S, class F>
Vec3<S> operator*(const F& s, const Vec3<S>& a) {
  return {a[0] * s, a[1] * s, a[2] * s};
}
template <class S, class F>
Vec3<S> operator/(const Vec3<S>& a, const F& s) {
  return {a[0] / s, a[1] / s, a[2] / s};
}

template <class S>
S dot(const Vec3<S>& a, const Vec3<S>& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

template <class S>
Vec3<S> cross(const Vec3<S>& a, const Vec3<S>& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

template <class S>
S norm(const Vec3<S>& a) {
  using std::sqrt;
  return sqrt(dot(a, a));
}

template <class To, class From>
Vec3<To> vec_cast(const Vec3<From>& a) {
  return {To(a[0]), To(a[1]), To(a[2])};
}

using Vec3d = Vec3<double>;

}  // namespace kls
