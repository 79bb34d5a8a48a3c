// Template definitions for spline.hpp.
#pragma once

#include <vector>

#include "kls/errors.hpp"

namespace kls {

namespace splinex {
// Bernstein polynomials of degree p at a jet-valued argument.
template <class J>
std::vector<J> bernstein(int p, const J& t) {
  std::vector<J> b(p + 1);
  J one(1.0);
  J s = one - t;
  // de Casteljau-style recurrence: B^k_i = s B^{k-1}_i + t B^{k-1}_{i-1}
  b[0] = one;
  for (int k = 1; k <= p; ++k) {
    J prev(0.0);
    for (int i = 0; i <= k; ++i) {
      J cur = (i < k) ? b[i] : J(0.0);
      b[i] = s * cur + t * prev;
      prev = cur;
    }
  }
  return b;
}
}  // namespace splinex

template <class T, int N>
std::array<Jet<T, N>, 3> bezier_map_jet(const NurbsPatch& patch, const T& xi1, const T& xi2) {
  using J = Jet<T, N>;
  if (patch.elements(0) != 1 || patch.elements(1) != 1) {
    throw Error(ErrorKind::Domain, "bezier_map_jet requires a single-element patch");
  }
  const int p1 = patch.degree(0), p2 = patch.degree(1);
  auto b1 = splinex::bernstein(p1, J::variable(0, xi1));
  auto b2 = splinex::bernstein(p2, J::variable(1, xi2));
  std::array<J, 3> num{J(0.0), J(0.0), J(0.0)};
  J den(0.0);
  const int n1 = p1 + 1;
  for (int j = 0; j <= p2; ++j) {
    for (int i = 0; i <= p1; ++i) {
      const int k = i + n1 * j;
      J bw = b1[i] * b2[j] * T(patch.weights[k]);
      den += bw;
      for (int c = 0; c < 3; ++c) num[c] += bw * T(patch.points[k][c]);
    }
  }
  J inv = reciprocal(den);
  return {num[0] * inv, num[1] * inv, num[2] * inv};
}

}  // namespace kls
