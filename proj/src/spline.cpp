#include "kls/spline.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "kls/errors.hpp"

namespace kls {

const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::Domain: return "domain";
    case ErrorKind::Validation: return "validation";
    case ErrorKind::SingularSurface: return "singular-surface";
    case ErrorKind::Schema: return "schema";
    case ErrorKind::GridMismatch: return "grid-mismatch";
    case ErrorKind::NonFinite: return "non-finite";
    case ErrorKind::NotSpd: return "not-spd";
    case ErrorKind::Eigen: return "eigen";
    case ErrorKind::InsufficientData: return "insufficient-data";
  }
  return "unknown";
}

KnotVector::KnotVector(int p, std::vector<double> v) : degree(p), values(std::move(v)) { validate(); }

void KnotVector::validate() const {
  const int p = degree;
  const int m = static_cast<int>(values.size());
  if (p < 1) throw Error(ErrorKind::Validation, "knot vector degree must be >= 1");
  if (m < 2 * (p + 1)) throw Error(ErrorKind::Validation, "knot vector too short for its degree");
  for (int i = 0; i + 1 < m; ++i) {
    if (!(values[i] <= values[i + 1])) throw Error(ErrorKind::Validation, "knot vector is not non-decreasing");
  }
  if (values.front() != 0.0 || values.back() != 1.0) {
    throw Error(ErrorKind::Validation, "knot vector must start at 0 and end at 1");
  }
  for (int i = 0; i <= p; ++i) {
    if (values[i] != 0.0 || values[m - 1 - i] != 1.0) {
      throw Error(ErrorKind::Validation, "knot vector is not open (end knots need multiplicity p+1)");
    }
  }
  if (values[p + 1] == 0.0 || values[m - p - 2] == 1.0) {
    throw Error(ErrorKind::Validation, "end knot multiplicity exceeds p+1");
  }
  for (int i = p + 1; i < m - p - 2; ++i) {
    if (!(values[i] < values[i + 1])) {
      throw Error(ErrorKind::Validation, "interior knots must be simple (zero-length span)");
    }
  }
}

std::vector<double> KnotVector::breakpoints() const {
  std::vector<double> z;
  for (double v : values) {
    if (z.empty() || v != z.back()) z.push_back(v);
  }
  return z;
}

KnotVector KnotVector::bezier(int p) { return uniform(p, 1); }

KnotVector KnotVector::uniform(int p, int elements) {
  std::vector<double> v(p + 1, 0.0);
  for (int k = 1; k < elements; ++k) v.push_back(static_cast<double>(k) / elements);
  v.insert(v.end(), p + 1, 1.0);
  return KnotVector(p, std::move(v));
}

int find_span(const KnotVector& kv, double xi) {
  if (!(xi >= 0.0 && xi <= 1.0)) {
    std::ostringstream os;
    os << "find_span: xi = " << xi << " outside [0,1]";
    throw Error(ErrorKind::Domain, os.str());
  }
  const int n = kv.num_basis();
  const int p = kv.degree;
  if (xi >= kv.values[n]) return n - 1;
  // values[p] = 0 <= xi < values[n] = 1: binary search for the span.
  int lo = p, hi = n;
  while (hi - lo > 1) {
    int mid = (lo + hi) / 2;
    if (xi < kv.values[mid]) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return lo;
}

BasisEval eval_basis(const KnotVector& kv, double xi, int n_d) {
  const int p = kv.degree;
  if (n_d < 0 || n_d > p + 2) throw Error(ErrorKind::Domain, "eval_basis: derivative order out of range");
  const int span = find_span(kv, xi);
  const auto& U = kv.values;

  // Triangular table of basis values (upper) and knot differences (lower).
  std::vector<double> ndu((p + 1) * (p + 1));
  auto NDU = [&](int r, int c) -> double& { return ndu[r * (p + 1) + c]; };
  std::vector<double> left(p + 1), right(p + 1);
  NDU(0, 0) = 1.0;
  for (int j = 1; j <= p; ++j) {
    left[j] = xi - U[span + 1 - j];
    right[j] = U[span + j] - xi;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      NDU(j, r) = right[r + 1] + left[j - r];
      double temp = NDU(r, j - 1) / NDU(j, r);
      NDU(r, j) = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    NDU(j, j) = saved;
  }

  BasisEval out;
  out.span = span;
  out.degree = p;
  out.max_order = n_d;
  out.table.assign((n_d + 1) * (p + 1), 0.0);
  auto D = [&](int k, int j) -> double& { return out.table[k * (p + 1) + j]; };
  for (int j = 0; j <= p; ++j) D(0, j) = NDU(j, p);

  const int top = std::min(n_d, p);
  std::vector<double> a(2 * (p + 1));
  auto A = [&](int s, int c) -> double& { return a[s * (p + 1) + c]; };
  for (int r = 0; r <= p; ++r) {
    int s1 = 0, s2 = 1;
    A(0, 0) = 1.0;
    for (int k = 1; k <= top; ++k) {
      double d = 0.0;
      int rk = r - k, pk = p - k;
      if (r >= k) {
        A(s2, 0) = A(s1, 0) / NDU(pk + 1, rk);
        d = A(s2, 0) * NDU(rk, pk);
      }
      int j1 = (rk >= -1) ? 1 : -rk;
      int j2 = (r - 1 <= pk) ? k - 1 : p - r;
      for (int j = j1; j <= j2; ++j) {
        A(s2, j) = (A(s1, j) - A(s1, j - 1)) / NDU(pk + 1, rk + j);
        d += A(s2, j) * NDU(rk + j, pk);
      }
      if (r <= pk) {
        A(s2, k) = -A(s1, k - 1) / NDU(pk + 1, r);
        d += A(s2, k) * NDU(r, pk);
      }
      D(k, r) = d;
      std::swap(s1, s2);
    }
  }
  double fac = p;
  for (int k = 1; k <= top; ++k) {
    for (int j = 0; j <= p; ++j) D(k, j) *= fac;
    fac *= (p - k);
  }
  return out;
}

bool NurbsPatch::is_polynomial() const {
  return std::all_of(weights.begin(), weights.end(), [](double w) { return w == 1.0; });
}

void NurbsPatch::validate() const {
  knots[0].validate();
  knots[1].validate();
  const std::size_t nb = static_cast<std::size_t>(num_basis());
  if (points.size() != nb || weights.size() != nb) {
    throw Error(ErrorKind::Validation, "control net size does not match knot vectors");
  }
  for (double w : weights) {
    if (!(w > 0.0) || !std::isfinite(w)) throw Error(ErrorKind::Validation, "weights must be positive and finite");
  }
}

namespace {

double binom(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// Rational derivatives from homogeneous ones by the generalized Leibniz rule:
// A = W S  =>  S^{(k,l)} = (A^{(k,l)} - sum_{(i,j) != 0} C(k,i) C(l,j) W^{(i,j)} S^{(k-i,l-j)}) / W.
template <class V>
void rational_from_homogeneous(int order, const std::vector<V>& A, const std::vector<double>& W, std::vector<V>& S) {
  S.assign(A.size(), V{});
  for (int d = 0; d <= order; ++d) {
    for (int l = 0; l <= d; ++l) {
      const int k = d - l;
      V v = A[multi_index(k, l)];
      for (int i = 0; i <= k; ++i) {
        for (int j = 0; j <= l; ++j) {
          if (i == 0 && j == 0) continue;
          v -= S[multi_index(k - i, l - j)] * (binom(k, i) * binom(l, j) * W[multi_index(i, j)]);
        }
      }
      S[multi_index(k, l)] = v * (1.0 / W[0]);
    }
  }
}

struct Scalar {
  double v = 0.0;
  Scalar& operator-=(const Scalar& o) {
    v -= o.v;
    return *this;
  }
  Scalar operator*(double s) const { return {v * s}; }
};

}  // namespace

SurfaceJet eval_surface(const NurbsPatch& patch, double xi1, double xi2, int order) {
  if (order < 0 || order > 5) throw Error(ErrorKind::Domain, "eval_surface: order must be in 0..5");
  const int p1 = patch.degree(0), p2 = patch.degree(1);
  BasisEval b1 = eval_basis(patch.knots[0], xi1, std::min(order, p1 + 2));
  BasisEval b2 = eval_basis(patch.knots[1], xi2, std::min(order, p2 + 2));
  auto N1 = [&](int k, int i) { return k <= b1.max_order ? b1(k, i) : 0.0; };
  auto N2 = [&](int k, int j) { return k <= b2.max_order ? b2(k, j) : 0.0; };
  const int n1 = patch.n(0);
  const int nm = num_multi_indices(order);
  const bool poly = patch.is_polynomial();

  std::vector<Vec3d> A(nm);
  std::vector<double> W(nm, 0.0);
  for (int d = 0; d <= order; ++d) {
    for (int l = 0; l <= d; ++l) {
      const int k = d - l;
      Vec3d acc;
      double wacc = 0.0;
      for (int j = 0; j <= p2; ++j) {
        const int gj = b2.span - p2 + j;
        const double nj = N2(l, j);
        if (nj == 0.0) continue;
        for (int i = 0; i <= p1; ++i) {
          const int gi = b1.span - p1 + i;
          const int g = gi + n1 * gj;
          const double bw = N1(k, i) * nj * (poly ? 1.0 : patch.weights[g]);
          acc += patch.points[g] * bw;
          wacc += bw;
        }
      }
      A[multi_index(k, l)] = acc;
      W[multi_index(k, l)] = wacc;
    }
  }
  SurfaceJet out;
  out.order = order;
  if (poly) {
    for (int m = 0; m < nm; ++m) out.d[m] = A[m];
    return out;
  }
  if (!(W[0] > 0.0)) throw Error(ErrorKind::Validation, "eval_surface: non-positive weight function");
  std::vector<Vec3d> S;
  rational_from_homogeneous(order, A, W, S);
  for (int m = 0; m < nm; ++m) out.d[m] = S[m];
  return out;
}

RationalBasis eval_rational_basis(const NurbsPatch& patch, double xi1, double xi2, int order) {
  if (order < 0 || order > 4) throw Error(ErrorKind::Domain, "eval_rational_basis: order must be in 0..4");
  const int p1 = patch.degree(0), p2 = patch.degree(1);
  BasisEval b1 = eval_basis(patch.knots[0], xi1, std::min(order, p1 + 2));
  BasisEval b2 = eval_basis(patch.knots[1], xi2, std::min(order, p2 + 2));
  auto N1 = [&](int k, int i) { return k <= b1.max_order ? b1(k, i) : 0.0; };
  auto N2 = [&](int k, int j) { return k <= b2.max_order ? b2(k, j) : 0.0; };
  const int n1 = patch.n(0);
  const int nm = num_multi_indices(order);
  const int nloc = (p1 + 1) * (p2 + 1);
  const bool poly = patch.is_polynomial();

  RationalBasis out;
  out.order = order;
  out.nder = nm;
  out.index.resize(nloc);
  out.values.assign(static_cast<std::size_t>(nloc) * nm, 0.0);

  std::vector<double> W(nm, 0.0);
  for (int j = 0; j <= p2; ++j) {
    for (int i = 0; i <= p1; ++i) {
      const int k = i + (p1 + 1) * j;
      const int g = (b1.span - p1 + i) + n1 * (b2.span - p2 + j);
      out.index[k] = g;
      const double w = poly ? 1.0 : patch.weights[g];
      for (int d = 0; d <= order; ++d) {
        for (int l = 0; l <= d; ++l) {
          const int m = multi_index(d - l, l);
          const double v = N1(d - l, i) * N2(l, j) * w;
          out.values[k * nm + m] = v;
          W[m] += v;
        }
      }
    }
  }
  if (poly) return out;
  std::vector<Scalar> A(nm), S;
  for (int k = 0; k < nloc; ++k) {
    for (int m = 0; m < nm; ++m) A[m].v = out.values[k * nm + m];
    rational_from_homogeneous(order, A, W, S);
    for (int m = 0; m < nm; ++m) out.values[k * nm + m] = S[m].v;
  }
  return out;
}

SurfaceJet eval_field(const NurbsPatch& patch, const std::vector<Vec3d>& coeffs, double xi1, double xi2,
                      int order) {
  RationalBasis rb = eval_rational_basis(patch, xi1, xi2, order);
  SurfaceJet out;
  out.order = order;
  for (int k = 0; k < rb.size(); ++k) {
    const Vec3d& c = coeffs[rb.index[k]];
    for (int m = 0; m < rb.nder; ++m) out.d[m] += c * rb.values[k * rb.nder + m];
  }
  return out;
}

namespace {

// Homogeneous control point (w x, w y, w z, w).
using H4 = std::array<double, 4>;

std::vector<H4> to_homogeneous(const NurbsPatch& p) {
  std::vector<H4> h(p.points.size());
  for (std::size_t k = 0; k < h.size(); ++k) {
    const double w = p.weights[k];
    h[k] = {p.points[k][0] * w, p.points[k][1] * w, p.points[k][2] * w, w};
  }
  return h;
}

void from_homogeneous(const std::vector<H4>& h, NurbsPatch& p) {
  p.points.resize(h.size());
  p.weights.resize(h.size());
  for (std::size_t k = 0; k < h.size(); ++k) {
    const double w = h[k][3];
    p.weights[k] = w;
    p.points[k] = {h[k][0] / w, h[k][1] / w, h[k][2] / w};
  }
}

// Apply a curve operation to every row (dir 0) or column (dir 1) of the net.
template <class Op>
std::vector<H4> map_lines(const std::vector<H4>& net, int n1, int n2, int dir, int new_len, Op op) {
  const int lines = dir == 0 ? n2 : n1;
  const int len = dir == 0 ? n1 : n2;
  const int o1 = dir == 0 ? new_len : n1;
  std::vector<H4> out(static_cast<std::size_t>(new_len) * lines);
  std::vector<H4> line(len);
  for (int l = 0; l < lines; ++l) {
    for (int t = 0; t < len; ++t) line[t] = dir == 0 ? net[t + n1 * l] : net[l + n1 * t];
    std::vector<H4> res = op(line);
    for (int t = 0; t < new_len; ++t) {
      if (dir == 0) {
        out[t + o1 * l] = res[t];
      } else {
        out[l + o1 * t] = res[t];
      }
    }
  }
  return out;
}

std::vector<H4> elevate_bezier_once(const std::vector<H4>& P) {
  const int p = static_cast<int>(P.size()) - 1;
  std::vector<H4> Q(p + 2);
  Q[0] = P[0];
  Q[p + 1] = P[p];
  for (int i = 1; i <= p; ++i) {
    const double a = static_cast<double>(i) / (p + 1);
    for (int c = 0; c < 4; ++c) Q[i][c] = a * P[i - 1][c] + (1.0 - a) * P[i][c];
  }
  return Q;
}

// Boehm single-knot insertion of u into a curve with knot vector U, degree p.
std::vector<H4> insert_knot(const std::vector<H4>& P, const std::vector<double>& U, int p, double u) {
  const int n = static_cast<int>(P.size());
  int k = p;
  while (k + 1 < static_cast<int>(U.size()) && U[k + 1] <= u) ++k;
  std::vector<H4> Q(n + 1);
  for (int i = 0; i <= k - p; ++i) Q[i] = P[i];
  for (int i = k; i < n; ++i) Q[i + 1] = P[i];
  for (int i = k - p + 1; i <= k; ++i) {
    const double a = (u - U[i]) / (U[i + p] - U[i]);
    for (int c = 0; c < 4; ++c) Q[i][c] = a * P[i][c] + (1.0 - a) * P[i - 1][c];
  }
  return Q;
}

}  // namespace

NurbsPatch elevate_degree(const NurbsPatch& patch, int target_degree) {
  patch.validate();
  NurbsPatch out = patch;
  std::vector<H4> net = to_homogeneous(patch);
  int n1 = patch.n(0), n2 = patch.n(1);
  for (int dir = 0; dir < 2; ++dir) {
    const int p = patch.degree(dir);
    if (target_degree < p) throw Error(ErrorKind::Domain, "refine: target degree below patch degree");
    if (target_degree == p) continue;
    if (patch.elements(dir) != 1) {
      throw Error(ErrorKind::Domain, "degree elevation is implemented for single-element (Bezier) patches only");
    }
    for (int q = p; q < target_degree; ++q) {
      const int len = (dir == 0 ? n1 : n2) + 1;
      net = map_lines(net, n1, n2, dir, len, elevate_bezier_once);
      if (dir == 0) {
        n1 = len;
      } else {
        n2 = len;
      }
    }
    out.knots[dir] = KnotVector::bezier(target_degree);
  }
  from_homogeneous(net, out);
  out.validate();
  return out;
}

NurbsPatch insert_uniform_knots(const NurbsPatch& patch, int m) {
  if (m < 1) throw Error(ErrorKind::Domain, "refine: elements_per_dir must be >= 1");
  NurbsPatch out = patch;
  std::vector<H4> net = to_homogeneous(patch);
  int n1 = patch.n(0), n2 = patch.n(1);
  for (int dir = 0; dir < 2; ++dir) {
    const int p = patch.degree(dir);
    std::vector<double> U = patch.knots[dir].values;
    if (patch.elements(dir) != 1 && m != 1) {
      throw Error(ErrorKind::Domain, "uniform knot insertion expects a single-element patch");
    }
    for (int k = 1; k < m; ++k) {
      const double u = static_cast<double>(k) / m;
      const int len = (dir == 0 ? n1 : n2) + 1;
      net = map_lines(net, n1, n2, dir, len,
                      [&](const std::vector<H4>& line) { return insert_knot(line, U, p, u); });
      U.insert(std::upper_bound(U.begin(), U.end(), u), u);
      if (dir == 0) {
        n1 = len;
      } else {
        n2 = len;
      }
    }
    out.knots[dir] = KnotVector(p, U);
  }
  from_homogeneous(net, out);
  out.validate();
  return out;
}

NurbsPatch refine(const NurbsPatch& patch, int target_degree, int elements_per_dir) {
  return insert_uniform_knots(elevate_degree(patch, target_degree), elements_per_dir);
}

std::string patch_to_json(const NurbsPatch& patch) {
  nlohmann::json j;
  j["degrees"] = {patch.degree(0), patch.degree(1)};
  j["knots"] = {patch.knots[0].values, patch.knots[1].values};
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : patch.points) pts.push_back({p[0], p[1], p[2]});
  j["control_points"] = pts;
  j["weights"] = patch.weights;
  return j.dump(2);
}

NurbsPatch patch_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    throw Error(ErrorKind::Schema, std::string("patch JSON: ") + e.what());
  }
  for (const char* key : {"degrees", "knots", "control_points", "weights"}) {
    if (!j.contains(key)) throw Error(ErrorKind::Schema, std::string("patch JSON: missing key '") + key + "'");
  }
  NurbsPatch p;
  try {
    for (int d = 0; d < 2; ++d) {
      p.knots[d] = KnotVector(j["degrees"][d].get<int>(), j["knots"][d].get<std::vector<double>>());
    }
    for (const auto& c : j["control_points"]) p.points.push_back({c[0].get<double>(), c[1].get<double>(), c[2].get<double>()});
    p.weights = j["weights"].get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Schema, std::string("patch JSON: ") + e.what());
  }
  p.validate();
  return p;
}

}  // namespace kls
