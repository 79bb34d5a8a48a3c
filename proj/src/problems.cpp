#include "kls/problems.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "kls/dd.hpp"
#include "kls/numio.hpp"

namespace kls {

const char* boundary_type_name(BoundaryType t) {
  switch (t) {
    case BoundaryType::Clamped: return "clamped";
    case BoundaryType::SimplySupported: return "simply-supported";
    case BoundaryType::Symmetric: return "symmetric";
    case BoundaryType::Free: return "free";
  }
  return "?";
}

const std::array<CornerInfo, 4>& corner_table() {
  static const std::array<CornerInfo, 4> table = {{
      {Corner::SE, Edge::S, Edge::E, 1.0, 0.0},
      {Corner::NE, Edge::E, Edge::N, 1.0, 1.0},
      {Corner::NW, Edge::N, Edge::W, 0.0, 1.0},
      {Corner::SW, Edge::W, Edge::S, 0.0, 0.0},
  }};
  return table;
}

const char* corner_name(Corner c) {
  switch (c) {
    case Corner::SE: return "SE";
    case Corner::NE: return "NE";
    case Corner::NW: return "NW";
    case Corner::SW: return "SW";
  }
  return "?";
}

bool ProblemSpec::corner_dirichlet(Corner c) const {
  const auto& info = corner_table()[static_cast<int>(c)];
  return is_d1(edge_type(info.before)) || is_d1(edge_type(info.after));
}

bool ProblemSpec::has_d1_edge() const {
  return std::any_of(edges.begin(), edges.end(), [](BoundaryType t) { return is_d1(t); });
}

void ProblemSpec::validate() const {
  patch.validate();
  material.validate();
  if (!has_d1_edge()) throw Error(ErrorKind::Validation, "problem has no edge with prescribed displacement");
}

namespace {

NurbsPatch biquadratic(const std::array<Vec3d, 9>& pts, const std::array<double, 9>& w) {
  NurbsPatch p;
  p.knots = {KnotVector::bezier(2), KnotVector::bezier(2)};
  p.points.assign(pts.begin(), pts.end());
  p.weights.assign(w.begin(), w.end());
  return p;
}

constexpr double kS2 = std::numbers::sqrt2;
constexpr double kIS2 = std::numbers::sqrt2 / 2.0;  // 1/sqrt(2)
constexpr double kIS3 = std::numbers::inv_sqrt3;
constexpr double kS3h = std::numbers::sqrt3 / 2.0;

NurbsPatch quarter_annulus() {
  // Radial control points at r = 1, 3/2, 2 along xi1; quarter circle along xi2.
  return biquadratic({Vec3d{1, 0, 0}, {1.5, 0, 0}, {2, 0, 0}, {1, 1, 0}, {1.5, 1.5, 0}, {2, 2, 0}, {0, 1, 0},
                      {0, 1.5, 0}, {0, 2, 0}},
                     {1, 1, 1, kIS2, kIS2, kIS2, 1, 1, 1});
}

NurbsPatch astroid() {
  // Point 6 mirrors point 8 across the diagonal, like points 2 and 4.
  return biquadratic({Vec3d{0, 0, 0}, {1.0 / 3.0, 0.5, 0}, {0, 1, 0}, {0.5, 1.0 / 3.0, 0}, {0.5, 0.5, 0},
                      {0.5, 2.0 / 3.0, 0}, {1, 0, 0}, {2.0 / 3.0, 0.5, 0}, {1, 1, 0}},
                     {1, 1, 1, 1, 1, 1, 1, 1, 1});
}

NurbsPatch quarter_cylinder() {
  return biquadratic({Vec3d{1, 0, 0}, {1, 1, 0}, {0, 1, 0}, {1, 0, 0.5}, {1, 1, 0.5}, {0, 1, 0.5}, {1, 0, 1},
                      {1, 1, 1}, {0, 1, 1}},
                     {1, kIS2, 1, 1, kIS2, 1, 1, kIS2, 1});
}

NurbsPatch hyperbolic_paraboloid() {
  return biquadratic({Vec3d{kS2, 0, -1}, {kS2, kS2, -1}, {0, kS2, -1}, {kIS2, 0, 0}, {kIS2, kIS2, 0}, {0, kIS2, 0},
                      {kS2, 0, 1}, {kS2, kS2, 1}, {0, kS2, 1}},
                     {1, 1, 1, 1, 1, 1, 1, 1, 1});
}

NurbsPatch hemisphere_with_hole() {
  return biquadratic({Vec3d{1, 0, 0}, {1, 0, kIS3}, {0.5, 0, kS3h}, {1, 1, 0}, {1, 1, kIS3}, {0.5, 0.5, kS3h},
                      {0, 1, 0}, {0, 1, kIS3}, {0, 0.5, kS3h}},
                     {1, 1, 1, 1, 1, 1, 1, 1, 1});
}

}  // namespace

ProblemSpec get_problem(int id) {
  using BT = BoundaryType;
  ProblemSpec s;
  s.id = id;
  s.material = Material{1.0e7, 0.3, 0.1};
  // edges[] order: S (xi2=0), E (xi1=1), N (xi2=1), W (xi1=0)
  switch (id) {
    case 1:
      s.name = "quarter annulus";
      s.exact_description = "radial stretch xi1 a1/|a1| plus (exp(xi1)-1) xi1 a3";
      s.patch = quarter_annulus();
      s.edges = {BT::Symmetric, BT::Free, BT::Symmetric, BT::Clamped};
      break;
    case 2:
      s.name = "astroid";
      s.exact_description = "in-plane vortex with sinusoidal transverse deflection";
      s.patch = astroid();
      s.edges = {BT::SimplySupported, BT::Clamped, BT::SimplySupported, BT::Clamped};
      break;
    case 3:
      s.name = "quarter cylinder";
      s.exact_description = "-(xi1-1)^2 xi1^2 xi2 (xi2-1) a3";
      s.patch = quarter_cylinder();
      s.edges = {BT::SimplySupported, BT::Clamped, BT::SimplySupported, BT::Clamped};
      break;
    case 4:
      s.name = "cylinder";
      s.exact_description = "cos(pi xi1)/2 a3";
      s.patch = quarter_cylinder();
      s.edges = {BT::SimplySupported, BT::Symmetric, BT::Free, BT::Symmetric};
      break;
    case 5:
      s.name = "hyperbolic paraboloid";
      s.exact_description = "quadratic field mapping the surface onto a cylinder approximation";
      s.patch = hyperbolic_paraboloid();
      s.edges = {BT::SimplySupported, BT::Symmetric, BT::SimplySupported, BT::Symmetric};
      break;
    case 6:
      s.name = "quarter hyperbolic paraboloid";
      s.exact_description = "xi2 sin(pi xi2 / 2) in x and y";
      s.patch = hyperbolic_paraboloid();
      s.edges = {BT::Clamped, BT::Free, BT::Free, BT::Free};
      break;
    case 7:
      s.name = "hemisphere with hole, simply supported";
      s.exact_description = "-sin(pi xi1) a3";
      s.patch = hemisphere_with_hole();
      s.edges = {BT::Symmetric, BT::SimplySupported, BT::Symmetric, BT::SimplySupported};
      break;
    case 8:
      s.name = "hemisphere with hole, clamped top";
      s.exact_description = "(xi1-1)(e-exp(xi1)) in z";
      s.patch = hemisphere_with_hole();
      s.edges = {BT::Symmetric, BT::Clamped, BT::Symmetric, BT::Free};
      break;
    default: {
      std::ostringstream os;
      os << "unknown problem id " << id << " (expected 1..8)";
      throw Error(ErrorKind::Domain, os.str());
    }
  }
  return s;
}

namespace {

template <class T, int K>
SurfaceJetT<T> jets_to_table(const std::array<Jet<T, K>, 3>& u) {
  SurfaceJetT<T> r;
  r.order = K;
  for (int d = 0; d <= K; ++d)
    for (int j = 0; j <= d; ++j)
      for (int c = 0; c < 3; ++c) r.d[multi_index(d - j, j)][c] = u[c].deriv(d - j, j);
  return r;
}

template <class T, int K>
SurfaceJetT<T> exact_impl(const ProblemSpec& s, const T& xi1, const T& xi2) {
  using J = Jet<T, K>;
  const J s1 = J::variable(0, xi1);
  const J s2 = J::variable(1, xi2);
  const T pi = ScalarTraits<T>::pi();
  const T e = ScalarTraits<T>::euler();
  std::array<J, 3> u{J(0.0), J(0.0), J(0.0)};

  // Master-geometry frame vectors a1 and a3 as order-K jets.
  auto frame = [&](Vec3<J>& a1, Vec3<J>& a3) {
    const auto X = bezier_map_jet<T, K + 1>(s.patch, xi1, xi2);
    Vec3<J> A2;
    for (int c = 0; c < 3; ++c) {
      a1[c] = partial(X[c], 0);
      A2[c] = partial(X[c], 1);
    }
    Vec3<J> n = cross(a1, A2);
    J inv = reciprocal(norm(n));
    a3 = n * inv;
  };
  auto assign = [&](const Vec3<J>& v) {
    for (int c = 0; c < 3; ++c) u[c] = v[c];
  };

  switch (s.id) {
    case 1: {
      Vec3<J> a1, a3;
      frame(a1, a3);
      J stretch = s1 * reciprocal(norm(a1));
      J lift = (exp(s1) - 1.0) * s1;
      assign(a1 * stretch + a3 * lift);
      break;
    }
    case 2: {
      J m1 = s1 - 1.0, m2 = s2 - 1.0;
      u[0] = m1 * m1 * s1 * s1 * (T(0.5) - s2) * (1.0 - s2) * s2;
      u[1] = m2 * m2 * s2 * s2 * (T(0.5) - s1) * (1.0 - s1) * s1;
      u[2] = (1.0 - s1) * s1 * sin(s1 * pi) * sin(s2 * pi);
      break;
    }
    case 3: {
      Vec3<J> a1, a3;
      frame(a1, a3);
      J m1 = s1 - 1.0;
      J amp = -(m1 * m1 * s1 * s1 * s2 * (s2 - 1.0));
      assign(a3 * amp);
      break;
    }
    case 4: {
      Vec3<J> a1, a3;
      frame(a1, a3);
      assign(a3 * (cos(s1 * pi) * T(0.5)));
      break;
    }
    case 5: {
      const T r2 = sqrt(T(2.0));
      J common = (s2 - 1.0) * s2 * r2;
      u[0] = (s1 * s1 - 1.0) * common;
      u[1] = (s1 - 2.0) * s1 * common;
      break;
    }
    case 6: {
      J v = s2 * sin(s2 * (pi * T(0.5)));
      u[0] = v;
      u[1] = v;
      break;
    }
    case 7: {
      Vec3<J> a1, a3;
      frame(a1, a3);
      assign(a3 * (-sin(s1 * pi)));
      break;
    }
    case 8: {
      u[2] = (s1 - 1.0) * (e - exp(s1));
      break;
    }
    default:
      throw Error(ErrorKind::Domain, "eval_exact: unknown problem id");
  }
  return jets_to_table<T, K>(u);
}

template <class T, int N>
SurfaceJetT<T> geometry_impl(const NurbsPatch& master, const T& xi1, const T& xi2) {
  return jets_to_table<T, N>(bezier_map_jet<T, N>(master, xi1, xi2));
}

}  // namespace

template <class T>
SurfaceJetT<T> eval_exact(const ProblemSpec& spec, const T& xi1, const T& xi2, int order) {
  switch (order) {
    case 0: return exact_impl<T, 0>(spec, xi1, xi2);
    case 1: return exact_impl<T, 1>(spec, xi1, xi2);
    case 2: return exact_impl<T, 2>(spec, xi1, xi2);
    case 3: return exact_impl<T, 3>(spec, xi1, xi2);
    case 4: return exact_impl<T, 4>(spec, xi1, xi2);
    default: throw Error(ErrorKind::Domain, "eval_exact: order must lie in [0, 4]");
  }
}

template <class T>
SurfaceJetT<T> eval_geometry(const NurbsPatch& master, const T& xi1, const T& xi2, int order) {
  switch (order) {
    case 0: return geometry_impl<T, 0>(master, xi1, xi2);
    case 1: return geometry_impl<T, 1>(master, xi1, xi2);
    case 2: return geometry_impl<T, 2>(master, xi1, xi2);
    case 3: return geometry_impl<T, 3>(master, xi1, xi2);
    case 4: return geometry_impl<T, 4>(master, xi1, xi2);
    case 5: return geometry_impl<T, 5>(master, xi1, xi2);
    default: throw Error(ErrorKind::Domain, "eval_geometry: order must lie in [0, 5]");
  }
}

template SurfaceJetT<double> eval_exact<double>(const ProblemSpec&, const double&, const double&, int);
template SurfaceJetT<dd> eval_exact<dd>(const ProblemSpec&, const dd&, const dd&, int);
template SurfaceJetT<double> eval_geometry<double>(const NurbsPatch&, const double&, const double&, int);
template SurfaceJetT<dd> eval_geometry<dd>(const NurbsPatch&, const dd&, const dd&, int);

double patch_diameter(const NurbsPatch& patch) {
  std::vector<Vec3d> pts;
  for (int j = 0; j <= 8; ++j)
    for (int i = 0; i <= 8; ++i) pts.push_back(eval_surface(patch, i / 8.0, j / 8.0, 0).x());
  double d = 0.0;
  for (size_t a = 0; a < pts.size(); ++a)
    for (size_t b = a + 1; b < pts.size(); ++b) d = std::max(d, norm(pts[a] - pts[b]));
  return d;
}

// ---------------------------------------------------------------- load data

namespace {

Vec3d round_vec(const Vec3<dd>& v) { return {value_of(v[0]), value_of(v[1]), value_of(v[2])}; }

struct EdgeSample {
  Vec3d T;
  double Bnn = 0.0, Bnt = 0.0, theta_n = 0.0;
  Vec3d u;
};

EdgeSample edge_sample(const ProblemSpec& spec, Edge edge, double xi1, double xi2) {
  const dd x1(xi1), x2(xi2);
  const SurfaceJetT<dd> g = eval_geometry<dd>(spec.patch, x1, x2, 3);
  const SurfaceFrameT<dd> f = build_frame<dd>(g, true);
  const EdgeFrameT<dd> ef = build_edge_frame(f, edge);
  const SurfaceJetT<dd> u = eval_exact<dd>(spec, x1, x2, 3);
  const Kinematics<dd> k = kinematics(f, u, true);
  const ElasticityTensor<dd> c = elasticity(f, spec.material);
  const BoundaryActions<dd> ba = boundary_actions(f, ef, c, k, spec.material, ErsatzVariant::Consistent);
  EdgeSample s;
  s.T = round_vec(ba.T);
  s.Bnn = value_of(ba.Bnn);
  s.Bnt = value_of(ba.Bnt);
  s.theta_n = value_of(rotation_n(f, ef, k));
  s.u = round_vec(u.x());
  return s;
}

}  // namespace

LoadData generate_load_data(const ProblemSpec& spec, const QuadratureRule& rule, int degree) {
  spec.validate();
  LoadData d;
  d.problem_id = spec.id;
  d.mesh = rule.mesh;
  d.degree = degree;
  d.nq = rule.nq;
  const int n1d = rule.n1d();
  const long nint = rule.num_interior();
  d.f.resize(nint);
  std::string failure;
#pragma omp parallel for schedule(dynamic, 64)
  for (long k = 0; k < nint; ++k) {
    try {
      const dd x1(rule.points[k % n1d]), x2(rule.points[k / n1d]);
      const SurfaceJetT<dd> g = eval_geometry<dd>(spec.patch, x1, x2, 4);
      const SurfaceJetT<dd> u = eval_exact<dd>(spec, x1, x2, 4);
      d.f[k] = round_vec(strong_form_load(g, u, spec.material).f);
    } catch (const std::exception& e) {
#pragma omp critical(kls_load_failure)
      failure = e.what();
    }
  }
  if (!failure.empty()) throw Error(ErrorKind::NonFinite, "load generation failed: " + failure);

  for (int ei = 0; ei < 4; ++ei) {
    const Edge edge = static_cast<Edge>(ei);
    EdgeLoad& el = d.edges[ei];
    el.T.resize(n1d);
    el.Bnn.resize(n1d);
    el.u.resize(n1d);
    el.theta_n.resize(n1d);
    for (int k = 0; k < n1d; ++k) {
      const auto xi = edge_point(edge, rule.points[k]);
      const EdgeSample s = edge_sample(spec, edge, xi[0], xi[1]);
      el.T[k] = s.T;
      el.Bnn[k] = s.Bnn;
      el.u[k] = s.u;
      el.theta_n[k] = s.theta_n;
    }
  }
  for (const auto& info : corner_table()) {
    const EdgeSample before = edge_sample(spec, info.before, info.xi1, info.xi2);
    const EdgeSample after = edge_sample(spec, info.after, info.xi1, info.xi2);
    CornerLoad& cl = d.corners[static_cast<int>(info.corner)];
    cl.jump = corner_jump(before.Bnt, after.Bnt);
    cl.u = before.u;
  }
  d.validate(rule);
  return d;
}

namespace {

void check_size(const char* block, size_t got, size_t want) {
  if (got != want) {
    std::ostringstream os;
    os << "load data block '" << block << "' has " << got << " entries, quadrature expects " << want;
    throw Error(ErrorKind::GridMismatch, os.str());
  }
}

void check_finite(const std::string& block, size_t index, double v) {
  if (!std::isfinite(v)) {
    std::ostringstream os;
    os << "load data block '" << block << "' has a non-finite value at point " << index;
    throw Error(ErrorKind::NonFinite, os.str());
  }
}

void check_finite(const std::string& block, size_t index, const Vec3d& v) {
  for (int c = 0; c < 3; ++c) check_finite(block, index, v[c]);
}

}  // namespace

void LoadData::validate(const QuadratureRule& rule) const {
  if (mesh != rule.mesh || nq != rule.nq) {
    std::ostringstream os;
    os << "load data grid (mesh " << mesh << ", " << nq << " points) differs from quadrature (mesh " << rule.mesh
       << ", " << rule.nq << " points)";
    throw Error(ErrorKind::GridMismatch, os.str());
  }
  check_size("f", f.size(), rule.num_interior());
  for (size_t k = 0; k < f.size(); ++k) check_finite("f", k, f[k]);
  for (int e = 0; e < 4; ++e) {
    const std::string name = edge_name(static_cast<Edge>(e));
    const EdgeLoad& el = edges[e];
    check_size((name + ".T").c_str(), el.T.size(), rule.num_edge());
    check_size((name + ".Bnn").c_str(), el.Bnn.size(), rule.num_edge());
    check_size((name + ".u").c_str(), el.u.size(), rule.num_edge());
    check_size((name + ".theta_n").c_str(), el.theta_n.size(), rule.num_edge());
    for (size_t k = 0; k < el.T.size(); ++k) {
      check_finite(name + ".T", k, el.T[k]);
      check_finite(name + ".Bnn", k, el.Bnn[k]);
      check_finite(name + ".u", k, el.u[k]);
      check_finite(name + ".theta_n", k, el.theta_n[k]);
    }
  }
  for (int c = 0; c < 4; ++c) {
    const std::string name = std::string("corner ") + corner_name(static_cast<Corner>(c));
    check_finite(name, 0, corners[c].jump);
    check_finite(name, 0, corners[c].u);
  }
}

namespace {

using nlohmann::json;

json scalars_to_json(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(format_double(x));
  return a;
}

json vecs_to_json(const std::vector<Vec3d>& v) {
  json a = json::array();
  for (const auto& p : v)
    for (int c = 0; c < 3; ++c) a.push_back(format_double(p[c]));
  return a;
}

const json& member(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw Error(ErrorKind::Schema, "load data: missing '" + where + key + "'");
  return j.at(key);
}

std::vector<double> scalars_from_json(const json& a, const std::string& block) {
  if (!a.is_array()) throw Error(ErrorKind::Schema, "load data: block '" + block + "' is not an array");
  std::vector<double> v;
  v.reserve(a.size());
  for (const auto& x : a) {
    if (!x.is_string()) throw Error(ErrorKind::Schema, "load data: block '" + block + "' holds a non-string number");
    v.push_back(parse_double(x.get<std::string>()));
  }
  return v;
}

std::vector<Vec3d> vecs_from_json(const json& a, const std::string& block) {
  std::vector<double> s = scalars_from_json(a, block);
  if (s.size() % 3 != 0) throw Error(ErrorKind::Schema, "load data: block '" + block + "' length is not a multiple of 3");
  std::vector<Vec3d> v(s.size() / 3);
  for (size_t k = 0; k < v.size(); ++k) v[k] = {s[3 * k], s[3 * k + 1], s[3 * k + 2]};
  return v;
}

}  // namespace

std::string load_data_to_json(const LoadData& d) {
  json j;
  j["format"] = "kls-load-data";
  j["version"] = 1;
  j["problem_id"] = d.problem_id;
  j["mesh"] = d.mesh;
  j["degree"] = d.degree;
  j["quadrature"] = {{"rule", "gauss-legendre"}, {"points_per_element", d.nq}};
  j["f"] = vecs_to_json(d.f);
  json edges = json::object();
  for (int e = 0; e < 4; ++e) {
    const EdgeLoad& el = d.edges[e];
    edges[edge_name(static_cast<Edge>(e))] = {{"T", vecs_to_json(el.T)},
                                              {"Bnn", scalars_to_json(el.Bnn)},
                                              {"u", vecs_to_json(el.u)},
                                              {"theta_n", scalars_to_json(el.theta_n)}};
  }
  j["edges"] = edges;
  json corners = json::object();
  for (int c = 0; c < 4; ++c) {
    corners[corner_name(static_cast<Corner>(c))] = {{"jump", format_double(d.corners[c].jump)},
                                                    {"u", vecs_to_json({d.corners[c].u})}};
  }
  j["corners"] = corners;
  return j.dump();
}

LoadData load_data_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Schema, std::string("load data: invalid JSON: ") + e.what());
  }
  LoadData d;
  try {
    if (member(j, "format", "").get<std::string>() != "kls-load-data")
      throw Error(ErrorKind::Schema, "load data: unexpected format tag");
    d.problem_id = member(j, "problem_id", "").get<int>();
    d.mesh = member(j, "mesh", "").get<int>();
    d.degree = member(j, "degree", "").get<int>();
    d.nq = member(member(j, "quadrature", ""), "points_per_element", "quadrature.").get<int>();
    d.f = vecs_from_json(member(j, "f", ""), "f");
    const json& edges = member(j, "edges", "");
    for (int e = 0; e < 4; ++e) {
      const std::string name = edge_name(static_cast<Edge>(e));
      const json& el = member(edges, name.c_str(), "edges.");
      d.edges[e].T = vecs_from_json(member(el, "T", name + "."), name + ".T");
      d.edges[e].Bnn = scalars_from_json(member(el, "Bnn", name + "."), name + ".Bnn");
      d.edges[e].u = vecs_from_json(member(el, "u", name + "."), name + ".u");
      d.edges[e].theta_n = scalars_from_json(member(el, "theta_n", name + "."), name + ".theta_n");
    }
    const json& corners = member(j, "corners", "");
    for (int c = 0; c < 4; ++c) {
      const std::string name = corner_name(static_cast<Corner>(c));
      const json& cj = member(corners, name.c_str(), "corners.");
      const json& jump = member(cj, "jump", name + ".");
      if (!jump.is_string()) throw Error(ErrorKind::Schema, "load data: corner jump must be a string number");
      d.corners[c].jump = parse_double(jump.get<std::string>());
      auto u = vecs_from_json(member(cj, "u", name + "."), "corner " + name + ".u");
      if (u.size() != 1) throw Error(ErrorKind::Schema, "load data: corner " + name + ".u must hold one vector");
      d.corners[c].u = u[0];
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Schema, std::string("load data: ") + e.what());
  }
  return d;
}

void export_load_data(const std::string& path, const LoadData& data) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Validation, "cannot open '" + path + "' for writing");
  out << load_data_to_json(data) << '\n';
  if (!out) throw Error(ErrorKind::Validation, "failed writing '" + path + "'");
}

LoadData import_load_data(const std::string& path, int problem_id, const QuadratureRule& rule) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Validation, "cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  LoadData d = load_data_from_json(ss.str());
  if (d.problem_id != problem_id) {
    std::ostringstream os;
    os << "load data is for problem " << d.problem_id << ", expected " << problem_id;
    throw Error(ErrorKind::GridMismatch, os.str());
  }
  d.validate(rule);
  return d;
}

}  // namespace kls
