#include "kls/trace.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "kls/numio.hpp"
#include "kls/solve.hpp"

namespace kls {

const char* convention_name(TraceConvention c) {
  return c == TraceConvention::Proved ? "proved" : "paper-literal";
}

std::array<double, 5> TraceConstants::ctr(TraceConvention c) const {
  std::array<double, 5> r{};
  for (int i = 0; i < 5; ++i) r[i] = c == TraceConvention::Proved ? 5.0 * lambda_max[i] : lambda_max[i] / 5.0;
  return r;
}

namespace {

void add_outer(Eigen::MatrixXd& A, const std::vector<int>& dofs, const std::vector<double>& g, double w) {
  const size_t n = dofs.size();
  for (size_t b = 0; b < n; ++b) {
    if (g[b] == 0.0) continue;
    for (size_t a = 0; a < n; ++a) A(dofs[a], dofs[b]) += w * g[a] * g[b];
  }
}

bool pencil_active(const ProblemSpec& spec, int which) {
  for (int e = 0; e < 4; ++e) {
    const BoundaryType t = spec.edges[e];
    if (which == 3 ? is_d2(t) : is_d1(t)) return true;
  }
  return false;
}

}  // namespace

Eigen::MatrixXd assemble_trace_matrix(const Discretization& disc, int which, ErsatzVariant variant) {
  if (which < 1 || which > 5) throw Error(ErrorKind::Domain, "trace inequality index must lie in 1..5");
  const int n = disc.num_dofs();
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  const Material& mat = disc.spec.material;
  const double cmag = mat.c_magnitude();
  const double z = mat.zeta, z3c = z * z * z * cmag;

  if (which == 2) {
    for (const auto& info : corner_table()) {
      if (!disc.spec.corner_dirichlet(info.corner)) continue;
      const double h = disc.topo.corner_h(info.corner);
      auto param = [&](Edge e) { return (e == Edge::S || e == Edge::N) ? info.xi1 : info.xi2; };
      const BoundaryPoint before = eval_boundary_at(disc, info.before, param(info.before), ErsatzVariant::Consistent);
      const BoundaryPoint after = eval_boundary_at(disc, info.after, param(info.after), ErsatzVariant::Consistent);
      std::vector<int> dofs(before.dofs.size());
      std::vector<double> g(before.dofs.size());
      for (size_t a = 0; a < g.size(); ++a) {
        dofs[a] = before.dofs[a].dof;
        g[a] = corner_jump(before.dofs[a].ba.Bnt, after.dofs[a].ba.Bnt);
      }
      add_outer(A, dofs, g, h * h / z3c);
    }
    return A;
  }

  for (int e = 0; e < 4; ++e) {
    const Edge edge = static_cast<Edge>(e);
    const BoundaryType bt = disc.spec.edge_type(edge);
    if (which == 3 ? !is_d2(bt) : !is_d1(bt)) continue;
    for (int k = 0; k < disc.rule.num_edge(); ++k) {
      const BoundaryPoint bp = eval_boundary_point(disc, edge, k, variant);
      const size_t nd = bp.dofs.size();
      std::vector<int> dofs(nd);
      for (size_t a = 0; a < nd; ++a) dofs[a] = bp.dofs[a].dof;
      const double h = bp.h;
      if (which == 1 || which == 3) {
        std::vector<double> g(nd);
        for (size_t a = 0; a < nd; ++a) g[a] = which == 1 ? bp.dofs[a].ba.T3 : bp.dofs[a].ba.Bnn;
        const double w = which == 1 ? h * h * h / z3c : h / z3c;
        add_outer(A, dofs, g, bp.measure * w);
      } else {
        // a_{ab} T^a T^b through the Cholesky factor of the metric.
        const auto& g2 = bp.frame.a_cov;
        const double l00 = std::sqrt(g2[0][0]);
        const double l10 = g2[1][0] / l00;
        const double l11 = std::sqrt(g2[1][1] - l10 * l10);
        std::vector<double> c0(nd), c1(nd);
        for (size_t a = 0; a < nd; ++a) {
          const auto& T = which == 4 ? bp.dofs[a].ba.TB : bp.dofs[a].ba.TA;
          c0[a] = l00 * T[0] + l10 * T[1];
          c1[a] = l11 * T[1];
        }
        const double w = which == 4 ? h / z3c : h / (z * cmag);
        add_outer(A, dofs, c0, bp.measure * w);
        add_outer(A, dofs, c1, bp.measure * w);
      }
    }
  }
  return A;
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> assemble_trace_pencil(const Discretization& disc, int which,
                                                                  ErsatzVariant variant) {
  return {assemble_trace_matrix(disc, which, variant), assemble_stiffness(disc)};
}

FiniteEigenResult largest_finite_eigenvalue(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, double delta) {
  FiniteEigenResult r;
  if (A.cwiseAbs().maxCoeff() == 0.0) return r;
  const Eigen::Index n = B.rows();
  const double scale = B.trace() / static_cast<double>(n);
  if (!(scale > 0.0)) throw Error(ErrorKind::Eigen, "largest_finite_eigenvalue: B has non-positive trace");
  auto solve = [&](double d) {
    Eigen::MatrixXd Bd = B;
    Bd.diagonal().array() += d * scale;
    return sym_gen_eig(A, Bd);
  };
  const Eigen::VectorXd l1 = solve(delta);
  const Eigen::VectorXd l2 = solve(delta / 10.0);
  // Eigenvalues attached to the null space of B scale like 1/delta; finite
  // ones stay put. Both spectra are sorted ascending.
  const double top = std::max(l1.cwiseAbs().maxCoeff(), 1e-300);
  Eigen::Index idx = -1;
  for (Eigen::Index i = n - 1; i >= 0; --i) {
    if (l2(i) <= 2.0 * l1(i) + 1e-14 * top) {
      idx = i;
      break;
    }
    ++r.infinite;
  }
  if (idx < 0) throw Error(ErrorKind::Eigen, "largest_finite_eigenvalue: no finite eigenvalue found");
  r.lambda = std::max(0.0, l1(idx));
  r.lambda_fine = std::max(0.0, l2(idx));
  const double change = std::fabs(r.lambda_fine - r.lambda) / std::max(r.lambda, 1e-300);
  if (r.lambda > 0.0 && change >= 0.01) {
    std::ostringstream os;
    os << "largest finite eigenvalue unstable under regularization: " << r.lambda << " vs " << r.lambda_fine;
    throw Error(ErrorKind::Eigen, os.str());
  }
  return r;
}

TraceConstants compute_trace_constants(const Discretization& disc, ErsatzVariant variant) {
  TraceConstants tc;
  tc.problem_id = disc.spec.id;
  tc.degree = disc.degree;
  tc.mesh = disc.mesh;
  tc.variant = variant;
  const Eigen::MatrixXd B = assemble_stiffness(disc);
  for (int i = 1; i <= 5; ++i) {
    tc.active[i - 1] = pencil_active(disc.spec, i);
    if (!tc.active[i - 1]) continue;
    const Eigen::MatrixXd A = assemble_trace_matrix(disc, i, variant);
    tc.lambda_max[i - 1] = largest_finite_eigenvalue(A, B).lambda;
  }
  return tc;
}

PenaltyConfig compute_penalties(const TraceConstants& tc, const std::array<double, 4>& gammas, TraceConvention conv) {
  PenaltyConfig p;
  p.gamma = gammas;
  p.ctr = tc.ctr(conv);
  p.validate();
  return p;
}

std::string trace_constants_to_json(const TraceConstants& tc) {
  nlohmann::json j;
  j["format"] = "kls-trace-constants";
  j["problem_id"] = tc.problem_id;
  j["degree"] = tc.degree;
  j["mesh"] = tc.mesh;
  j["variant"] = tc.variant == ErsatzVariant::Consistent ? "consistent" : "inconsistent";
  nlohmann::json lam = nlohmann::json::array(), act = nlohmann::json::array();
  for (int i = 0; i < 5; ++i) {
    lam.push_back(format_double(tc.lambda_max[i]));
    act.push_back(tc.active[i]);
  }
  j["lambda_max"] = lam;
  j["active"] = act;
  return j.dump(2);
}

TraceConstants trace_constants_from_json(const std::string& text) {
  TraceConstants tc;
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.at("format").get<std::string>() != "kls-trace-constants")
      throw Error(ErrorKind::Schema, "trace constants: unexpected format tag");
    tc.problem_id = j.at("problem_id").get<int>();
    tc.degree = j.at("degree").get<int>();
    tc.mesh = j.at("mesh").get<int>();
    tc.variant = j.at("variant").get<std::string>() == "inconsistent" ? ErsatzVariant::Inconsistent
                                                                      : ErsatzVariant::Consistent;
    const auto& lam = j.at("lambda_max");
    const auto& act = j.at("active");
    if (lam.size() != 5 || act.size() != 5) throw Error(ErrorKind::Schema, "trace constants: expected 5 entries");
    for (int i = 0; i < 5; ++i) {
      tc.lambda_max[i] = parse_double(lam[i].get<std::string>());
      tc.active[i] = act[i].get<bool>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Schema, std::string("trace constants: ") + e.what());
  }
  return tc;
}

TraceConstants cached_trace_constants(const std::string& cache_dir, const ProblemSpec& spec, int degree, int mesh,
                                      ErsatzVariant variant, bool force) {
  namespace fs = std::filesystem;
  std::string path;
  if (!cache_dir.empty()) {
    std::ostringstream name;
    name << "trace_P" << spec.id << "_p" << degree << "_m" << mesh << '_'
         << (variant == ErsatzVariant::Consistent ? "consistent" : "inconsistent") << ".json";
    path = (fs::path(cache_dir) / name.str()).string();
    if (!force && fs::exists(path)) {
      std::ifstream in(path);
      std::stringstream ss;
      ss << in.rdbuf();
      TraceConstants tc = trace_constants_from_json(ss.str());
      if (tc.problem_id == spec.id && tc.degree == degree && tc.mesh == mesh && tc.variant == variant) return tc;
    }
  }
  const Discretization disc = make_discretization(spec, degree, mesh);
  TraceConstants tc = compute_trace_constants(disc, variant);
  if (!path.empty()) {
    fs::create_directories(cache_dir);
    const std::string tmp = path + ".tmp";
    {
      std::ofstream out(tmp);
      out << trace_constants_to_json(tc) << '\n';
    }
    fs::rename(tmp, path);
  }
  return tc;
}

}  // namespace kls
