#include "kls/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "kls/numio.hpp"

namespace kls {

int MeshTopology::edge_owner(Edge e, int k) const {
  switch (e) {
    case Edge::S: return element(k, 0);
    case Edge::E: return element(mesh - 1, k);
    case Edge::N: return element(k, mesh - 1);
    case Edge::W: return element(0, k);
  }
  return 0;
}

int MeshTopology::corner_owner(Corner c) const {
  switch (c) {
    case Corner::SE: return element(mesh - 1, 0);
    case Corner::NE: return element(mesh - 1, mesh - 1);
    case Corner::NW: return element(0, mesh - 1);
    case Corner::SW: return element(0, 0);
  }
  return 0;
}

MeshTopology build_mesh(const NurbsPatch& refined) {
  if (refined.elements(0) != refined.elements(1)) {
    throw Error(ErrorKind::Domain, "build_mesh: expected the same element count in both directions");
  }
  MeshTopology t;
  t.mesh = refined.elements(0);
  const std::vector<double> z = refined.knots[0].breakpoints();
  t.h.resize(static_cast<size_t>(t.mesh) * t.mesh);
  for (int e2 = 0; e2 < t.mesh; ++e2) {
    for (int e1 = 0; e1 < t.mesh; ++e1) {
      std::array<Vec3d, 9> pts;
      for (int j = 0; j < 3; ++j)
        for (int i = 0; i < 3; ++i) {
          const double x1 = z[e1] + 0.5 * i * (z[e1 + 1] - z[e1]);
          const double x2 = z[e2] + 0.5 * j * (z[e2 + 1] - z[e2]);
          pts[i + 3 * j] = eval_surface(refined, x1, x2, 0).x();
        }
      double d = 0.0;
      for (int a = 0; a < 9; ++a)
        for (int b = a + 1; b < 9; ++b) d = std::max(d, norm(pts[a] - pts[b]));
      t.h[t.element(e1, e2)] = d;
    }
  }
  return t;
}

Discretization make_discretization(const ProblemSpec& spec, int degree, int mesh, int nq) {
  if (degree < 2) throw Error(ErrorKind::Domain, "degree must be at least 2");
  if (mesh < 1) throw Error(ErrorKind::Domain, "mesh must be at least 1");
  Discretization d;
  d.spec = spec;
  d.degree = degree;
  d.mesh = mesh;
  d.patch = refine(spec.patch, degree, mesh);
  d.topo = build_mesh(d.patch);
  d.rule = QuadratureRule::uniform(mesh, nq > 0 ? nq : default_quadrature_points(degree, mesh));
  return d;
}

std::array<double, 4> PenaltyConfig::cpen() const {
  return {gamma[0] * gamma[0] * ctr[0], gamma[1] * gamma[1] * ctr[1], gamma[2] * gamma[2] * ctr[2],
          gamma[3] * gamma[3] * std::max(ctr[3], ctr[4])};
}

void PenaltyConfig::validate() const {
  for (int i = 0; i < 4; ++i) {
    if (!(gamma[i] > 1.0) || !std::isfinite(gamma[i])) {
      std::ostringstream os;
      os << "penalty factor gamma_" << i + 1 << " = " << gamma[i] << " must exceed 1";
      throw Error(ErrorKind::Validation, os.str());
    }
  }
  for (int i = 0; i < 5; ++i) {
    if (!(ctr[i] >= 0.0) || !std::isfinite(ctr[i])) {
      std::ostringstream os;
      os << "trace constant C_tr," << i + 1 << " = " << ctr[i] << " must be finite and non-negative";
      throw Error(ErrorKind::Validation, os.str());
    }
  }
}

namespace {

// Geometry derivatives from the rational basis already evaluated at a point.
SurfaceJet geometry_from_basis(const NurbsPatch& patch, const RationalBasis& rb) {
  SurfaceJet g;
  g.order = rb.order;
  for (int k = 0; k < rb.size(); ++k) {
    const Vec3d& P = patch.points[rb.index[k]];
    for (int m = 0; m < rb.nder; ++m) g.d[m] += P * rb.values[k * rb.nder + m];
  }
  return g;
}

Eigen::Matrix3d voigt(const ElasticityTensor<double>& c) {
  static constexpr int ia[3] = {0, 1, 0};
  static constexpr int ib[3] = {0, 1, 1};
  Eigen::Matrix3d D;
  for (int I = 0; I < 3; ++I)
    for (int J = 0; J < 3; ++J) D(I, J) = c.C[ia[I]][ib[I]][ia[J]][ib[J]];
  return D;
}

struct LocalBlock {
  std::vector<int> dofs;
  Eigen::MatrixXd K;
  Eigen::VectorXd F;
};

std::vector<int> local_dofs(const RationalBasis& rb) {
  std::vector<int> d(3 * rb.size());
  for (int k = 0; k < rb.size(); ++k)
    for (int i = 0; i < 3; ++i) d[3 * k + i] = dof_index(rb.index[k], i);
  return d;
}

LocalBlock interior_block(const Discretization& disc, const LoadData* loads, bool with_k, bool with_f, int e1,
                          int e2) {
  const auto& rule = disc.rule;
  const auto& mat = disc.spec.material;
  const int nq = rule.nq;
  const int n1d = rule.n1d();
  LocalBlock blk;
  Eigen::MatrixXd Bm;
  Eigen::Matrix<double, 6, 6> Dw = Eigen::Matrix<double, 6, 6>::Zero();
  const double bend = mat.zeta * mat.zeta * mat.zeta / 12.0;
  for (int q2 = 0; q2 < nq; ++q2) {
    for (int q1 = 0; q1 < nq; ++q1) {
      const int k1 = e1 * nq + q1, k2 = e2 * nq + q2;
      const double xi1 = rule.points[k1], xi2 = rule.points[k2];
      const RationalBasis rb = eval_rational_basis(disc.patch, xi1, xi2, 2);
      const int nd = 3 * rb.size();
      if (blk.dofs.empty()) {
        blk.dofs = local_dofs(rb);
        blk.K = Eigen::MatrixXd::Zero(nd, nd);
        blk.F = Eigen::VectorXd::Zero(nd);
        Bm.resize(6, nd);
      }
      const SurfaceFrame f = build_frame<double>(geometry_from_basis(disc.patch, rb), false);
      const double w = rule.weights[k1] * rule.weights[k2] * f.det_a;
      if (with_k) {
        const Eigen::Matrix3d D = voigt(elasticity(f, mat));
        Dw.topLeftCorner<3, 3>() = D * (w * mat.zeta);
        Dw.bottomRightCorner<3, 3>() = D * (w * bend);
        for (int k = 0; k < rb.size(); ++k) {
          const double R1 = rb(k, 1, 0), R2 = rb(k, 0, 1);
          // u_{|ab} for the scalar basis function
          double cd[2][2];
          for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) {
              const int n2 = (a == 1) + (b == 1);
              cd[a][b] = rb(k, 2 - n2, n2) - f.Gamma[0][a][b] * R1 - f.Gamma[1][a][b] * R2;
            }
          for (int i = 0; i < 3; ++i) {
            const int col = 3 * k + i;
            const double a0 = f.a[0][i], a1 = f.a[1][i], n = f.a3[i];
            Bm(0, col) = a0 * R1;
            Bm(1, col) = a1 * R2;
            Bm(2, col) = a0 * R2 + a1 * R1;
            Bm(3, col) = -n * cd[0][0];
            Bm(4, col) = -n * cd[1][1];
            Bm(5, col) = -2.0 * n * cd[0][1];
          }
        }
        blk.K.noalias() += Bm.transpose() * (Dw * Bm);
      }
      if (with_f && loads) {
        const Vec3d& fv = loads->f[k1 + static_cast<size_t>(n1d) * k2];
        for (int k = 0; k < rb.size(); ++k) {
          const double R = rb(k, 0, 0) * w;
          for (int i = 0; i < 3; ++i) blk.F(3 * k + i) += fv[i] * R;
        }
      }
    }
  }
  return blk;
}

BoundaryPoint boundary_point_at(const Discretization& disc, Edge edge, double s, double weight, double h,
                                ErsatzVariant variant) {
  BoundaryPoint bp;
  bp.edge = edge;
  const auto xi = edge_point(edge, s);
  bp.xi1 = xi[0];
  bp.xi2 = xi[1];
  const RationalBasis rb = eval_rational_basis(disc.patch, xi[0], xi[1], 3);
  bp.frame = build_frame<double>(geometry_from_basis(disc.patch, rb), true);
  bp.edge_frame = build_edge_frame(bp.frame, edge);
  bp.measure = weight * bp.edge_frame.s_norm;
  bp.h = h;
  const ElasticityTensor<double> c = elasticity(bp.frame, disc.spec.material);
  bp.dofs.resize(3 * rb.size());
  for (int k = 0; k < rb.size(); ++k) {
    for (int i = 0; i < 3; ++i) {
      SurfaceJet uj;
      uj.order = 3;
      for (int m = 0; m < rb.nder; ++m) uj.d[m][i] = rb.values[k * rb.nder + m];
      const Kinematics<double> kin = kinematics(bp.frame, uj, true);
      BoundaryDof& bd = bp.dofs[3 * k + i];
      bd.dof = dof_index(rb.index[k], i);
      bd.phi = uj.x();
      bd.ba = boundary_actions(bp.frame, bp.edge_frame, c, kin, disc.spec.material, variant);
      bd.theta_n = rotation_n(bp.frame, bp.edge_frame, kin);
    }
  }
  return bp;
}

struct Scales {
  double zeta, cmag;
  std::array<double, 4> cpen;
};

LocalBlock edge_block(const Discretization& disc, const LoadData* loads, const Scales& sc,
                      const AssemblyOptions& opt, Edge edge, int seg) {
  const BoundaryType bt = disc.spec.edge_type(edge);
  const bool d1 = is_d1(bt), d2 = is_d2(bt);
  const std::uint32_t t = opt.terms;
  const bool want_loads = (t & kLoads) && loads;
  const int nq = disc.rule.nq;
  const double z3c = sc.zeta * sc.zeta * sc.zeta * sc.cmag;
  LocalBlock blk;
  for (int q = 0; q < nq; ++q) {
    const int k = seg * nq + q;
    const BoundaryPoint bp = eval_boundary_point(disc, edge, k, opt.variant);
    const int nd = static_cast<int>(bp.dofs.size());
    if (blk.dofs.empty()) {
      blk.dofs.resize(nd);
      for (int a = 0; a < nd; ++a) blk.dofs[a] = bp.dofs[a].dof;
      blk.K = Eigen::MatrixXd::Zero(nd, nd);
      blk.F = Eigen::VectorXd::Zero(nd);
    }
    const Vec3d& a3 = bp.frame.a3;
    const double W = bp.measure, h = bp.h;
    const double P1 = z3c * sc.cpen[0] / (h * h * h);
    const double P3 = z3c * sc.cpen[2] / h;
    const double P4 = sc.cpen[3] * sc.zeta * sc.cmag / h;
    std::vector<double> phi3(nd);
    std::vector<Vec3d> phibar(nd);
    for (int a = 0; a < nd; ++a) {
      phi3[a] = dot(a3, bp.dofs[a].phi);
      phibar[a] = bp.dofs[a].phi - a3 * phi3[a];
    }
    const EdgeLoad* el = loads ? &loads->edges[static_cast<int>(edge)] : nullptr;
    if (d1) {
      for (int a = 0; a < nd; ++a) {
        const BoundaryDof& da = bp.dofs[a];
        for (int b = 0; b < nd; ++b) {
          const BoundaryDof& db = bp.dofs[b];
          double v = 0.0;
          if (t & kD1Consistency) v -= dot(da.ba.T, db.phi) + dot(db.ba.T, da.phi);
          if (t & kD1PenaltyOut) v += P1 * phi3[a] * phi3[b];
          if (t & kD1PenaltyIn) v += P4 * dot(phibar[a], phibar[b]);
          blk.K(a, b) += W * v;
        }
      }
      if (want_loads) {
        const Vec3d& ug = el->u[k];
        const double u3 = dot(a3, ug);
        const Vec3d ubar = ug - a3 * u3;
        for (int b = 0; b < nd; ++b) {
          double v = 0.0;
          if (t & kD1Consistency) v -= dot(bp.dofs[b].ba.T, ug);
          if (t & kD1PenaltyOut) v += P1 * u3 * phi3[b];
          if (t & kD1PenaltyIn) v += P4 * dot(ubar, phibar[b]);
          blk.F(b) += W * v;
        }
      }
    } else if (want_loads) {
      for (int b = 0; b < nd; ++b) blk.F(b) += W * dot(el->T[k], bp.dofs[b].phi);
    }
    if (d2) {
      for (int a = 0; a < nd; ++a) {
        const BoundaryDof& da = bp.dofs[a];
        for (int b = 0; b < nd; ++b) {
          const BoundaryDof& db = bp.dofs[b];
          double v = 0.0;
          if (t & kD2Consistency) v -= da.ba.Bnn * db.theta_n + db.ba.Bnn * da.theta_n;
          if (t & kD2Penalty) v += P3 * da.theta_n * db.theta_n;
          blk.K(a, b) += W * v;
        }
      }
      if (want_loads) {
        const double th = el->theta_n[k];
        for (int b = 0; b < nd; ++b) {
          double v = 0.0;
          if (t & kD2Consistency) v -= bp.dofs[b].ba.Bnn * th;
          if (t & kD2Penalty) v += P3 * th * bp.dofs[b].theta_n;
          blk.F(b) += W * v;
        }
      }
    } else if (want_loads) {
      for (int b = 0; b < nd; ++b) blk.F(b) += W * el->Bnn[k] * bp.dofs[b].theta_n;
    }
  }
  return blk;
}

double corner_edge_parameter(Edge e, const CornerInfo& info) {
  return (e == Edge::S || e == Edge::N) ? info.xi1 : info.xi2;
}

LocalBlock corner_block(const Discretization& disc, const LoadData* loads, const Scales& sc,
                        const AssemblyOptions& opt, const CornerInfo& info) {
  const double h = disc.topo.corner_h(info.corner);
  const BoundaryPoint before = boundary_point_at(disc, info.before, corner_edge_parameter(info.before, info), 1.0, h,
                                                 ErsatzVariant::Consistent);
  const BoundaryPoint after = boundary_point_at(disc, info.after, corner_edge_parameter(info.after, info), 1.0, h,
                                                ErsatzVariant::Consistent);
  const int nd = static_cast<int>(before.dofs.size());
  LocalBlock blk;
  blk.dofs.resize(nd);
  for (int a = 0; a < nd; ++a) blk.dofs[a] = before.dofs[a].dof;
  blk.K = Eigen::MatrixXd::Zero(nd, nd);
  blk.F = Eigen::VectorXd::Zero(nd);
  const Vec3d& a3 = before.frame.a3;
  std::vector<double> jump(nd), phi3(nd);
  for (int a = 0; a < nd; ++a) {
    jump[a] = corner_jump(before.dofs[a].ba.Bnt, after.dofs[a].ba.Bnt);
    phi3[a] = dot(a3, before.dofs[a].phi);
  }
  const std::uint32_t t = opt.terms;
  const bool want_loads = (t & kLoads) && loads;
  const CornerLoad* cl = loads ? &loads->corners[static_cast<int>(info.corner)] : nullptr;
  if (disc.spec.corner_dirichlet(info.corner)) {
    const double P2 = sc.zeta * sc.zeta * sc.zeta * sc.cmag * sc.cpen[1] / (h * h);
    for (int a = 0; a < nd; ++a)
      for (int b = 0; b < nd; ++b) {
        double v = 0.0;
        if (t & kCornerConsistency) v -= jump[a] * phi3[b] + jump[b] * phi3[a];
        if (t & kCornerPenalty) v += P2 * phi3[a] * phi3[b];
        blk.K(a, b) += v;
      }
    if (want_loads) {
      const double u3 = dot(a3, cl->u);
      for (int b = 0; b < nd; ++b) {
        double v = 0.0;
        if (t & kCornerConsistency) v -= jump[b] * u3;
        if (t & kCornerPenalty) v += P2 * u3 * phi3[b];
        blk.F(b) += v;
      }
    }
  } else if (want_loads) {
    for (int b = 0; b < nd; ++b) blk.F(b) += cl->jump * phi3[b];
  }
  return blk;
}

void scatter(const LocalBlock& blk, Eigen::MatrixXd* K, Eigen::VectorXd* F) {
  const int nd = static_cast<int>(blk.dofs.size());
  if (K && blk.K.size() > 0) {
    for (int b = 0; b < nd; ++b)
      for (int a = 0; a < nd; ++a) (*K)(blk.dofs[a], blk.dofs[b]) += blk.K(a, b);
  }
  if (F && blk.F.size() > 0) {
    for (int a = 0; a < nd; ++a) (*F)(blk.dofs[a]) += blk.F(a);
  }
}

// Work items are computed independently and merged in item order, so the
// serial and parallel paths produce bit-identical sums.
template <class Compute>
void run_items(int count, Execution exec, const Compute& compute, Eigen::MatrixXd* K, Eigen::VectorXd* F) {
  if (exec == Execution::Serial) {
    for (int i = 0; i < count; ++i) scatter(compute(i), K, F);
    return;
  }
  constexpr int kChunk = 256;
  std::vector<LocalBlock> blocks;
  for (int start = 0; start < count; start += kChunk) {
    const int n = std::min(kChunk, count - start);
    blocks.assign(n, LocalBlock{});
    std::string failure;
#pragma omp parallel for schedule(dynamic, 1)
    for (int i = 0; i < n; ++i) {
      try {
        blocks[i] = compute(start + i);
      } catch (const std::exception& e) {
#pragma omp critical(kls_assembly_failure)
        if (failure.empty()) failure = e.what();
      }
    }
    if (!failure.empty()) throw Error(ErrorKind::Domain, "assembly failed: " + failure);
    for (const auto& b : blocks) scatter(b, K, F);
  }
}

}  // namespace

BoundaryPoint eval_boundary_point(const Discretization& disc, Edge edge, int k, ErsatzVariant variant) {
  const int seg = k / disc.rule.nq;
  return boundary_point_at(disc, edge, disc.rule.points[k], disc.rule.weights[k], disc.topo.edge_h(edge, seg),
                           variant);
}

BoundaryPoint eval_boundary_at(const Discretization& disc, Edge edge, double s, ErsatzVariant variant) {
  const int seg = std::min(disc.mesh - 1, static_cast<int>(s * disc.mesh));
  return boundary_point_at(disc, edge, s, 1.0, disc.topo.edge_h(edge, seg), variant);
}

AssembledSystem assemble(const Discretization& disc, const LoadData* loads, const PenaltyConfig& pen,
                         const AssemblyOptions& opt) {
  pen.validate();
  if (!disc.spec.has_d1_edge()) {
    throw Error(ErrorKind::Validation, "no edge prescribes displacement; the system would be singular");
  }
  if (loads) loads->validate(disc.rule);
  const int n = disc.num_dofs();
  AssembledSystem sys;
  sys.K = Eigen::MatrixXd::Zero(n, n);
  sys.F = Eigen::VectorXd::Zero(n);
  const int m = disc.mesh;
  const bool with_loads = (opt.terms & kLoads) && loads;
  if ((opt.terms & kInterior) || with_loads) {
    const bool wk = opt.terms & kInterior;
    run_items(
        m * m, opt.exec,
        [&](int e) { return interior_block(disc, loads, wk, with_loads, e % m, e / m); }, &sys.K, &sys.F);
  }
  const Scales sc{disc.spec.material.zeta, disc.spec.material.c_magnitude(), pen.cpen()};
  run_items(
      4 * m, opt.exec, [&](int i) { return edge_block(disc, loads, sc, opt, static_cast<Edge>(i / m), i % m); },
      &sys.K, &sys.F);
  run_items(
      4, opt.exec, [&](int c) { return corner_block(disc, loads, sc, opt, corner_table()[c]); }, &sys.K, &sys.F);
  return sys;
}

Eigen::MatrixXd assemble_stiffness(const Discretization& disc, Execution exec) {
  const int n = disc.num_dofs();
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n, n);
  const int m = disc.mesh;
  run_items(
      m * m, exec, [&](int e) { return interior_block(disc, nullptr, true, false, e % m, e / m); }, &K, nullptr);
  return K;
}

void write_matrix_market(const std::string& path, const Eigen::MatrixXd& K) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Validation, "cannot open '" + path + "' for writing");
  long nnz = 0;
  for (int j = 0; j < K.cols(); ++j)
    for (int i = 0; i < K.rows(); ++i) nnz += K(i, j) != 0.0;
  out << "%%MatrixMarket matrix coordinate real general\n" << K.rows() << ' ' << K.cols() << ' ' << nnz << '\n';
  for (int j = 0; j < K.cols(); ++j)
    for (int i = 0; i < K.rows(); ++i)
      if (K(i, j) != 0.0) out << i + 1 << ' ' << j + 1 << ' ' << format_double(K(i, j)) << '\n';
}

void write_vector_market(const std::string& path, const Eigen::VectorXd& F) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Validation, "cannot open '" + path + "' for writing");
  out << "%%MatrixMarket matrix array real general\n" << F.size() << " 1\n";
  for (int i = 0; i < F.size(); ++i) out << format_double(F(i)) << '\n';
}

}  // namespace kls
