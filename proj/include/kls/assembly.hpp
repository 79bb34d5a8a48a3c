// Mesh bookkeeping and assembly of the Nitsche system for one problem on a
// uniformly refined single patch: interior stiffness, boundary consistency,
// symmetry and penalty terms, corner terms and the right-hand side.
#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "kls/geometry.hpp"
#include "kls/mechanics.hpp"
#include "kls/problems.hpp"
#include "kls/quadrature.hpp"
#include "kls/spline.hpp"

namespace kls {

// Element (e1, e2) has flat index e1 + mesh * e2.
struct MeshTopology {
  int mesh = 0;
  std::vector<double> h;  // element diameters

  int element(int e1, int e2) const { return e1 + mesh * e2; }
  // Owner element of boundary segment k (0-based along increasing xi) of an edge.
  int edge_owner(Edge e, int k) const;
  int corner_owner(Corner c) const;
  double edge_h(Edge e, int k) const { return h[edge_owner(e, k)]; }
  double corner_h(Corner c) const { return h[corner_owner(c)]; }
};

// h_K is the largest distance between points of the mapped 3x3 sample grid.
MeshTopology build_mesh(const NurbsPatch& refined);

struct Discretization {
  ProblemSpec spec;
  int degree = 0;
  int mesh = 0;
  NurbsPatch patch;  // refined
  MeshTopology topo;
  QuadratureRule rule;

  int num_basis() const { return patch.num_basis(); }
  int num_dofs() const { return 3 * patch.num_basis(); }
};

// nq = 0 selects default_quadrature_points(degree, mesh).
Discretization make_discretization(const ProblemSpec& spec, int degree, int mesh, int nq = 0);

inline int dof_index(int basis, int dir) { return 3 * basis + dir; }

struct PenaltyConfig {
  std::array<double, 4> gamma{2.0, 2.0, 2.0, 2.0};
  std::array<double, 5> ctr{1.0, 1.0, 1.0, 1.0, 1.0};

  // C_pen,i = gamma_i^2 C_tr,i for i = 1..3, C_pen,4 = gamma_4^2 max(C_tr,4, C_tr,5).
  std::array<double, 4> cpen() const;
  void validate() const;
};

// Term families, selectable for inspection.
enum TermFamily : std::uint32_t {
  kInterior = 1u << 0,          // membrane + bending stiffness
  kD1Consistency = 1u << 1,     // ersatz-force consistency and symmetry terms
  kD1PenaltyOut = 1u << 2,      // out-of-plane displacement penalty
  kD1PenaltyIn = 1u << 3,       // in-plane displacement penalty
  kD2Consistency = 1u << 4,     // moment consistency and symmetry terms
  kD2Penalty = 1u << 5,         // rotation penalty
  kCornerConsistency = 1u << 6, // corner-force consistency and symmetry terms
  kCornerPenalty = 1u << 7,     // corner displacement penalty
  kLoads = 1u << 8,             // body load and Neumann data
  kAllTerms = (1u << 9) - 1u,
};

enum class Execution { Serial, Parallel };

struct AssemblyOptions {
  ErsatzVariant variant = ErsatzVariant::Consistent;
  std::uint32_t terms = kAllTerms;
  Execution exec = Execution::Parallel;
};

struct AssembledSystem {
  Eigen::MatrixXd K;  // dense, both triangles filled
  Eigen::VectorXd F;
};

// With `loads` null the data-dependent right-hand side terms are skipped.
AssembledSystem assemble(const Discretization& disc, const LoadData* loads, const PenaltyConfig& pen,
                         const AssemblyOptions& opt = {});

// Interior stiffness (the bilinear form a) alone.
Eigen::MatrixXd assemble_stiffness(const Discretization& disc, Execution exec = Execution::Parallel);

// Boundary quantities of every local dof at one boundary point.
struct BoundaryDof {
  int dof = 0;
  Vec3d phi;                  // Cartesian shape vector R e_i
  BoundaryActions<double> ba; // ersatz force etc. under the requested variant
  double theta_n = 0.0;
};

struct BoundaryPoint {
  Edge edge = Edge::S;
  double xi1 = 0.0, xi2 = 0.0;
  double measure = 0.0;  // quadrature weight times the edge length element
  double h = 0.0;        // owner element size
  SurfaceFrame frame;
  EdgeFrame edge_frame;
  std::vector<BoundaryDof> dofs;
};

// k indexes the global 1D edge quadrature points.
BoundaryPoint eval_boundary_point(const Discretization& disc, Edge edge, int k, ErsatzVariant variant);
// Same quantities at an arbitrary parameter s along an edge, with unit measure.
BoundaryPoint eval_boundary_at(const Discretization& disc, Edge edge, double s, ErsatzVariant variant);

// Text dumps of K and F in matrix-market coordinate format.
void write_matrix_market(const std::string& path, const Eigen::MatrixXd& K);
void write_vector_market(const std::string& path, const Eigen::VectorXd& F);

}  // namespace kls
