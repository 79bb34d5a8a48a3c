// The eight manufactured shell problems: geometry, exact displacement,
// boundary layout, and generation / file exchange of the derived load data.
#pragma once

#include <array>
#include <string>
#include <vector>

#include "kls/geometry.hpp"
#include "kls/mechanics.hpp"
#include "kls/quadrature.hpp"
#include "kls/spline.hpp"

namespace kls {

// Clamped = D1 and D2, SimplySupported = D1 and N2, Symmetric = N1 and D2,
// Free = N1 and N2. D1 prescribes displacement, D2 the normal rotation.
enum class BoundaryType { Clamped, SimplySupported, Symmetric, Free };

constexpr bool is_d1(BoundaryType t) { return t == BoundaryType::Clamped || t == BoundaryType::SimplySupported; }
constexpr bool is_d2(BoundaryType t) { return t == BoundaryType::Clamped || t == BoundaryType::Symmetric; }
const char* boundary_type_name(BoundaryType t);

// Patch corners with the edges met before and after them on a
// counterclockwise walk S -> E -> N -> W.
enum class Corner { SE = 0, NE = 1, NW = 2, SW = 3 };
struct CornerInfo {
  Corner corner;
  Edge before, after;
  double xi1, xi2;
};
const std::array<CornerInfo, 4>& corner_table();
const char* corner_name(Corner c);

struct ProblemSpec {
  int id = 0;
  std::string name;
  std::string exact_description;
  NurbsPatch patch;                    // single-element master patch
  std::array<BoundaryType, 4> edges{}; // indexed by Edge
  Material material;

  BoundaryType edge_type(Edge e) const { return edges[static_cast<int>(e)]; }
  // A corner belongs to the Dirichlet corner set when an adjacent edge is D1.
  bool corner_dirichlet(Corner c) const;
  bool has_d1_edge() const;
  void validate() const;
};

ProblemSpec get_problem(int id);

// Partial derivatives (order <= 4) of the exact Cartesian displacement.
// Instantiated for double and dd.
template <class T>
SurfaceJetT<T> eval_exact(const ProblemSpec& spec, const T& xi1, const T& xi2, int order);

// Partial derivatives (order <= 5) of the master geometry via jet arithmetic.
template <class T>
SurfaceJetT<T> eval_geometry(const NurbsPatch& master, const T& xi1, const T& xi2, int order);

// Largest distance between points of the mapped 9x9 parametric sample grid.
double patch_diameter(const NurbsPatch& patch);

struct EdgeLoad {
  std::vector<Vec3d> T;        // ersatz force of the exact field
  std::vector<double> Bnn;     // bending moment
  std::vector<Vec3d> u;        // displacement
  std::vector<double> theta_n; // normal rotation
};

struct CornerLoad {
  double jump = 0.0;  // twisting-moment jump, after minus before
  Vec3d u;
};

struct LoadData {
  int problem_id = 0;
  int mesh = 0;
  int degree = 0;
  int nq = 0;
  std::vector<Vec3d> f;  // body load at interior points
  std::array<EdgeLoad, 4> edges;
  std::array<CornerLoad, 4> corners;

  // Throws GridMismatch when the layout differs from `rule`, NonFinite on NaN/Inf.
  void validate(const QuadratureRule& rule) const;
};

// Loads are computed in double-double from the exact field and rounded.
LoadData generate_load_data(const ProblemSpec& spec, const QuadratureRule& rule, int degree);

void export_load_data(const std::string& path, const LoadData& data);
// Reads and validates a file against the expected problem and rule.
LoadData import_load_data(const std::string& path, int problem_id, const QuadratureRule& rule);
std::string load_data_to_json(const LoadData& data);
LoadData load_data_from_json(const std::string& text);

}  // namespace kls
