#include "kls/geometry.hpp"

namespace kls {

const char* edge_name(Edge e) {
  switch (e) {
    case Edge::S: return "S";
    case Edge::E: return "E";
    case Edge::N: return "N";
    case Edge::W: return "W";
  }
  return "?";
}

std::array<double, 2> edge_point(Edge e, double s) {
  switch (e) {
    case Edge::S: return {s, 0.0};
    case Edge::E: return {1.0, s};
    case Edge::N: return {s, 1.0};
    case Edge::W: return {0.0, s};
  }
  return {0.0, 0.0};
}

std::array<double, 2> edge_tangent(Edge e) {
  switch (e) {
    case Edge::S: return {1.0, 0.0};
    case Edge::E: return {0.0, 1.0};
    case Edge::N: return {-1.0, 0.0};
    case Edge::W: return {0.0, -1.0};
  }
  return {0.0, 0.0};
}

}  // namespace kls
