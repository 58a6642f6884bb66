#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "mibfvm/geometry.hpp"
#include "mibfvm/types.hpp"

namespace mibfvm {

/// Uniform Cartesian mesh over a box. `n` counts cells per axis, so there
/// are n + 1 nodes along each active axis and h = (hi - lo) / n.
struct MeshSpec {
  int dim = 3;
  Point lo{0.0, 0.0, 0.0};
  Point hi{1.0, 1.0, 1.0};
  std::array<int, 3> n{4, 4, 4};

  /// Throws InvalidMeshSpec unless dim is 2 or 3, hi > lo and n >= 4 on every active axis.
  void validate() const;

  double spacing(int axis) const { return (hi[axis] - lo[axis]) / n[axis]; }
  int nodes_along(int axis) const { return axis < dim ? n[axis] + 1 : 1; }
  NodeId node_count() const { return nodes_along(0) * nodes_along(1) * nodes_along(2); }

  NodeId stride(int axis) const {
    NodeId s = 1;
    for (int a = 0; a < axis; ++a) s *= nodes_along(a);
    return s;
  }

  NodeId index(int i, int j, int k = 0) const {
    return i + nodes_along(0) * (j + nodes_along(1) * k);
  }

  std::array<int, 3> ijk(NodeId node) const {
    const int nx = nodes_along(0);
    const int ny = nodes_along(1);
    return {node % nx, (node / nx) % ny, node / (nx * ny)};
  }

  double coordinate(int axis, int i) const { return lo[axis] + i * spacing(axis); }

  Point position(NodeId node) const {
    const auto c = ijk(node);
    Point p{0.0, 0.0, 0.0};
    for (int a = 0; a < dim; ++a) p[a] = coordinate(a, c[a]);
    return p;
  }

  bool is_boundary(NodeId node) const {
    const auto c = ijk(node);
    for (int a = 0; a < dim; ++a)
      if (c[a] == 0 || c[a] == n[a]) return true;
    return false;
  }

  /// Node shifted by `offset` cells along `axis`, if it stays inside the box.
  std::optional<NodeId> shifted(NodeId node, int axis, int offset) const {
    const auto c = ijk(node);
    const int target = c[axis] + offset;
    if (target < 0 || target > n[axis]) return std::nullopt;
    return node + offset * stride(axis);
  }

  double cell_volume() const {
    double v = 1.0;
    for (int a = 0; a < dim; ++a) v *= spacing(a);
    return v;
  }

  /// Area of the control-volume face normal to `axis` (a length in 2D).
  double face_area(int axis) const {
    double v = 1.0;
    for (int a = 0; a < dim; ++a)
      if (a != axis) v *= spacing(a);
    return v;
  }
};

/// Crossing of the interface with the mesh edge lower -> lower + e_axis.
struct Intersection {
  int axis = 0;
  NodeId lower = 0;
  NodeId upper = 0;
  NodeId node_minus_side = 0;
  NodeId node_plus_side = 0;
  Point point{};
  /// Position of the crossing along the edge, in (0, 1) measured from `lower`.
  double fraction = 0.5;
  LocalFrame frame;
};

/// Replaces |phi| < 1e-12 * scale by 1e-12 * scale, keeping a nonzero sign
/// when there is one and otherwise taking `neighbor_sign`.
double perturb_node_phi(double phi_value, double scale, double neighbor_sign = 1.0);

class ClassifiedMesh {
 public:
  ClassifiedMesh(MeshSpec spec, std::vector<double> phi, std::vector<Side> sides,
                 std::vector<Intersection> intersections, int perturbed_nodes, int hidden_crossings = 0);

  const MeshSpec& spec() const noexcept { return spec_; }
  int dim() const noexcept { return spec_.dim; }
  NodeId node_count() const noexcept { return static_cast<NodeId>(sides_.size()); }

  Side side(NodeId node) const { return sides_[node]; }
  /// A control volume takes the sign of its centre node.
  Side cv_sign(NodeId node) const { return sides_[node]; }
  bool irregular(NodeId node) const { return irregular_[node] != 0; }
  double phi(NodeId node) const { return phi_[node]; }

  const std::vector<Intersection>& intersections() const noexcept { return intersections_; }
  const Intersection& intersection(int id) const { return intersections_[id]; }

  /// Intersection on the edge node -> node + e_axis, or -1.
  int edge_intersection(NodeId node, int axis) const { return edge_lookup_[axis][node]; }

  /// Intersection on the edge between two axis neighbours, or -1.
  int intersection_between(NodeId a, NodeId b, int axis) const {
    return edge_intersection(a < b ? a : b, axis);
  }

  std::size_t irregular_count() const;
  int perturbed_nodes() const noexcept { return perturbed_nodes_; }
  /// Edges with equal endpoint sides that the interface still crosses (an
  /// even number of times); only nonzero under MeshOptions::allow_hidden_crossings.
  int hidden_crossings() const noexcept { return hidden_crossings_; }

 private:
  MeshSpec spec_;
  std::vector<double> phi_;
  std::vector<Side> sides_;
  std::vector<std::uint8_t> irregular_;
  std::vector<Intersection> intersections_;
  std::array<std::vector<int>, 3> edge_lookup_;
  int perturbed_nodes_ = 0;
  int hidden_crossings_ = 0;
};

struct MeshOptions {
  /// Accept same-sign edges crossed an even number of times. Node labels
  /// cannot see such slivers, so they are counted and otherwise ignored.
  bool allow_hidden_crossings = false;
};

/// Evaluates phi on every node, classifies sides and irregular nodes and
/// locates all edge crossings. Throws ResolutionTooCoarse if a mesh edge
/// shows more than one sign change over 8 interior samples.
ClassifiedMesh build_classified_mesh(const MeshSpec& spec, const LevelSetShape& shape,
                                     const MeshOptions& options = {});

/// Debug dump: one CSV of nodes (index, coordinates, side, irregular) and one
/// of intersections (axis, coordinates, normal).
void write_mesh_csv(const ClassifiedMesh& mesh, const std::string& nodes_path,
                    const std::string& intersections_path);

}  // namespace mibfvm
