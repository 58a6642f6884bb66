#pragma once

#include <vector>

#include "mibfvm/mesh.hpp"

namespace mibfvm {

/// Nodal scalar field on a mesh.
struct DiscreteField {
  MeshSpec spec;
  std::vector<double> values;

  double operator[](NodeId node) const { return values[node]; }
  double& operator[](NodeId node) { return values[node]; }
  NodeId size() const { return static_cast<NodeId>(values.size()); }
};

}  // namespace mibfvm
