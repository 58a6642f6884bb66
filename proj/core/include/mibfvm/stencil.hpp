#pragma once

#include <span>
#include <vector>

namespace mibfvm {

/// One-dimensional finite-difference weights: sum_k weights[k] * f(nodes[k])
/// approximates f^(deriv_order)(eval_point), exactly for polynomials of degree
/// below nodes.size().
struct WeightSet {
  double eval_point = 0.0;
  std::vector<double> nodes;
  int deriv_order = 0;
  std::vector<double> weights;
};

/// Recursive (Fornberg) weight generation. Accepts 2..6 pairwise distinct
/// nodes and deriv_order 0 or 1; throws DuplicateNodes or std::invalid_argument.
WeightSet fd_weights(double eval_point, std::span<const double> nodes, int deriv_order);

/// Cached variant keyed on node offsets relative to eval_point, quantised to
/// 1e-14. The cache is thread-local.
std::vector<double> cached_fd_weights(double eval_point, std::span<const double> nodes,
                                             int deriv_order);

}  // namespace mibfvm
