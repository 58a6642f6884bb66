#include "mibfvm/stencil.hpp"

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <unordered_map>

#include "mibfvm/errors.hpp"

namespace mibfvm {

namespace {

// Fornberg's recursion for weights up to derivative order `m` at point z.
// c[k][j] accumulates the weight of node j for derivative k.
void fornberg(double z, std::span<const double> x, int m, std::vector<std::vector<double>>& c) {
  const int n = static_cast<int>(x.size());
  c.assign(m + 1, std::vector<double>(n, 0.0));
  double c1 = 1.0;
  double c4 = x[0] - z;
  c[0][0] = 1.0;
  for (int i = 1; i < n; ++i) {
    const int mn = std::min(i, m);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = x[i] - z;
    for (int j = 0; j < i; ++j) {
      const double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) c[k][i] = c1 * (k * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
        c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
      }
      for (int k = mn; k >= 1; --k) c[k][j] = (c4 * c[k][j] - k * c[k - 1][j]) / c3;
      c[0][j] = c4 * c[0][j] / c3;
    }
    c1 = c2;
  }
}

void validate(std::span<const double> nodes, int deriv_order) {
  if (nodes.size() < 2 || nodes.size() > 6) {
    throw std::invalid_argument("fd_weights: between 2 and 6 nodes are supported");
  }
  if (deriv_order != 0 && deriv_order != 1) {
    throw std::invalid_argument("fd_weights: deriv_order must be 0 or 1");
  }
  double span = 0.0;
  for (double a : nodes)
    for (double b : nodes) span = std::max(span, std::abs(a - b));
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    for (std::size_t j = i + 1; j < nodes.size(); ++j) {
      if (std::abs(nodes[i] - nodes[j]) <= 1e-14 * span || nodes[i] == nodes[j]) {
        throw DuplicateNodes("fd_weights: stencil nodes must be pairwise distinct");
      }
    }
  }
}

struct CacheKey {
  std::int64_t offsets[6];
  int count;
  int order;
  bool operator==(const CacheKey& o) const {
    if (count != o.count || order != o.order) return false;
    for (int i = 0; i < count; ++i)
      if (offsets[i] != o.offsets[i]) return false;
    return true;
  }
};

struct CacheKeyHash {
  std::size_t operator()(const CacheKey& k) const noexcept {
    std::size_t h = static_cast<std::size_t>(k.count * 31 + k.order);
    for (int i = 0; i < k.count; ++i) h = h * 1000003u ^ static_cast<std::size_t>(k.offsets[i]);
    return h;
  }
};

}  // namespace

WeightSet fd_weights(double eval_point, std::span<const double> nodes, int deriv_order) {
  validate(nodes, deriv_order);
  std::vector<std::vector<double>> c;
  fornberg(eval_point, nodes, deriv_order, c);
  WeightSet out;
  out.eval_point = eval_point;
  out.nodes.assign(nodes.begin(), nodes.end());
  out.deriv_order = deriv_order;
  out.weights = std::move(c[deriv_order]);
  return out;
}

std::vector<double> cached_fd_weights(double eval_point, std::span<const double> nodes,
                                             int deriv_order) {
  thread_local std::unordered_map<CacheKey, std::vector<double>, CacheKeyHash> cache;
  if (nodes.size() > 6) validate(nodes, deriv_order);
  CacheKey key{};
  key.count = static_cast<int>(nodes.size());
  key.order = deriv_order;
  for (int i = 0; i < key.count; ++i) {
    key.offsets[i] = static_cast<std::int64_t>(std::llround((nodes[i] - eval_point) * 1e14));
  }
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  if (cache.size() > (1u << 16)) cache.clear();
  return cache.emplace(key, fd_weights(eval_point, nodes, deriv_order).weights).first->second;
}

}  // namespace mibfvm
