#include <gtest/gtest.h>

#include <array>
#include <numeric>
#include <vector>

#include "mibfvm/errors.hpp"
#include "mibfvm/stencil.hpp"
#include "studies.hpp"

using namespace mibfvm;

namespace {

void expect_weights(const std::vector<double>& got, const std::vector<double>& want) {
  ASSERT_EQ(got.size(), want.size());
  for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], want[i], 1e-14) << "weight " << i;
}

}  // namespace

TEST(Stencil, InterpolationAtHalfStep) {
  const std::array<double, 3> nodes{-1.0, 0.0, 1.0};
  expect_weights(fd_weights(-0.5, nodes, 0).weights, {0.375, 0.75, -0.125});
}

TEST(Stencil, DerivativeAtHalfStep) {
  const std::array<double, 3> nodes{-1.0, 0.0, 1.0};
  expect_weights(fd_weights(-0.5, nodes, 1).weights, {-1.0, 1.0, 0.0});
}

TEST(Stencil, InterpolationAtNode) {
  const std::array<double, 3> nodes{-1.0, 0.0, 1.0};
  expect_weights(fd_weights(0.0, nodes, 0).weights, {0.0, 1.0, 0.0});
}

TEST(Stencil, WeightSums) {
  const std::array<double, 4> nodes{-0.3, 0.4, 1.1, 2.0};
  const auto w0 = fd_weights(0.7, nodes, 0).weights;
  const auto w1 = fd_weights(0.7, nodes, 1).weights;
  EXPECT_NEAR(std::accumulate(w0.begin(), w0.end(), 0.0), 1.0, 1e-12);
  double wmax = 0.0;
  for (double w : w1) wmax = std::max(wmax, std::abs(w));
  EXPECT_NEAR(std::accumulate(w1.begin(), w1.end(), 0.0), 0.0, 1e-12 * wmax);
}

TEST(Stencil, RejectsBadInput) {
  const std::array<double, 3> dup{0.0, 1.0, 1.0};
  EXPECT_THROW(fd_weights(0.5, dup, 0), DuplicateNodes);
  const std::array<double, 1> one{0.0};
  EXPECT_THROW(fd_weights(0.5, one, 0), std::invalid_argument);
  const std::array<double, 7> seven{0, 1, 2, 3, 4, 5, 6};
  EXPECT_THROW(fd_weights(0.5, seven, 0), std::invalid_argument);
  const std::array<double, 3> ok{0.0, 1.0, 2.0};
  EXPECT_THROW(fd_weights(0.5, ok, 2), std::invalid_argument);
}

TEST(Stencil, CachedMatchesDirect) {
  const std::array<double, 3> nodes{-1.0, 0.0, 1.0};
  for (int d : {0, 1}) {
    const auto a = cached_fd_weights(0.25, nodes, d);
    const auto b = fd_weights(0.25, nodes, d).weights;
    expect_weights(a, b);
    expect_weights(cached_fd_weights(0.25, nodes, d), b);
  }
}

TEST(StencilProperty, PolynomialExactness) {
  const auto r = study::fd_exactness(100, 1);
  EXPECT_EQ(r.samples, 100);
  EXPECT_LE(r.max_error, r.tolerance);
}

TEST(StencilProperty, TranslationInvariance) {
  const auto r = study::fd_translation(100, 2);
  EXPECT_LE(r.max_error, r.tolerance);
}

TEST(StencilProperty, ScalingCovariance) {
  const auto r = study::fd_scaling(100, 3);
  EXPECT_LE(r.max_error, r.tolerance);
}
