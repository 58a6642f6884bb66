#include "mibfvm/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <utility>

#include "mibfvm/errors.hpp"

namespace mibfvm {

LevelSetShape::LevelSetShape(std::string name, int dim, ScalarFn phi, VectorFn gradient, double scale,
                             std::optional<double> lipschitz)
    : name_(std::move(name)),
      dim_(dim),
      phi_(std::move(phi)),
      gradient_(std::move(gradient)),
      scale_(scale),
      lipschitz_(lipschitz) {}

Point LevelSetShape::gradient(const Point& x) const {
  if (gradient_) {
    Point g = gradient_(x);
    if (dim_ == 2) g[2] = 0.0;
    return g;
  }
  return numerical_gradient(x);
}

Point LevelSetShape::numerical_gradient(const Point& x) const {
  const double step = 1e-6 * scale_;
  Point g{0.0, 0.0, 0.0};
  for (int a = 0; a < dim_; ++a) {
    Point xp = x;
    Point xm = x;
    xp[a] += step;
    xm[a] -= step;
    g[a] = (phi_(xp) - phi_(xm)) / (2.0 * step);
  }
  return g;
}

double eval_phi(const LevelSetShape& shape, const Point& x) { return shape.phi(x); }

Point locate_root(const LevelSetShape& shape, const Point& p0, const Point& p1, double tol) {
  return locate_root(shape, p0, shape.phi(p0), p1, shape.phi(p1), tol);
}

Point locate_root(const LevelSetShape& shape, const Point& p0, double phi0, const Point& p1, double phi1,
                  double tol) {
  if (!(phi0 * phi1 < 0.0)) {
    throw NoSignChange("locate_root: segment endpoints do not bracket the interface");
  }
  constexpr int kMaxIterations = 60;
  const double phi_tol = tol * std::max(std::abs(phi0), std::abs(phi1));
  const double length = norm(p1 - p0);
  Point lo = p0;
  Point hi = p1;
  const bool lo_negative = phi0 < 0.0;
  Point mid = 0.5 * (lo + hi);
  for (int it = 0; it < kMaxIterations; ++it) {
    mid = 0.5 * (lo + hi);
    const double value = shape.phi(mid);
    if (value == 0.0 || std::abs(value) <= phi_tol) return mid;
    if ((value < 0.0) == lo_negative) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (norm(hi - lo) <= tol * length) break;
  }
  return 0.5 * (lo + hi);
}

LevelSetShape complement(const LevelSetShape& shape) {
  auto base = std::make_shared<const LevelSetShape>(shape);
  LevelSetShape::VectorFn grad;
  if (shape.has_analytic_gradient()) {
    grad = [base](const Point& x) { return -1.0 * base->gradient(x); };
  }
  return LevelSetShape(shape.name() + "-complement", shape.dim(),
                       [base](const Point& x) { return -base->phi(x); }, grad, shape.scale(), shape.lipschitz());
}

LocalFrame frame_from_normal(const Point& normal, int dim, const Point& point) {
  LocalFrame f;
  f.dim = dim;
  f.point = point;
  const double len = norm(normal);
  if (!(len > 1e-12)) throw DegenerateNormal("frame_from_normal: zero normal");
  Point n = (1.0 / len) * normal;
  if (dim == 2) {
    n[2] = 0.0;
    n = (1.0 / norm(n)) * n;
    f.normal = n;
    f.theta = std::atan2(n[1], n[0]);
    f.phi_zenith = 0.5 * M_PI;
    f.P[0] = {n[0], n[1], 0.0};
    f.P[1] = {-n[1], n[0], 0.0};
    f.P[2] = {0.0, 0.0, 1.0};
    return f;
  }
  f.normal = n;
  // sin(phi) = |n_xy|, cos(phi) = n_z; at the pole theta is fixed to zero.
  const double rho = std::hypot(n[0], n[1]);
  const double sin_phi = rho;
  const double cos_phi = n[2];
  double cos_theta = 1.0;
  double sin_theta = 0.0;
  if (rho > 1e-14) {
    cos_theta = n[0] / rho;
    sin_theta = n[1] / rho;
    f.theta = std::atan2(n[1], n[0]);
  } else {
    f.theta = 0.0;
  }
  f.phi_zenith = std::atan2(rho, n[2]);
  f.P[0] = {sin_phi * cos_theta, sin_phi * sin_theta, cos_phi};
  f.P[1] = {-sin_theta, cos_theta, 0.0};
  f.P[2] = {-cos_phi * cos_theta, -cos_phi * sin_theta, sin_phi};
  return f;
}

LocalFrame local_frame(const LevelSetShape& shape, const Point& x) {
  const Point g = shape.gradient(x);
  const double len = norm(g);
  if (!(len > 1e-12)) {
    throw DegenerateNormal("local_frame: level-set gradient vanishes at the interface point");
  }
  return frame_from_normal((-1.0 / len) * g, shape.dim(), x);
}

}  // namespace mibfvm
