#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <vector>

#include "mibfvm/geometry.hpp"

namespace mibfvm::shapes {

namespace {

// Closed curve x(t) = 0.6 cos t - 0.3 cos 3t, y(t) = 1.5 + 0.7 sin t - 0.07 sin 3t + 0.2 sin 7t.
// The level function is the signed distance to the curve (positive inside),
// found by dense sampling and a Newton polish of the nearest parameter.
class JigsawCurve {
 public:
  static constexpr int kSamples = 4096;

  JigsawCurve() {
    samples_.reserve(kSamples);
    double area = 0.0;
    for (int k = 0; k < kSamples; ++k) samples_.push_back(position(parameter(k)));
    for (int k = 0; k < kSamples; ++k) {
      const Point& a = samples_[k];
      const Point& b = samples_[(k + 1) % kSamples];
      area += a[0] * b[1] - b[0] * a[1];
      max_spacing_ = std::max(max_spacing_, norm(b - a));
    }
    counter_clockwise_ = area > 0.0;
  }

  static double parameter(int k) { return 2.0 * M_PI * k / kSamples; }

  static Point position(double t) {
    return {0.6 * std::cos(t) - 0.3 * std::cos(3 * t),
            1.5 + 0.7 * std::sin(t) - 0.07 * std::sin(3 * t) + 0.2 * std::sin(7 * t), 0.0};
  }
  static Point velocity(double t) {
    return {-0.6 * std::sin(t) + 0.9 * std::sin(3 * t),
            0.7 * std::cos(t) - 0.21 * std::cos(3 * t) + 1.4 * std::cos(7 * t), 0.0};
  }
  static Point acceleration(double t) {
    return {-0.6 * std::cos(t) + 2.7 * std::cos(3 * t),
            -0.7 * std::sin(t) + 0.63 * std::sin(3 * t) - 9.8 * std::sin(7 * t), 0.0};
  }

  Point outward_normal(double t) const {
    const Point v = velocity(t);
    const double len = norm(v);
    const Point right{v[1] / len, -v[0] / len, 0.0};
    return counter_clockwise_ ? right : (-1.0) * right;
  }

  double nearest_parameter(const Point& x) const {
    int best = 0;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (int k = 0; k < kSamples; ++k) {
      const double dx = samples_[k][0] - x[0];
      const double dy = samples_[k][1] - x[1];
      const double d2 = dx * dx + dy * dy;
      if (d2 < best_d2) {
        best_d2 = d2;
        best = k;
      }
    }
    const double dt = 2.0 * M_PI / kSamples;
    const double t_lo = parameter(best) - dt;
    const double t_hi = parameter(best) + dt;
    double t = parameter(best);
    for (int it = 0; it < 30; ++it) {
      const Point r = position(t) - x;
      const Point v = velocity(t);
      const Point a = acceleration(t);
      const double f = r[0] * v[0] + r[1] * v[1];
      double fp = v[0] * v[0] + v[1] * v[1] + r[0] * a[0] + r[1] * a[1];
      if (fp <= 0.0) fp = v[0] * v[0] + v[1] * v[1];
      const double step = f / fp;
      t = std::clamp(t - step, t_lo, t_hi);
      if (std::abs(step) < 1e-15) break;
    }
    return t;
  }

  bool inside_polygon(const Point& x) const {
    bool inside = false;
    for (int k = 0, j = kSamples - 1; k < kSamples; j = k++) {
      const Point& a = samples_[k];
      const Point& b = samples_[j];
      if ((a[1] > x[1]) != (b[1] > x[1])) {
        const double xc = (b[0] - a[0]) * (x[1] - a[1]) / (b[1] - a[1]) + a[0];
        if (x[0] < xc) inside = !inside;
      }
    }
    return inside;
  }

  double signed_distance(const Point& x) const {
    const double t = nearest_parameter(x);
    const Point r = x - position(t);
    const double d = std::hypot(r[0], r[1]);
    bool inside;
    if (d > 2.0 * max_spacing_) {
      inside = inside_polygon(x);
    } else {
      inside = dot(r, outward_normal(t)) < 0.0;
    }
    return inside ? d : -d;
  }

  Point gradient(const Point& x) const { return (-1.0) * outward_normal(nearest_parameter(x)); }

 private:
  std::vector<Point> samples_;
  double max_spacing_ = 0.0;
  bool counter_clockwise_ = true;
};

}  // namespace

LevelSetShape flower2d() {
  auto phi = [](const Point& x) {
    const double theta = std::atan2(x[1], x[0]);
    return 0.5 * (1.0 + 0.5 * std::sin(6.0 * theta)) - std::hypot(x[0], x[1]);
  };
  auto grad = [](const Point& x) -> Point {
    const double rho2 = x[0] * x[0] + x[1] * x[1];
    if (rho2 == 0.0) return {0.0, 0.0, 0.0};
    const double rho = std::sqrt(rho2);
    const double theta = std::atan2(x[1], x[0]);
    const double dr = 1.5 * std::cos(6.0 * theta);
    return {dr * (-x[1] / rho2) - x[0] / rho, dr * (x[0] / rho2) - x[1] / rho, 0.0};
  };
  return LevelSetShape("flower2d", 2, phi, grad, 0.5);
}

LevelSetShape jigsaw2d() {
  auto curve = std::make_shared<const JigsawCurve>();
  auto phi = [curve](const Point& x) { return curve->signed_distance(x); };
  auto grad = [curve](const Point& x) { return curve->gradient(x); };
  return LevelSetShape("jigsaw2d", 2, phi, grad, 1.0, 1.0);
}

LevelSetShape sphere(double r0) {
  auto phi = [r0](const Point& x) { return r0 * r0 - (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]); };
  auto grad = [](const Point& x) -> Point { return {-2.0 * x[0], -2.0 * x[1], -2.0 * x[2]}; };
  return LevelSetShape("sphere", 3, phi, grad, r0);
}

LevelSetShape ellipsoid(double a, double b, double c) {
  auto phi = [a, b, c](const Point& x) {
    return 1.0 - ((x[0] / a) * (x[0] / a) + (x[1] / b) * (x[1] / b) + (x[2] / c) * (x[2] / c));
  };
  auto grad = [a, b, c](const Point& x) -> Point {
    return {-2.0 * x[0] / (a * a), -2.0 * x[1] / (b * b), -2.0 * x[2] / (c * c)};
  };
  return LevelSetShape("ellipsoid", 3, phi, grad, std::min({a, b, c}));
}

LevelSetShape cylinder(double r, double h, double z_base) {
  const double zc = z_base + 0.5 * h;
  const double half = 0.5 * h;
  auto phi = [r, zc, half](const Point& x) {
    return std::min(r - std::hypot(x[0], x[1]), half - std::abs(x[2] - zc));
  };
  auto grad = [r, zc, half](const Point& x) -> Point {
    const double rho = std::hypot(x[0], x[1]);
    const double radial = r - rho;
    const double axial = half - std::abs(x[2] - zc);
    if (radial <= axial) {
      if (rho == 0.0) return {0.0, 0.0, 0.0};
      return {-x[0] / rho, -x[1] / rho, 0.0};
    }
    return {0.0, 0.0, x[2] >= zc ? -1.0 : 1.0};
  };
  return LevelSetShape("cylinder", 3, phi, grad, std::min(r, half));
}

LevelSetShape flower_cylinder() {
  constexpr double kHalfHeight = 2.0 / 3.0;
  auto radius = [](double theta) { return 2.5 + 5.0 / 7.0 * std::sin(5.0 * theta); };
  auto phi = [radius](const Point& x) {
    const double theta = std::atan2(x[1], x[0]);
    return std::min(radius(theta) - std::hypot(x[0], x[1]), kHalfHeight - std::abs(x[2]));
  };
  auto grad = [radius](const Point& x) -> Point {
    const double rho2 = x[0] * x[0] + x[1] * x[1];
    const double rho = std::sqrt(rho2);
    const double theta = std::atan2(x[1], x[0]);
    const double radial = radius(theta) - rho;
    const double axial = kHalfHeight - std::abs(x[2]);
    if (radial <= axial) {
      if (rho2 == 0.0) return {0.0, 0.0, 0.0};
      const double dr = 25.0 / 7.0 * std::cos(5.0 * theta);
      return {dr * (-x[1] / rho2) - x[0] / rho, dr * (x[0] / rho2) - x[1] / rho, 0.0};
    }
    return {0.0, 0.0, x[2] >= 0.0 ? -1.0 : 1.0};
  };
  return LevelSetShape("flower_cylinder", 3, phi, grad, kHalfHeight);
}

LevelSetShape torus(double R, double r) {
  auto phi = [R, r](const Point& x) {
    const double d = R - std::hypot(x[0], x[1]);
    return r * r - d * d - x[2] * x[2];
  };
  auto grad = [R](const Point& x) -> Point {
    const double rho = std::hypot(x[0], x[1]);
    if (rho == 0.0) return {0.0, 0.0, -2.0 * x[2]};
    const double d = R - rho;
    return {2.0 * d * x[0] / rho, 2.0 * d * x[1] / rho, -2.0 * x[2]};
  };
  return LevelSetShape("torus", 3, phi, grad, r);
}

}  // namespace mibfvm::shapes
