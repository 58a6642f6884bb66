#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>

#include "mibfvm/types.hpp"

namespace mibfvm {

/// Implicit interface description. The zero set of phi is the interface;
/// phi < 0 is Omega+ and phi > 0 is Omega-.
class LevelSetShape {
 public:
  using ScalarFn = std::function<double(const Point&)>;
  using VectorFn = std::function<Point(const Point&)>;

  /// `scale` is a characteristic length of the shape, used for relative
  /// tolerances and the finite-difference gradient fallback. When a bound on
  /// |grad phi| is known it may be passed as `lipschitz`; the mesh classifier
  /// then skips edges that cannot contain a crossing.
  LevelSetShape(std::string name, int dim, ScalarFn phi, VectorFn gradient = {}, double scale = 1.0,
                std::optional<double> lipschitz = std::nullopt);

  const std::string& name() const noexcept { return name_; }
  int dim() const noexcept { return dim_; }
  double scale() const noexcept { return scale_; }
  std::optional<double> lipschitz() const noexcept { return lipschitz_; }
  bool has_analytic_gradient() const noexcept { return static_cast<bool>(gradient_); }

  double phi(const Point& x) const { return phi_(x); }

  /// Analytic gradient when available, otherwise central differences with
  /// step 1e-6 * scale.
  Point gradient(const Point& x) const;

  /// Central-difference gradient, regardless of whether an analytic one exists.
  Point numerical_gradient(const Point& x) const;

  static Side side_of(double phi_value) noexcept { return phi_value < 0.0 ? Side::Plus : Side::Minus; }
  Side side_at(const Point& x) const { return side_of(phi(x)); }

 private:
  std::string name_;
  int dim_;
  ScalarFn phi_;
  VectorFn gradient_;
  double scale_;
  std::optional<double> lipschitz_;
};

/// Orthonormal frame (xi, eta, zeta) at an interface point. Row 0 of `P` is
/// the unit normal; `P` maps Cartesian components to frame components.
/// In 2D only the leading 2x2 block is meaningful and P[2][2] = 1.
struct LocalFrame {
  int dim = 3;
  Point point{};
  Point normal{};
  double theta = 0.0;        // azimuth
  double phi_zenith = 0.0;   // zenith
  std::array<Point, 3> P{};  // rows

  const Point& row(int i) const { return P[i]; }
};

/// phi(x) under the shape's sign convention.
double eval_phi(const LevelSetShape& shape, const Point& x);

/// Bisection for the interface point on the segment p0-p1.
/// Throws NoSignChange unless phi(p0) * phi(p1) < 0.
Point locate_root(const LevelSetShape& shape, const Point& p0, const Point& p1, double tol = 1e-14);

/// Same as locate_root, but the endpoint values are supplied by the caller
/// (used after on-node values have been perturbed away from zero).
Point locate_root(const LevelSetShape& shape, const Point& p0, double phi0, const Point& p1, double phi1,
                  double tol = 1e-14);

/// Builds the frame from a unit normal. 3D uses the azimuth/zenith
/// parametrisation; 2D is the rotation taking (x, y) to (xi, eta).
LocalFrame frame_from_normal(const Point& normal, int dim, const Point& point = {});

/// Normal orientation is n = -grad phi / |grad phi|, pointing from Omega- into Omega+.
/// Throws DegenerateNormal if |grad phi| <= 1e-12.
LocalFrame local_frame(const LevelSetShape& shape, const Point& x);

/// Same zero set with phi negated, exchanging Omega+ and Omega-.
LevelSetShape complement(const LevelSetShape& shape);

namespace shapes {

/// Six-petal flower r = (1 + sin(6 theta) / 2) / 2.
LevelSetShape flower2d();

/// Closed parametric jigsaw curve, represented by a signed distance that is
/// positive inside the curve.
LevelSetShape jigsaw2d();

/// phi = r0^2 - |x|^2.
LevelSetShape sphere(double r0 = 0.75);

/// phi = 1 - (x/a)^2 - (y/b)^2 - (z/c)^2.
LevelSetShape ellipsoid(double a = 2.0 / 7.0, double b = 25.0 / 14.0, double c = 25.0 / 14.0);

/// Finite cylinder of radius r around the z axis, occupying z_base <= z <= z_base + h.
LevelSetShape cylinder(double r, double h, double z_base = 0.0);

/// Five-petal flower r = 5/2 + 5/7 sin(5 theta) extruded over |z| <= 2/3.
LevelSetShape flower_cylinder();

/// Torus of major radius R and tube radius r around the z axis:
/// phi = r^2 - (R - sqrt(x^2 + y^2))^2 - z^2.
LevelSetShape torus(double R = 3.0, double r = 1.0);

}  // namespace shapes

}  // namespace mibfvm
