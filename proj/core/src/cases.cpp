#include "mibfvm/cases.hpp"

#include <cmath>

#include "mibfvm/errors.hpp"

namespace mibfvm {

CaseDefinition::CaseDefinition(std::string name, std::string description, int dim, Point lo, Point hi,
                               LevelSetShape shape, SideData plus, SideData minus)
    : name_(std::move(name)),
      description_(std::move(description)),
      dim_(dim),
      lo_(lo),
      hi_(hi),
      shape_(std::move(shape)),
      plus_(std::move(plus)),
      minus_(std::move(minus)) {
  default_resolutions_ = dim == 2 ? std::vector<int>{40, 80, 160} : std::vector<int>{20, 40, 80};
}

CaseDefinition& CaseDefinition::with_resolution_factor(std::array<double, 3> f) {
  factor_ = f;
  return *this;
}

CaseDefinition& CaseDefinition::with_default_resolutions(std::vector<int> r) {
  default_resolutions_ = std::move(r);
  return *this;
}

double CaseDefinition::cv_source(Side s, const Point& centre, const std::array<double, 3>& size) const {
  double volume = 1.0;
  bool holds_origin = reject_origin_;
  for (int a = 0; a < dim_; ++a) {
    volume *= size[a];
    holds_origin = holds_origin && std::abs(centre[a]) <= 0.5 * size[a];
  }
  if (!holds_origin) return g(s, centre) * volume;
  constexpr int kSub = 16;
  const int nz = dim_ == 3 ? kSub : 1;
  double sum = 0.0;
  for (int k = 0; k < nz; ++k) {
    for (int j = 0; j < kSub; ++j) {
      for (int i = 0; i < kSub; ++i) {
        Point x = centre;
        const int idx[3] = {i, j, k};
        for (int a = 0; a < dim_; ++a) x[a] += ((idx[a] + 0.5) / kSub - 0.5) * size[a];
        sum += g(s, x);
      }
    }
  }
  return sum * volume / (kSub * kSub * nz);
}

CaseDefinition& CaseDefinition::with_mesh_options(MeshOptions o) {
  mesh_options_ = o;
  return *this;
}

CaseDefinition& CaseDefinition::with_origin_rejection(bool on) {
  reject_origin_ = on;
  return *this;
}

double CaseDefinition::phi_jump(const Point& x) const { return plus_.u(x) - minus_.u(x); }

double CaseDefinition::psi_jump(const Point& x, const Point& normal) const {
  return plus_.beta(x) * dot(plus_.grad_u(x), normal) - minus_.beta(x) * dot(minus_.grad_u(x), normal);
}

Point CaseDefinition::grad_jump(const Point& x) const { return plus_.grad_u(x) - minus_.grad_u(x); }

double CaseDefinition::g_b(const Point& x) const { return u(shape_.side_at(x), x); }

MeshSpec CaseDefinition::mesh_spec(int n) const {
  MeshSpec spec;
  spec.dim = dim_;
  spec.lo = lo_;
  spec.hi = hi_;
  for (int a = 0; a < 3; ++a) spec.n[a] = a < dim_ ? static_cast<int>(std::lround(n * factor_[a])) : 1;
  spec.validate();
  if (reject_origin_) {
    bool on_origin = true;
    for (int a = 0; a < dim_ && on_origin; ++a) {
      const double h = spec.spacing(a);
      const double k = (0.0 - lo_[a]) / h;
      on_origin = std::abs(k - std::round(k)) < 1e-9;
    }
    if (on_origin) throw InvalidMeshSpec("case " + name_ + ": a mesh node would coincide with the origin");
  }
  return spec;
}

namespace cases {

namespace {

using SideData = CaseDefinition::SideData;

CaseDefinition::ScalarFn constant(double c) {
  return [c](const Point&) { return c; };
}

CaseDefinition::VectorFn zero_gradient() {
  return [](const Point&) -> Point { return {0.0, 0.0, 0.0}; };
}

double ccc(const Point& x) { return std::cos(x[0]) * std::cos(x[1]) * std::cos(x[2]); }

Point grad_ccc(const Point& x) {
  const double cx = std::cos(x[0]), cy = std::cos(x[1]), cz = std::cos(x[2]);
  const double sx = std::sin(x[0]), sy = std::sin(x[1]), sz = std::sin(x[2]);
  return {-sx * cy * cz, -cx * sy * cz, -cx * cy * sz};
}

double sss(const Point& x) { return std::sin(x[0]) * std::sin(x[1]) * std::sin(x[2]); }

Point grad_sss(const Point& x) {
  const double cx = std::cos(x[0]), cy = std::cos(x[1]), cz = std::cos(x[2]);
  const double sx = std::sin(x[0]), sy = std::sin(x[1]), sz = std::sin(x[2]);
  return {cx * sy * sz, sx * cy * sz, sx * sy * cz};
}

double coord_sum(const Point& x) { return x[0] + x[1] + x[2]; }

double radius(const Point& x) { return std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]); }

// r^(5/3) and its derivatives; callers never evaluate at the origin.
double r53(const Point& x) { return std::pow(x[0] * x[0] + x[1] * x[1] + x[2] * x[2], 5.0 / 6.0); }

Point grad_r53(const Point& x) {
  const double f = 5.0 / 3.0 * std::pow(radius(x), -1.0 / 3.0);
  return {f * x[0], f * x[1], f * x[2]};
}

double laplacian_r53(const Point& x) { return 40.0 / 9.0 * std::pow(radius(x), -1.0 / 3.0); }

// u- = cos x cos y cos z with beta- = (x + y)/2 + 10.
SideData ccc_with_linear_beta() {
  SideData d;
  d.u = ccc;
  d.grad_u = grad_ccc;
  d.beta = [](const Point& x) { return 0.5 * (x[0] + x[1]) + 10.0; };
  d.g = [](const Point& x) {
    const Point gu = grad_ccc(x);
    return 3.0 * (0.5 * (x[0] + x[1]) + 10.0) * ccc(x) - 0.5 * (gu[0] + gu[1]);
  };
  return d;
}

SideData ccc_with_constant_beta(double beta) {
  SideData d;
  d.u = ccc;
  d.grad_u = grad_ccc;
  d.beta = constant(beta);
  d.g = [beta](const Point& x) { return 3.0 * beta * ccc(x); };
  return d;
}

SideData constant_solution(double value, CaseDefinition::ScalarFn beta) {
  SideData d;
  d.u = constant(value);
  d.grad_u = zero_gradient();
  d.beta = std::move(beta);
  d.g = constant(0.0);
  return d;
}

}  // namespace

CaseDefinition case1() {
  SideData plus;
  plus.u = [](const Point& x) { return 0.25 + std::sin(x[0]) * std::sin(x[1]); };
  plus.grad_u = [](const Point& x) -> Point {
    return {std::cos(x[0]) * std::sin(x[1]), std::sin(x[0]) * std::cos(x[1]), 0.0};
  };
  plus.beta = constant(1.0);
  plus.g = [](const Point& x) { return 2.0 * std::sin(x[0]) * std::sin(x[1]); };
  SideData minus = constant_solution(0.0, constant(1.0));
  CaseDefinition c("case1", "2D six-petal flower, beta = 1 on both sides", 2, {-1.0, -1.0, 0.0},
                   {1.0, 1.0, 0.0}, complement(shapes::flower2d()), plus, minus);
  // At 40 x 40 the y = -0.25 line grazes a petal valley.
  c.with_mesh_options({.allow_hidden_crossings = true});
  return c;
}

CaseDefinition case2() {
  SideData plus;
  plus.u = [](const Point& x) { return std::exp(x[0]) * (x[1] * x[1] + x[0] * x[0] * std::sin(x[1])); };
  plus.grad_u = [](const Point& x) -> Point {
    const double e = std::exp(x[0]);
    const double s = std::sin(x[1]);
    return {e * (x[1] * x[1] + x[0] * x[0] * s + 2.0 * x[0] * s),
            e * (2.0 * x[1] + x[0] * x[0] * std::cos(x[1])), 0.0};
  };
  plus.beta = constant(1.0);
  plus.g = [](const Point& x) {
    return -std::exp(x[0]) * (x[1] * x[1] + 2.0 + (4.0 * x[0] + 2.0) * std::sin(x[1]));
  };
  SideData minus;
  minus.u = [](const Point& x) { return -(x[0] * x[0] + x[1] * x[1]); };
  minus.grad_u = [](const Point& x) -> Point { return {-2.0 * x[0], -2.0 * x[1], 0.0}; };
  minus.beta = constant(10.0);
  minus.g = constant(40.0);
  CaseDefinition c("case2", "2D jigsaw curve, beta 1 / 10, mesh n x 1.5n", 2, {-1.0, 0.0, 0.0},
                   {1.0, 3.0, 0.0}, complement(shapes::jigsaw2d()), plus, minus);
  c.with_resolution_factor({1.0, 1.5, 1.0});
  return c;
}

CaseDefinition case3a() {
  return CaseDefinition("case3a", "sphere r0 = 3/4, beta 8 / 1", 3, {-1.0, -1.0, -1.0}, {1.0, 1.0, 1.0},
                        complement(shapes::sphere(0.75)), constant_solution(0.0, constant(8.0)),
                        ccc_with_constant_beta(1.0));
}

CaseDefinition case3b() {
  SideData plus = constant_solution(0.0, [](const Point& x) { return 1.0 + std::cos(coord_sum(x) / 10.0); });
  SideData minus;
  minus.u = ccc;
  minus.grad_u = grad_ccc;
  minus.beta = [](const Point& x) { return 1.0 + 3.0 * std::sin(coord_sum(x) / 10.0); };
  minus.g = [](const Point& x) {
    const double s = coord_sum(x) / 10.0;
    const Point gu = grad_ccc(x);
    return 3.0 * (1.0 + 3.0 * std::sin(s)) * ccc(x) - 0.3 * std::cos(s) * (gu[0] + gu[1] + gu[2]);
  };
  return CaseDefinition("case3b", "sphere r0 = 3/4, position-dependent beta", 3, {-1.0, -1.0, -1.0},
                        {1.0, 1.0, 1.0}, complement(shapes::sphere(0.75)), plus, minus);
}

CaseDefinition case4() {
  SideData plus;
  plus.u = [](const Point& x) { return std::exp(-dot(x, x) / 20.0); };
  plus.grad_u = [](const Point& x) -> Point {
    const double u = std::exp(-dot(x, x) / 20.0);
    return {-x[0] / 10.0 * u, -x[1] / 10.0 * u, -x[2] / 10.0 * u};
  };
  plus.beta = [](const Point& x) { return x[2] + 15.0; };
  plus.g = [](const Point& x) {
    const double u = std::exp(-dot(x, x) / 20.0);
    return -(x[2] + 15.0) * u * (dot(x, x) / 100.0 - 0.3) + x[2] / 10.0 * u;
  };
  return CaseDefinition("case4", "thin ellipsoid, position-dependent beta", 3, {-5.0, -5.0, -5.0},
                        {5.0, 5.0, 5.0}, complement(shapes::ellipsoid()), plus, ccc_with_linear_beta());
}

CaseDefinition case5() {
  SideData plus;
  plus.u = coord_sum;
  plus.grad_u = [](const Point&) -> Point { return {1.0, 1.0, 1.0}; };
  plus.beta = constant(8.0);
  plus.g = constant(0.0);
  return CaseDefinition("case5", "cylinder of radius pi and height 2 pi, beta 8 / 1", 3, {-4.0, -4.0, -2.0},
                        {4.0, 4.0, 8.4}, complement(shapes::cylinder(M_PI, 2.0 * M_PI, 0.0)), plus,
                        ccc_with_constant_beta(1.0));
}

CaseDefinition case6() {
  SideData plus;
  plus.u = sss;
  plus.grad_u = grad_sss;
  plus.beta = constant(8.0);
  plus.g = [](const Point& x) { return 24.0 * sss(x); };
  SideData minus;
  minus.u = [](const Point& x) { return std::exp(coord_sum(x) / 10.0); };
  minus.grad_u = [](const Point& x) -> Point {
    const double e = std::exp(coord_sum(x) / 10.0) / 10.0;
    return {e, e, e};
  };
  minus.beta = constant(1.0);
  minus.g = [](const Point& x) { return -0.03 * std::exp(coord_sum(x) / 10.0); };
  return CaseDefinition("case6", "five-petal flower cylinder, beta 8 / 1", 3, {-5.0, -5.0, -2.0},
                        {5.0, 5.0, 2.0}, complement(shapes::flower_cylinder()), plus, minus);
}

CaseDefinition case7() {
  SideData plus;
  plus.u = [](const Point& x) { return sss(x) + 1.0; };
  plus.grad_u = grad_sss;
  plus.beta = constant(8.0);
  plus.g = [](const Point& x) { return 24.0 * sss(x); };
  return CaseDefinition("case7", "torus R = 3, r = 1, beta 8 / 1", 3, {-5.0, -5.0, -2.0}, {5.0, 5.0, 2.0},
                        shapes::torus(3.0, 1.0), plus, ccc_with_constant_beta(1.0));
}

CaseDefinition case8a() {
  SideData minus;
  minus.u = r53;
  minus.grad_u = grad_r53;
  minus.beta = constant(1.0);
  minus.g = [](const Point& x) { return -laplacian_r53(x); };
  CaseDefinition c("case8a", "sphere, low-regularity solution r^(5/3), beta 4 / 1", 3, {-1.0, -1.0, -1.0},
                   {1.05, 1.05, 1.05}, complement(shapes::sphere(0.75)), constant_solution(8.0, constant(4.0)), minus);
  c.with_origin_rejection(true);
  return c;
}

CaseDefinition case8b() {
  SideData minus;
  minus.u = [](const Point& x) { return r53(x) + std::sin(coord_sum(x)); };
  minus.grad_u = [](const Point& x) -> Point {
    const Point g = grad_r53(x);
    const double c = std::cos(coord_sum(x));
    return {g[0] + c, g[1] + c, g[2] + c};
  };
  minus.beta = [](const Point& x) { return 0.5 * (x[0] + x[1]) + 10.0; };
  minus.g = [](const Point& x) {
    const double beta = 0.5 * (x[0] + x[1]) + 10.0;
    const Point g = grad_r53(x);
    const double c = std::cos(coord_sum(x));
    return -beta * (laplacian_r53(x) - 3.0 * std::sin(coord_sum(x))) - 0.5 * (g[0] + g[1] + 2.0 * c);
  };
  CaseDefinition c("case8b", "ellipsoid, low-regularity solution, position-dependent beta", 3,
                   {-5.0, -5.0, -5.0}, {5.05, 5.05, 5.05}, complement(shapes::ellipsoid()),
                   constant_solution(8.0, [](const Point& x) { return x[2] + 5.0; }), minus);
  c.with_origin_rejection(true);
  // The thin ellipsoid's tips graze same-sign edges on the shifted 40^3 grid.
  c.with_mesh_options({.allow_hidden_crossings = true});
  return c;
}

}  // namespace cases

const std::vector<std::string>& case_names() {
  static const std::vector<std::string> names{"case1", "case2",  "case3a", "case3b", "case4",
                                              "case5", "case6", "case7",  "case8a", "case8b"};
  return names;
}

CaseDefinition make_case(std::string_view name) {
  if (name == "case1") return cases::case1();
  if (name == "case2") return cases::case2();
  if (name == "case3a") return cases::case3a();
  if (name == "case3b") return cases::case3b();
  if (name == "case4") return cases::case4();
  if (name == "case5") return cases::case5();
  if (name == "case6") return cases::case6();
  if (name == "case7") return cases::case7();
  if (name == "case8a") return cases::case8a();
  if (name == "case8b") return cases::case8b();
  throw UnknownCase("unknown case '" + std::string(name) + "'; run 'mibfvm list-cases'");
}

DiscreteField exact_field(const CaseDefinition& problem, const ClassifiedMesh& mesh) {
  DiscreteField f{mesh.spec(), std::vector<double>(mesh.node_count())};
  for (NodeId node = 0; node < mesh.node_count(); ++node) {
    f.values[node] = problem.u(mesh.side(node), mesh.spec().position(node));
  }
  return f;
}

}  // namespace mibfvm
