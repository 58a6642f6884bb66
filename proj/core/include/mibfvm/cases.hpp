#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "mibfvm/field.hpp"
#include "mibfvm/geometry.hpp"
#include "mibfvm/mesh.hpp"

namespace mibfvm {

/// A manufactured elliptic interface problem -div(beta grad u) = g with
/// closed-form data on both subdomains. All per-side formulas are defined
/// on the whole box, so they double as the smooth extensions used near the
/// interface.
class CaseDefinition {
 public:
  using ScalarFn = std::function<double(const Point&)>;
  using VectorFn = std::function<Point(const Point&)>;

  struct SideData {
    ScalarFn u;
    VectorFn grad_u;
    ScalarFn beta;
    ScalarFn g;
  };

  CaseDefinition(std::string name, std::string description, int dim, Point lo, Point hi,
                 LevelSetShape shape, SideData plus, SideData minus);

  const std::string& name() const noexcept { return name_; }
  const std::string& description() const noexcept { return description_; }
  int dim() const noexcept { return dim_; }
  const Point& lo() const noexcept { return lo_; }
  const Point& hi() const noexcept { return hi_; }
  const LevelSetShape& shape() const noexcept { return shape_; }

  /// Cells per axis relative to the nominal resolution n.
  const std::array<double, 3>& resolution_factor() const noexcept { return factor_; }
  const std::vector<int>& default_resolutions() const noexcept { return default_resolutions_; }
  bool rejects_origin_node() const noexcept { return reject_origin_; }
  const MeshOptions& mesh_options() const noexcept { return mesh_options_; }

  CaseDefinition& with_resolution_factor(std::array<double, 3> f);
  CaseDefinition& with_default_resolutions(std::vector<int> r);
  CaseDefinition& with_origin_rejection(bool on);
  CaseDefinition& with_mesh_options(MeshOptions o);

  const SideData& side(Side s) const { return s == Side::Plus ? plus_ : minus_; }

  double u(Side s, const Point& x) const { return side(s).u(x); }
  Point grad_u(Side s, const Point& x) const { return side(s).grad_u(x); }
  double beta(Side s, const Point& x) const { return side(s).beta(x); }
  double g(Side s, const Point& x) const { return side(s).g(x); }

  /// Source integrated over the control volume centred at `centre` with edge
  /// lengths `size`: the midpoint rule, except that for cases singular at the
  /// origin the volume containing it is integrated on a 16^dim subgrid.
  double cv_source(Side s, const Point& centre, const std::array<double, 3>& size) const;

  /// [u] = u+ - u-.
  double phi_jump(const Point& x) const;
  /// [beta u_n] = beta+ grad u+ . n - beta- grad u- . n with n the frame normal.
  double psi_jump(const Point& x, const Point& normal) const;
  /// grad u+ - grad u-.
  Point grad_jump(const Point& x) const;

  /// Dirichlet data: the exact solution of the side containing x.
  double g_b(const Point& x) const;

  /// Mesh for nominal resolution n. Throws InvalidMeshSpec when the case
  /// forbids a node at the origin and the mesh would place one there.
  MeshSpec mesh_spec(int n) const;

 private:
  std::string name_;
  std::string description_;
  int dim_;
  Point lo_;
  Point hi_;
  LevelSetShape shape_;
  SideData plus_;
  SideData minus_;
  std::array<double, 3> factor_{1.0, 1.0, 1.0};
  std::vector<int> default_resolutions_;
  bool reject_origin_ = false;
  MeshOptions mesh_options_;
};

namespace cases {

CaseDefinition case1();
CaseDefinition case2();
CaseDefinition case3a();
CaseDefinition case3b();
CaseDefinition case4();
CaseDefinition case5();
CaseDefinition case6();
CaseDefinition case7();
CaseDefinition case8a();
CaseDefinition case8b();

}  // namespace cases

/// Registered case names in display order.
const std::vector<std::string>& case_names();

/// Looks a case up by name. Throws UnknownCase.
CaseDefinition make_case(std::string_view name);

/// Exact nodal values, taking u+ or u- according to each node's side.
DiscreteField exact_field(const CaseDefinition& problem, const ClassifiedMesh& mesh);

}  // namespace mibfvm
