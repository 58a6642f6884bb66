#pragma once

#include <array>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mibfvm/cases.hpp"
#include "mibfvm/geometry.hpp"
#include "mibfvm/mesh.hpp"

namespace mibfvm {

/// Column of the derivative vector (u_x+, u_x-, u_y+, u_y-, u_z+, u_z-), 0-based.
constexpr int derivative_column(int axis, Side s) noexcept { return 2 * axis + side_index(s); }
constexpr int column_axis(int column) noexcept { return column / 2; }
constexpr Side column_side(int column) noexcept { return column % 2 == 0 ? Side::Plus : Side::Minus; }

/// Jump-condition matrix. Row 0 is [beta u_xi], rows 1 and 2 are [u_eta]
/// and [u_zeta]. 2D uses the leading 2 x 4 block.
struct CMatrix {
  int dim = 3;
  std::array<std::array<double, 6>, 3> entries{};
  double beta_plus = 1.0;
  double beta_minus = 1.0;

  int rows() const noexcept { return dim; }
  int cols() const noexcept { return 2 * dim; }
  std::array<double, 3> column(int j) const { return {entries[0][j], entries[1][j], entries[2][j]}; }
  double norm() const;
};

CMatrix build_c_matrix(const LocalFrame& frame, double beta_plus, double beta_minus);

/// Row weights (a, b, c); in 2D c is 0.
struct EliminationCoeffs {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
};

/// 3D: (a, b, c) = column l x column m (0-based columns, l < m).
/// Throws DegeneratePair when the columns are parallel to 1e-12 relative.
EliminationCoeffs elimination_coeffs(const CMatrix& C, int l, int m);

/// 2D: a = C[1][m], b = -C[0][m], which annihilates column m.
/// Throws DegeneratePair if column m vanishes.
EliminationCoeffs elimination_coeffs_2d(const CMatrix& C, int m);

/// a C_0 + b C_1 + c C_2.
std::array<double, 6> combined_row(const CMatrix& C, const EliminationCoeffs& k);

/// Interface data at one intersection point.
struct JumpDataSample {
  Point point{};
  double Phi = 0.0;
  double Psi = 0.0;
  double Phi_eta = 0.0;
  double Phi_zeta = 0.0;
};

JumpDataSample jump_sample(const CaseDefinition& problem, const LocalFrame& frame);

/// Availability of an off-axis derivative u_t^s at an intersection. `score`
/// counts same-side real nodes on the 3 x 3 auxiliary stencil, or is -1
/// when no auxiliary stencil can be built.
struct DerivativeScore {
  int score = -1;
  double window_distance = 0.0;
};

/// Elimination choice. In 3D two columns are removed; in 2D only `l`.
struct EliminationChoice {
  int l = -1;
  int m = -1;
  EliminationCoeffs coeffs;
  std::array<double, 6> row{};
};

/// All admissible choices, best first: lowest summed score of the eliminated
/// derivatives, ties broken by window distance, then axis order and side.
/// Choices that would keep an unavailable derivative, or whose columns are
/// degenerate or badly conditioned (|l x m| < 0.05 |l| |m|), are dropped.
std::vector<EliminationChoice> rank_elimination_pairs(const CMatrix& C, int axis,
                                                      const std::array<DerivativeScore, 6>& scores);

/// Per-column availability scores at an intersection (on-axis columns unused).
std::array<DerivativeScore, 6> derivative_scores(const ClassifiedMesh& mesh, int intersection);

/// Best pair for an intersection. Throws NoViablePair.
EliminationChoice select_elimination_pair(const ClassifiedMesh& mesh, int intersection, const CMatrix& C);

/// Identifies the fictitious unknown of an intersection: end 0 is the value
/// at the lower node, end 1 at the upper node. Each is the extension of the
/// opposite endpoint's side.
struct UnknownKey {
  int intersection = -1;
  int end = 0;
  bool operator==(const UnknownKey&) const = default;
};

/// Linear expression over real nodes, pending fictitious unknowns and a constant.
struct StencilExpr {
  std::vector<std::pair<NodeId, double>> real;
  std::vector<std::pair<UnknownKey, double>> unknowns;
  double constant = 0.0;

  void add(const StencilExpr& other, double scale);
  void compress();
  std::size_t support() const { return real.size(); }
};

/// Interpolation (deriv_order 0) or derivative (1) of u^s along the
/// intersection's axis at the crossing, from the 3-node window centred on
/// the side-s endpoint. Cross-side window nodes become fictitious unknowns.
/// Throws InsufficientNodes when the window leaves the domain.
StencilExpr axis_window(const ClassifiedMesh& mesh, int intersection, Side s, int deriv_order);

/// u_t^s at the crossing for an off-axis t: derivative weights along t over
/// three auxiliary lines, composed with interpolation weights along the
/// intersection axis on each line. Throws StencilUnavailable.
StencilExpr approx_tangential_derivative(const ClassifiedMesh& mesh, int intersection, int t, Side s);

/// Fictitious value as an affine form over real nodes.
struct FictitiousValueForm {
  NodeId node = 0;
  Side side = Side::Plus;
  int source_axis = 0;
  int source_intersection = -1;
  bool coupled = false;
  std::vector<std::pair<NodeId, double>> terms;
  double constant = 0.0;

  double evaluate(std::span<const double> nodal) const;
};

struct FictitiousPair {
  FictitiousValueForm lower;
  FictitiousValueForm upper;
  EliminationChoice choice;
  double det = 0.0;
};

/// Both jump conditions at the intersection, with the pair-selection
/// candidates tried in order. The equations are returned as expressions
/// that vanish on the exact extension.
std::array<StencilExpr, 2> fictitious_equations(const ClassifiedMesh& mesh, int intersection,
                                                const JumpDataSample& jump, const CMatrix& C,
                                                const EliminationChoice& choice);

/// Solves the 2 x 2 system for the lower/upper fictitious values.
/// Throws InsufficientNodes (a window needs another intersection's unknown
/// or leaves the domain), NoViablePair or SingularPairSystem.
FictitiousPair solve_fictitious_pair(const ClassifiedMesh& mesh, int intersection, const JumpDataSample& jump,
                                     const CaseDefinition& problem);

enum class IntersectionStatus { Pair, Coupled, Failed };

std::string_view to_string(IntersectionStatus s);

class FictitiousTable {
 public:
  struct Record {
    IntersectionStatus status = IntersectionStatus::Failed;
    int l = -1;
    int m = -1;
    double det = 0.0;
    int support = 0;
    std::string failure;
    std::array<int, 2> own{-1, -1};       // forms computed at this intersection
    std::array<int, 2> resolved{-1, -1};  // forms used by the fluxes across it
    std::array<bool, 2> disassociated{false, false};
  };

  struct Stats {
    int pair_solves = 0;
    int coupled_solves = 0;
    int failed = 0;
    int clusters = 0;
    int disassociated_fluxes = 0;
    int max_pair_support = 0;
  };

  std::vector<FictitiousValueForm> forms;
  std::vector<Record> records;
  Stats stats;
  bool resolved = false;

  /// Form used for the flux from the CV at the opposite endpoint to the
  /// given end of an intersection. Throws MissingFictitious.
  const FictitiousValueForm& flux_form(int intersection, int end) const;
};

struct MibOptions {
  /// Solve thin-region line clusters jointly when single pairs need
  /// each other's unknowns.
  bool coupled_clusters = true;
};

/// Primary per-intersection solves plus coupled line clusters.
FictitiousTable solve_fictitious_values(const ClassifiedMesh& mesh, const CaseDefinition& problem,
                                        const MibOptions& options = {});

/// Assigns a form to every flux that crosses the interface, reusing forms
/// from other intersections at the same node when the own one is missing.
/// Throws UnresolvableNode.
void disassociation_pass(const ClassifiedMesh& mesh, FictitiousTable& table);

/// Per-intersection CSV: id, point, axis, (l, m), determinant, status,
/// disassociation flag and support size.
void write_mib_diagnostics(const ClassifiedMesh& mesh, const FictitiousTable& table, const std::string& path);

}  // namespace mibfvm
