#pragma once

#include <Eigen/Sparse>
#include <functional>
#include <string>

#include "mibfvm/cases.hpp"
#include "mibfvm/field.hpp"
#include "mibfvm/mesh.hpp"
#include "mibfvm/mib.hpp"

namespace mibfvm {

/// Sparse system over all nodal unknowns. Interior rows hold the integrated
/// flux balance of each control volume; boundary rows are identity rows.
struct LinearSystem {
  using Matrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

  Matrix matrix;
  Eigen::VectorXd rhs;
  NodeId n_unknowns = 0;
  /// Number of flux terms that used a fictitious value from another intersection.
  int disassociated_fluxes = 0;
};

/// Control-volume assembly. Each face flux is beta of the CV's side at the
/// face midpoint times area times the 3-point midpoint derivative; cross-side
/// stencil nodes are replaced by their fictitious forms. Boundary rows are
/// left as identity rows with zero right-hand side.
/// Throws MissingFictitious if the table lacks a needed form.
LinearSystem assemble(const ClassifiedMesh& mesh, const FictitiousTable& table, const CaseDefinition& problem);

/// Sets every boundary row to the identity with rhs = g_b(node).
void apply_dirichlet(LinearSystem& system, const ClassifiedMesh& mesh,
                     const std::function<double(const Point&)>& g_b);

struct SolveResult {
  DiscreteField field;
  int iterations = 0;
  /// ||A u - b|| / ||b||.
  double residual = 0.0;
  bool direct = false;
};

struct SolverOptions {
  double rel_tol = 1e-10;
  /// 0 selects 100 * sqrt(n_unknowns).
  int max_iter = 0;
  /// Retry with a sparse LU factorisation when the Krylov solve stalls and
  /// the system has at most this many unknowns.
  NodeId direct_fallback_limit = 50000;
};

/// BiCGSTAB with a diagonal preconditioner. Throws NoConvergence.
SolveResult solve(const LinearSystem& system, const MeshSpec& spec, double rel_tol, int max_iter);

/// solve() followed, on NoConvergence, by a sparse LU solve for small systems.
SolveResult solve_with_fallback(const LinearSystem& system, const MeshSpec& spec, const SolverOptions& options);

/// Plain-text triplet export: "n_rows n_cols nnz", then "row col value" per
/// entry (0-based). The rhs goes to a separate file as "index value" lines
/// when `rhs_path` is non-empty.
void write_triplets(const LinearSystem& system, const std::string& matrix_path,
                    const std::string& rhs_path = {});

}  // namespace mibfvm
