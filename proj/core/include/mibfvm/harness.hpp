#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mibfvm/cases.hpp"
#include "mibfvm/errors.hpp"
#include "mibfvm/field.hpp"
#include "mibfvm/system.hpp"

namespace mibfvm {

/// Module error rethrown with case and resolution context; the original
/// exception is nested.
class RunError : public Error {
 public:
  using Error::Error;
};

struct ErrorNorms {
  double L_inf = 0.0;
  double L2 = 0.0;  // root mean square over all nodes
};

ErrorNorms error_norms(const DiscreteField& computed, const DiscreteField& exact);

/// log(e_coarse / e_fine) / log(ratio). Throws DegenerateError if either error is zero.
double observed_order(double e_coarse, double e_fine, double ratio = 2.0);

struct ConvergenceRow {
  int n = 0;
  std::array<int, 3> cells{};
  double L_inf = 0.0;
  double L2 = 0.0;
  std::optional<double> order_inf;
  std::optional<double> order_L2;
  int iterations = 0;
  double residual = 0.0;
  bool direct_solve = false;
  /// Assembly plus solve.
  double seconds = 0.0;
  int intersections = 0;
  int pair_solves = 0;
  int coupled_solves = 0;
  int failed_solves = 0;
  int disassociated_fluxes = 0;
  int max_pair_support = 0;
};

struct ConvergenceReport {
  std::string case_name;
  std::vector<ConvergenceRow> rows;
};

struct RunOptions {
  SolverOptions solver;
  MibOptions mib;
  bool verbose = false;
  /// When verbose, per-resolution diagnostics go to <prefix>_n<N>_mib.csv
  /// (and _nodes.csv / _intersections.csv); empty disables the files.
  std::string diagnostics_prefix;
  /// Non-empty: write <prefix>_n<N>_matrix.txt and <prefix>_n<N>_rhs.txt.
  std::string matrix_export_prefix;
  std::function<void(const std::string&)> log;
};

struct ResolutionResult {
  ConvergenceRow row;
  DiscreteField computed;
  DiscreteField exact;
};

/// Classify, solve fictitious values, assemble, solve and measure at one resolution.
ResolutionResult run_resolution(const CaseDefinition& problem, int n, const RunOptions& options = {});

/// Runs every resolution in order and fills in the observed orders. If
/// `finest` is given it receives the last computed and exact fields.
ConvergenceReport run_convergence(const std::string& case_name, const std::vector<int>& resolutions,
                                  const RunOptions& options = {}, ResolutionResult* finest = nullptr);

/// CSV columns: case,n,L_inf,L2,order_inf,order_L2,iters,seconds.
void write_report_csv(const ConvergenceReport& report, std::ostream& out);
void write_report_csv(const ConvergenceReport& report, const std::string& path);

/// Human-readable table.
std::string format_report(const ConvergenceReport& report);

/// Per-node (x, y, error) rows on the mesh plane nearest to coordinate
/// `value` along `axis` (ignored in 2D, where every node is written). The
/// two columns are the remaining in-plane coordinates.
void write_slice_csv(const DiscreteField& computed, const DiscreteField& exact, int axis, double value,
                     const std::string& path);

}  // namespace mibfvm
