#include "mibfvm/system.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>

#include "mibfvm/errors.hpp"
#include "mibfvm/stencil.hpp"

namespace mibfvm {

LinearSystem assemble(const ClassifiedMesh& mesh, const FictitiousTable& table, const CaseDefinition& problem) {
  if (!table.resolved) throw MissingFictitious("assemble: fictitious table has not been resolved");
  const auto& spec = mesh.spec();
  const NodeId n = mesh.node_count();
  LinearSystem sys;
  sys.n_unknowns = n;
  sys.rhs = Eigen::VectorXd::Zero(n);
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(n) * (2 * spec.dim + 1));

  for (NodeId p = 0; p < n; ++p) {
    if (spec.is_boundary(p)) {
      triplets.emplace_back(p, p, 1.0);
      continue;
    }
    const Side side = mesh.cv_sign(p);
    const Point xp = spec.position(p);
    sys.rhs[p] += problem.cv_source(side, xp, {spec.spacing(0), spec.spacing(1), spec.dim == 3 ? spec.spacing(2) : 1.0});
    for (int b = 0; b < spec.dim; ++b) {
      const double h = spec.spacing(b);
      const double area = spec.face_area(b);
      for (int dir : {-1, 1}) {
        const std::array<double, 3> offsets{-1.0 * dir, 0.0, 1.0 * dir};
        auto w = cached_fd_weights(0.5 * dir, offsets, 1);
        const double wmax = std::max({std::abs(w[0]), std::abs(w[1]), std::abs(w[2])});
        Point mid = xp;
        mid[b] += 0.5 * dir * h;
        // Outward flux beta du/dn * area enters the row with a minus sign.
        const double k = -problem.beta(side, mid) * area * dir / h;
        for (int s = 0; s < 3; ++s) {
          if (std::abs(w[s]) < 1e-13 * wmax) continue;
          const double coef = k * w[s];
          const int shift = static_cast<int>(offsets[s]);
          const NodeId q = shift == 0 ? p : *spec.shifted(p, b, shift);
          if (mesh.side(q) == side) {
            triplets.emplace_back(p, q, coef);
            continue;
          }
          const int ix = mesh.intersection_between(p, q, b);
          if (ix < 0) {
            throw MissingFictitious("assemble: cross-side neighbour without an intersection");
          }
          const int end = mesh.intersection(ix).lower == q ? 0 : 1;
          const auto& form = table.flux_form(ix, end);
          if (table.records[ix].disassociated[end]) ++sys.disassociated_fluxes;
          for (const auto& [node, weight] : form.terms) triplets.emplace_back(p, node, coef * weight);
          sys.rhs[p] -= coef * form.constant;
        }
      }
    }
  }
  sys.matrix.resize(n, n);
  sys.matrix.setFromTriplets(triplets.begin(), triplets.end());
  sys.matrix.makeCompressed();
  return sys;
}

void apply_dirichlet(LinearSystem& system, const ClassifiedMesh& mesh,
                     const std::function<double(const Point&)>& g_b) {
  const auto& spec = mesh.spec();
  auto& A = system.matrix;
  for (NodeId p = 0; p < mesh.node_count(); ++p) {
    if (!spec.is_boundary(p)) continue;
    bool has_diagonal = false;
    for (LinearSystem::Matrix::InnerIterator it(A, p); it; ++it) {
      if (it.col() == p) {
        it.valueRef() = 1.0;
        has_diagonal = true;
      } else {
        it.valueRef() = 0.0;
      }
    }
    if (!has_diagonal) A.coeffRef(p, p) = 1.0;
    system.rhs[p] = g_b(spec.position(p));
  }
}

namespace {

double relative_residual(const LinearSystem& system, const Eigen::VectorXd& u) {
  const double bnorm = system.rhs.norm();
  const double r = (system.rhs - system.matrix * u).norm();
  return bnorm > 0.0 ? r / bnorm : r;
}

}  // namespace

SolveResult solve(const LinearSystem& system, const MeshSpec& spec, double rel_tol, int max_iter) {
  if (!(rel_tol > 0.0)) throw std::invalid_argument("solve: rel_tol must be positive");
  const NodeId n = system.n_unknowns;
  if (max_iter <= 0) max_iter = static_cast<int>(std::ceil(100.0 * std::sqrt(static_cast<double>(n))));
  Eigen::BiCGSTAB<LinearSystem::Matrix, Eigen::DiagonalPreconditioner<double>> solver;
  solver.setTolerance(rel_tol);
  solver.setMaxIterations(max_iter);
  solver.compute(system.matrix);
  Eigen::VectorXd u = solver.solve(system.rhs);
  const double residual = relative_residual(system, u);
  if (!u.allFinite() || !(residual <= rel_tol)) {
    throw NoConvergence(static_cast<int>(solver.iterations()), residual);
  }
  SolveResult out;
  out.field.spec = spec;
  out.field.values.assign(u.data(), u.data() + u.size());
  out.iterations = static_cast<int>(solver.iterations());
  out.residual = residual;
  return out;
}

SolveResult solve_with_fallback(const LinearSystem& system, const MeshSpec& spec, const SolverOptions& options) {
  try {
    return solve(system, spec, options.rel_tol, options.max_iter);
  } catch (const NoConvergence& e) {
    if (system.n_unknowns > options.direct_fallback_limit) throw;
    Eigen::SparseMatrix<double> A = system.matrix;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(A);
    if (lu.info() != Eigen::Success) throw;
    Eigen::VectorXd u = lu.solve(system.rhs);
    const double residual = relative_residual(system, u);
    if (!u.allFinite() || !(residual <= options.rel_tol)) throw NoConvergence(e.iterations(), residual);
    SolveResult out;
    out.field.spec = spec;
    out.field.values.assign(u.data(), u.data() + u.size());
    out.iterations = e.iterations();
    out.residual = residual;
    out.direct = true;
    return out;
  }
}

void write_triplets(const LinearSystem& system, const std::string& matrix_path, const std::string& rhs_path) {
  std::ofstream out(matrix_path);
  if (!out) throw Error("cannot open " + matrix_path + " for writing");
  const auto& A = system.matrix;
  out << A.rows() << ' ' << A.cols() << ' ' << A.nonZeros() << '\n' << std::setprecision(17);
  for (int r = 0; r < A.outerSize(); ++r) {
    for (LinearSystem::Matrix::InnerIterator it(A, r); it; ++it) {
      out << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
    }
  }
  if (rhs_path.empty()) return;
  std::ofstream rhs(rhs_path);
  if (!rhs) throw Error("cannot open " + rhs_path + " for writing");
  rhs << std::setprecision(17);
  for (Eigen::Index i = 0; i < system.rhs.size(); ++i) rhs << i << ' ' << system.rhs[i] << '\n';
}

}  // namespace mibfvm
