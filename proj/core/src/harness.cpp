#include "mibfvm/harness.hpp"

#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "mibfvm/mib.hpp"

namespace mibfvm {

ErrorNorms error_norms(const DiscreteField& computed, const DiscreteField& exact) {
  if (computed.values.size() != exact.values.size()) {
    throw std::invalid_argument("error_norms: fields live on different meshes");
  }
  ErrorNorms e;
  if (computed.values.empty()) return e;
  double sum = 0.0;
  for (std::size_t i = 0; i < computed.values.size(); ++i) {
    const double d = std::abs(computed.values[i] - exact.values[i]);
    e.L_inf = std::max(e.L_inf, d);
    sum += d * d;
  }
  e.L2 = std::sqrt(sum / static_cast<double>(computed.values.size()));
  return e;
}

double observed_order(double e_coarse, double e_fine, double ratio) {
  if (!(e_coarse > 0.0) || !(e_fine > 0.0)) {
    throw DegenerateError("observed_order: errors must be positive");
  }
  return std::log(e_coarse / e_fine) / std::log(ratio);
}

ResolutionResult run_resolution(const CaseDefinition& problem, int n, const RunOptions& options) {
  const auto say = [&](const std::string& msg) {
    if (options.verbose && options.log) options.log(msg);
  };
  ResolutionResult res;
  auto& row = res.row;
  row.n = n;
  const MeshSpec spec = problem.mesh_spec(n);
  row.cells = spec.n;
  const ClassifiedMesh mesh = build_classified_mesh(spec, problem.shape(), problem.mesh_options());
  row.intersections = static_cast<int>(mesh.intersections().size());
  say(problem.name() + " n=" + std::to_string(n) + ": " + std::to_string(mesh.node_count()) + " nodes, " +
      std::to_string(mesh.irregular_count()) + " irregular, " + std::to_string(row.intersections) +
      " intersections" +
      (mesh.hidden_crossings() ? ", " + std::to_string(mesh.hidden_crossings()) + " hidden crossings" : ""));

  FictitiousTable table = solve_fictitious_values(mesh, problem, options.mib);
  disassociation_pass(mesh, table);
  row.pair_solves = table.stats.pair_solves;
  row.coupled_solves = table.stats.coupled_solves;
  row.failed_solves = table.stats.failed;
  row.disassociated_fluxes = table.stats.disassociated_fluxes;
  row.max_pair_support = table.stats.max_pair_support;
  say("  fictitious: " + std::to_string(row.pair_solves) + " pair, " + std::to_string(row.coupled_solves) +
      " coupled, " + std::to_string(row.failed_solves) + " failed; " + std::to_string(row.disassociated_fluxes) +
      " disassociated fluxes");
  if (options.verbose && !options.diagnostics_prefix.empty()) {
    const std::string base = options.diagnostics_prefix + "_n" + std::to_string(n);
    write_mib_diagnostics(mesh, table, base + "_mib.csv");
    write_mesh_csv(mesh, base + "_nodes.csv", base + "_intersections.csv");
  }

  const auto start = std::chrono::steady_clock::now();
  LinearSystem system = assemble(mesh, table, problem);
  apply_dirichlet(system, mesh, [&](const Point& x) { return problem.g_b(x); });
  if (!options.matrix_export_prefix.empty()) {
    const std::string base = options.matrix_export_prefix + "_n" + std::to_string(n);
    write_triplets(system, base + "_matrix.txt", base + "_rhs.txt");
  }
  SolveResult solved = solve_with_fallback(system, spec, options.solver);
  row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  row.iterations = solved.iterations;
  row.residual = solved.residual;
  row.direct_solve = solved.direct;
  say("  solve: " + std::to_string(row.iterations) + " iterations, residual " + std::to_string(row.residual) +
      (row.direct_solve ? " (direct)" : ""));

  res.exact = exact_field(problem, mesh);
  res.computed = std::move(solved.field);
  const ErrorNorms e = error_norms(res.computed, res.exact);
  row.L_inf = e.L_inf;
  row.L2 = e.L2;
  return res;
}

ConvergenceReport run_convergence(const std::string& case_name, const std::vector<int>& resolutions,
                                  const RunOptions& options, ResolutionResult* finest) {
  const CaseDefinition problem = make_case(case_name);
  ConvergenceReport report;
  report.case_name = problem.name();
  for (std::size_t i = 0; i < resolutions.size(); ++i) {
    const int n = resolutions[i];
    ResolutionResult res;
    try {
      res = run_resolution(problem, n, options);
    } catch (const Error& e) {
      std::throw_with_nested(RunError(case_name + " at n=" + std::to_string(n) + ": " + e.what()));
    }
    if (i > 0) {
      const auto& prev = report.rows.back();
      const double ratio = static_cast<double>(n) / prev.n;
      if (prev.L_inf > 0.0 && res.row.L_inf > 0.0) res.row.order_inf = observed_order(prev.L_inf, res.row.L_inf, ratio);
      if (prev.L2 > 0.0 && res.row.L2 > 0.0) res.row.order_L2 = observed_order(prev.L2, res.row.L2, ratio);
    }
    report.rows.push_back(res.row);
    if (finest && i + 1 == resolutions.size()) *finest = std::move(res);
  }
  return report;
}

void write_report_csv(const ConvergenceReport& report, std::ostream& out) {
  out << "case,n,L_inf,L2,order_inf,order_L2,iters,seconds\n";
  const auto opt = [](const std::optional<double>& v) {
    std::ostringstream os;
    if (v) os << std::setprecision(6) << *v;
    return os.str();
  };
  for (const auto& r : report.rows) {
    out << report.case_name << ',' << r.n << ',' << std::setprecision(10) << r.L_inf << ',' << r.L2 << ','
        << opt(r.order_inf) << ',' << opt(r.order_L2) << ',' << r.iterations << ',' << std::setprecision(6)
        << r.seconds << '\n';
  }
}

void write_report_csv(const ConvergenceReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  write_report_csv(report, out);
}

std::string format_report(const ConvergenceReport& report) {
  std::ostringstream os;
  os << report.case_name << '\n';
  os << std::left << std::setw(16) << "mesh" << std::setw(14) << "L_inf" << std::setw(8) << "order"
     << std::setw(14) << "L2" << std::setw(8) << "order" << std::setw(8) << "iters" << "seconds\n";
  for (const auto& r : report.rows) {
    std::string mesh = std::to_string(r.cells[0]);
    for (int a = 1; a < 3 && r.cells[a] > 1; ++a) mesh += "x" + std::to_string(r.cells[a]);
    const auto opt = [](const std::optional<double>& v) {
      std::ostringstream o;
      if (v) o << std::fixed << std::setprecision(2) << *v;
      return o.str();
    };
    std::ostringstream linf, l2, sec;
    linf << std::scientific << std::setprecision(4) << r.L_inf;
    l2 << std::scientific << std::setprecision(4) << r.L2;
    sec << std::fixed << std::setprecision(2) << r.seconds;
    os << std::setw(16) << mesh << std::setw(14) << linf.str() << std::setw(8) << opt(r.order_inf)
       << std::setw(14) << l2.str() << std::setw(8) << opt(r.order_L2) << std::setw(8) << r.iterations
       << sec.str() << '\n';
  }
  return os.str();
}

void write_slice_csv(const DiscreteField& computed, const DiscreteField& exact, int axis, double value,
                     const std::string& path) {
  const auto& spec = computed.spec;
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  int u = 0, v = 1;
  int plane = -1;
  if (spec.dim == 3) {
    if (axis < 0 || axis > 2) throw std::invalid_argument("write_slice_csv: axis must be 0, 1 or 2");
    u = axis == 0 ? 1 : 0;
    v = axis == 2 ? 1 : 2;
    const double k = (value - spec.lo[axis]) / spec.spacing(axis);
    plane = std::clamp(static_cast<int>(std::lround(k)), 0, spec.n[axis]);
  }
  out << axis_name(u) << ',' << axis_name(v) << ",error\n" << std::setprecision(12);
  for (NodeId node = 0; node < computed.size(); ++node) {
    if (plane >= 0 && spec.ijk(node)[axis] != plane) continue;
    const Point p = spec.position(node);
    out << p[u] << ',' << p[v] << ',' << (computed[node] - exact[node]) << '\n';
  }
}

}  // namespace mibfvm
