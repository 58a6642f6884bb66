#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <set>

#include "mibfvm/mibfvm.hpp"
#include "studies.hpp"

using namespace mibfvm;

namespace {

MeshSpec unit_box(int dim, int n) {
  MeshSpec s;
  s.dim = dim;
  s.lo = {0.0, 0.0, 0.0};
  s.hi = {1.0, 1.0, dim == 3 ? 1.0 : 0.0};
  s.n = {n, n, dim == 3 ? n : 1};
  return s;
}

// Same data on both sides of an interface that never enters the box.
CaseDefinition flat_case(int dim, CaseDefinition::ScalarFn u, CaseDefinition::ScalarFn g, double beta) {
  CaseDefinition::SideData d;
  d.u = std::move(u);
  d.grad_u = [](const Point&) -> Point { return {0.0, 0.0, 0.0}; };
  d.beta = [beta](const Point&) { return beta; };
  d.g = std::move(g);
  return CaseDefinition("flat", "no interface", dim, {0.0, 0.0, 0.0}, {1.0, 1.0, dim == 3 ? 1.0 : 0.0},
                        study::empty_shape(dim), d, d);
}

struct Built {
  ClassifiedMesh mesh;
  LinearSystem system;
};

Built build(const CaseDefinition& problem, const MeshSpec& spec) {
  ClassifiedMesh mesh = build_classified_mesh(spec, problem.shape(), problem.mesh_options());
  FictitiousTable table = solve_fictitious_values(mesh, problem);
  disassociation_pass(mesh, table);
  LinearSystem sys = assemble(mesh, table, problem);
  return {std::move(mesh), std::move(sys)};
}

Eigen::VectorXd sample(const MeshSpec& spec, const std::function<double(const Point&)>& u) {
  Eigen::VectorXd v(spec.node_count());
  for (NodeId p = 0; p < spec.node_count(); ++p) v[p] = u(spec.position(p));
  return v;
}

}  // namespace

TEST(System, SevenPointRows) { EXPECT_LT(study::regular_row_deviation(3, 8), 1e-14); }

TEST(System, FivePointRows) { EXPECT_LT(study::regular_row_deviation(2, 8), 1e-14); }

TEST(System, SevenPointRowValues) {
  const auto problem = flat_case(3, [](const Point&) { return 0.0; }, [](const Point&) { return 0.0; }, 1.0);
  const MeshSpec spec = unit_box(3, 5);
  const auto b = build(problem, spec);
  const NodeId p = spec.index(2, 2, 2);
  const double h = spec.spacing(0);
  EXPECT_NEAR(b.system.matrix.coeff(p, p), 6.0 * h, 1e-15);
  EXPECT_NEAR(b.system.matrix.coeff(p, spec.index(2, 2, 3)), -h, 1e-15);
  EXPECT_NEAR(b.system.matrix.coeff(p, spec.index(1, 2, 2)), -h, 1e-15);
  EXPECT_EQ(b.system.matrix.row(p).nonZeros(), 7);
}

TEST(System, ExactOnQuadratics) {
  const auto u = [](const Point& x) { return 1.0 + x[0] + 2.0 * x[1] * x[1] - x[0] * x[2] + 0.5 * x[2] * x[2]; };
  const auto problem = flat_case(3, u, [](const Point&) { return -15.0; }, 3.0);
  const MeshSpec spec = unit_box(3, 7);
  const auto b = build(problem, spec);
  const Eigen::VectorXd r = b.system.matrix * sample(spec, u) - b.system.rhs;
  for (NodeId p = 0; p < spec.node_count(); ++p) {
    if (spec.is_boundary(p)) continue;
    EXPECT_NEAR(r[p], 0.0, 1e-13) << "node " << p;
  }
}

TEST(System, TruncationErrorIsSecondOrder) {
  const auto u = [](const Point& x) { return std::sin(2.0 * x[0] + x[1]) * std::exp(x[2]); };
  const auto g = [](const Point& x) { return 4.0 * std::sin(2.0 * x[0] + x[1]) * std::exp(x[2]); };
  const std::vector<int> ns{8, 16, 32};
  std::vector<double> errors;
  for (int n : ns) {
    const auto problem = flat_case(3, u, g, 1.0);
    const MeshSpec spec = unit_box(3, n);
    const auto b = build(problem, spec);
    const Eigen::VectorXd r = b.system.matrix * sample(spec, u) - b.system.rhs;
    double worst = 0.0;
    for (NodeId p = 0; p < spec.node_count(); ++p)
      if (!spec.is_boundary(p)) worst = std::max(worst, std::abs(r[p]) / spec.cell_volume());
    errors.push_back(worst);
  }
  for (std::size_t k = 1; k < ns.size(); ++k) EXPECT_GE(observed_order(errors[k - 1], errors[k]), 1.9);
}

TEST(System, SymmetricWithoutInterface) {
  const auto problem = flat_case(3, [](const Point&) { return 0.0; }, [](const Point&) { return 0.0; }, 2.5);
  const MeshSpec spec = unit_box(3, 8);
  const auto b = build(problem, spec);
  const auto& A = b.system.matrix;
  for (NodeId p = 0; p < spec.node_count(); ++p) {
    if (spec.is_boundary(p)) continue;
    for (LinearSystem::Matrix::InnerIterator it(A, p); it; ++it) {
      const auto q = static_cast<NodeId>(it.col());
      if (spec.is_boundary(q)) continue;
      EXPECT_NEAR(it.value(), A.coeff(q, p), 1e-12);
    }
  }
}

TEST(System, AsymmetryIsConfinedToTheInterface) {
  const auto problem = make_case("case3a");
  std::vector<int> ns{20, 40};
  std::vector<double> counts;
  for (int n : ns) {
    const MeshSpec spec = problem.mesh_spec(n);
    const auto b = build(problem, spec);
    const auto& A = b.system.matrix;
    int asymmetric = 0;
    for (NodeId p = 0; p < spec.node_count(); ++p) {
      if (spec.is_boundary(p)) continue;
      for (LinearSystem::Matrix::InnerIterator it(A, p); it; ++it) {
        const auto q = static_cast<NodeId>(it.col());
        if (spec.is_boundary(q) || q == p) continue;
        if (std::abs(it.value() - A.coeff(q, p)) <= 1e-12 * std::abs(it.value())) continue;
        ++asymmetric;
        EXPECT_TRUE(b.mesh.irregular(p) || b.mesh.irregular(q));
      }
    }
    counts.push_back(asymmetric);
  }
  const double slope = -study::fitted_order(ns, counts);
  EXPECT_GT(slope, 1.5);
  EXPECT_LT(slope, 2.5);
}

TEST(System, DirichletRowsAreIdentity) {
  const auto problem = flat_case(2, [](const Point&) { return 0.0; }, [](const Point&) { return 1.0; }, 1.0);
  const MeshSpec spec = unit_box(2, 6);
  auto b = build(problem, spec);
  apply_dirichlet(b.system, b.mesh, [](const Point&) { return 0.0; });
  for (NodeId p = 0; p < spec.node_count(); ++p) {
    if (!spec.is_boundary(p)) continue;
    EXPECT_EQ(b.system.rhs[p], 0.0);
    EXPECT_EQ(b.system.matrix.coeff(p, p), 1.0);
    double off = 0.0;
    for (LinearSystem::Matrix::InnerIterator it(b.system.matrix, p); it; ++it)
      if (it.col() != p) off += std::abs(it.value());
    EXPECT_EQ(off, 0.0);
  }
  // Interior rows keep their couplings to boundary nodes.
  EXPECT_NE(b.system.matrix.coeff(spec.index(1, 1), spec.index(0, 1)), 0.0);
}

TEST(System, SphereBoundaryDataComesFromTheOuterSolution) {
  const auto problem = make_case("case3a");
  const MeshSpec spec = problem.mesh_spec(20);
  auto b = build(problem, spec);
  apply_dirichlet(b.system, b.mesh, [&](const Point& x) { return problem.g_b(x); });
  for (NodeId p = 0; p < spec.node_count(); ++p) {
    if (!spec.is_boundary(p)) continue;
    const Point x = spec.position(p);
    EXPECT_NEAR(b.system.rhs[p], std::cos(x[0]) * std::cos(x[1]) * std::cos(x[2]), 1e-15);
  }
}

TEST(System, IdentitySolve) {
  LinearSystem sys;
  const int n = 50;
  sys.n_unknowns = n;
  sys.matrix.resize(n, n);
  sys.matrix.setIdentity();
  sys.rhs = Eigen::VectorXd::LinSpaced(n, -1.0, 2.0);
  MeshSpec spec;
  const auto r = solve(sys, spec, 1e-12, 0);
  for (int i = 0; i < n; ++i) EXPECT_NEAR(r.field.values[i], sys.rhs[i], 1e-12);
}

TEST(System, RecoversKnownSolution) {
  const auto problem = flat_case(3, [](const Point&) { return 0.0; }, [](const Point&) { return 0.0; }, 1.0);
  const MeshSpec spec = unit_box(3, 16);
  auto b = build(problem, spec);
  apply_dirichlet(b.system, b.mesh, [](const Point&) { return 0.0; });
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> val(-1.0, 1.0);
  Eigen::VectorXd u(spec.node_count());
  for (auto& v : u) v = val(rng);
  b.system.rhs = b.system.matrix * u;
  const auto r = solve(b.system, spec, 1e-10, 0);
  EXPECT_LE(r.residual, 1e-10);
  for (NodeId p = 0; p < spec.node_count(); ++p) EXPECT_NEAR(r.field.values[p], u[p], 1e-6);
}

TEST(System, NoConvergenceIsReported) {
  const auto problem = flat_case(3, [](const Point&) { return 0.0; }, [](const Point&) { return 1.0; }, 1.0);
  const MeshSpec spec = unit_box(3, 16);
  auto b = build(problem, spec);
  apply_dirichlet(b.system, b.mesh, [](const Point&) { return 0.0; });
  EXPECT_THROW(solve(b.system, spec, 1e-14, 2), NoConvergence);
  SolverOptions opts;
  opts.rel_tol = 1e-12;
  opts.max_iter = 2;
  const auto r = solve_with_fallback(b.system, spec, opts);
  EXPECT_TRUE(r.direct);
  EXPECT_LE(r.residual, 1e-12);
}

TEST(System, SphereSolveConverges) {
  const auto problem = make_case("case3a");
  const MeshSpec spec = problem.mesh_spec(20);
  auto b = build(problem, spec);
  apply_dirichlet(b.system, b.mesh, [&](const Point& x) { return problem.g_b(x); });
  const auto r = solve(b.system, spec, 1e-10, 0);
  EXPECT_LE(r.residual, 1e-10);
  EXPECT_GT(r.iterations, 0);
}

TEST(System, TripletExport) {
  const auto problem = flat_case(2, [](const Point&) { return 0.0; }, [](const Point&) { return 1.0; }, 1.0);
  const MeshSpec spec = unit_box(2, 4);
  auto b = build(problem, spec);
  apply_dirichlet(b.system, b.mesh, [](const Point&) { return 0.0; });
  const std::string mat = ::testing::TempDir() + "sys_matrix.txt";
  const std::string rhs = ::testing::TempDir() + "sys_rhs.txt";
  write_triplets(b.system, mat, rhs);
  std::ifstream in(mat);
  long rows = 0, cols = 0, nnz = 0;
  in >> rows >> cols >> nnz;
  EXPECT_EQ(rows, 25);
  EXPECT_EQ(cols, 25);
  EXPECT_EQ(nnz, b.system.matrix.nonZeros());
  long r = 0, c = 0, count = 0;
  double v = 0.0;
  std::set<std::pair<long, long>> seen;
  while (in >> r >> c >> v) {
    EXPECT_GE(r, 0);
    EXPECT_LT(r, rows);
    EXPECT_GE(c, 0);
    EXPECT_LT(c, cols);
    EXPECT_DOUBLE_EQ(v, b.system.matrix.coeff(r, c));
    seen.emplace(r, c);
    ++count;
  }
  EXPECT_EQ(count, nnz);
  EXPECT_EQ(static_cast<long>(seen.size()), nnz);
  std::ifstream rin(rhs);
  long i = 0, lines = 0;
  while (rin >> i >> v) {
    EXPECT_DOUBLE_EQ(v, b.system.rhs[i]);
    ++lines;
  }
  EXPECT_EQ(lines, 25);
  std::remove(mat.c_str());
  std::remove(rhs.c_str());
}
