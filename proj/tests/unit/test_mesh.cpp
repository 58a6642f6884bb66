#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include "mibfvm/mesh.hpp"
#include "studies.hpp"

using namespace mibfvm;

namespace {

MeshSpec cube(int n, double lo = -1.0, double hi = 1.0) {
  MeshSpec s;
  s.dim = 3;
  s.lo = {lo, lo, lo};
  s.hi = {hi, hi, hi};
  s.n = {n, n, n};
  return s;
}

LevelSetShape plane_x(double x0, int dim) {
  return LevelSetShape("plane", dim, [x0](const Point& x) { return x[0] - x0; },
                       [](const Point&) -> Point { return {1.0, 0.0, 0.0}; });
}

}  // namespace

TEST(Mesh, SpecValidation) {
  MeshSpec s = cube(4);
  EXPECT_NO_THROW(s.validate());
  s.n[1] = 3;
  EXPECT_THROW(s.validate(), InvalidMeshSpec);
  s = cube(8);
  s.hi[2] = s.lo[2];
  EXPECT_THROW(s.validate(), InvalidMeshSpec);
  s = cube(8);
  s.dim = 4;
  EXPECT_THROW(s.validate(), InvalidMeshSpec);
}

TEST(Mesh, IndexRoundTrip) {
  const MeshSpec s = cube(6);
  EXPECT_EQ(s.node_count(), 343);
  for (NodeId p = 0; p < s.node_count(); ++p) {
    const auto c = s.ijk(p);
    EXPECT_EQ(s.index(c[0], c[1], c[2]), p);
  }
  EXPECT_DOUBLE_EQ(s.spacing(0), 2.0 / 6.0);
  EXPECT_FALSE(s.shifted(s.index(6, 2, 2), 0, 1).has_value());
  EXPECT_EQ(*s.shifted(s.index(2, 2, 2), 2, 1), s.index(2, 2, 3));
}

TEST(Mesh, SphereInteriorIsMinusSide) {
  const ClassifiedMesh mesh = build_classified_mesh(cube(20), shapes::sphere(0.75));
  for (NodeId p = 0; p < mesh.node_count(); ++p) {
    const Point x = mesh.spec().position(p);
    if (dot(x, x) < 0.5625) EXPECT_EQ(mesh.side(p), Side::Minus);
    if (dot(x, x) > 0.5625) EXPECT_EQ(mesh.side(p), Side::Plus);
  }
}

TEST(Mesh, IrregularCountMatchesBruteForce) {
  const MeshSpec spec = cube(20);
  const auto shape = shapes::sphere(0.75);
  const ClassifiedMesh mesh = build_classified_mesh(spec, shape);
  std::size_t brute = 0;
  for (NodeId p = 0; p < spec.node_count(); ++p) {
    const Point x = spec.position(p);
    const bool inside = dot(x, x) < 0.5625;
    bool irregular = false;
    const auto c = spec.ijk(p);
    for (int a = 0; a < 3 && !irregular; ++a) {
      for (int d : {-1, 1}) {
        if (c[a] + d < 0 || c[a] + d > spec.n[a]) continue;
        Point y = x;
        y[a] += d * spec.spacing(a);
        if ((dot(y, y) < 0.5625) != inside) irregular = true;
      }
    }
    if (irregular) ++brute;
    EXPECT_EQ(mesh.irregular(p), irregular);
  }
  EXPECT_EQ(mesh.irregular_count(), brute);
  EXPECT_GT(brute, 0u);
}

TEST(Mesh, PlanarInterfaceIntersections) {
  MeshSpec s;
  s.dim = 2;
  s.lo = {0.0, 0.0, 0.0};
  s.hi = {1.0, 1.0, 0.0};
  s.n = {10, 10, 1};
  const ClassifiedMesh mesh = build_classified_mesh(s, plane_x(0.5001, 2));
  ASSERT_EQ(mesh.intersections().size(), 11u);
  for (const auto& x : mesh.intersections()) {
    EXPECT_EQ(x.axis, 0);
    EXPECT_EQ(s.ijk(x.lower)[0], 5);
    EXPECT_EQ(x.upper, x.lower + 1);
    EXPECT_NEAR(x.point[0], 0.5001, 1e-12);
    EXPECT_NEAR(x.fraction, 0.001, 1e-9);
    EXPECT_EQ(x.node_plus_side, x.lower);
    EXPECT_EQ(x.node_minus_side, x.upper);
    EXPECT_EQ(mesh.edge_intersection(x.lower, 0), &x - mesh.intersections().data());
    EXPECT_EQ(x.frame.point, x.point);
  }
}

TEST(Mesh, PerturbNodePhi) {
  EXPECT_EQ(perturb_node_phi(0.0, 1.0), 1e-12);
  EXPECT_EQ(perturb_node_phi(0.0, 1.0, -1.0), -1e-12);
  EXPECT_EQ(perturb_node_phi(0.3, 1.0), 0.3);
  EXPECT_EQ(perturb_node_phi(-5e-13, 1.0), -1e-12);
  EXPECT_EQ(perturb_node_phi(0.0, 4.0), 4e-12);
}

TEST(Mesh, NodeOnInterfaceIsPerturbed) {
  MeshSpec s;
  s.dim = 2;
  s.lo = {0.0, 0.0, 0.0};
  s.hi = {1.0, 1.0, 0.0};
  s.n = {10, 10, 1};
  const ClassifiedMesh mesh = build_classified_mesh(s, plane_x(0.5, 2));
  EXPECT_EQ(mesh.perturbed_nodes(), 11);
  EXPECT_EQ(mesh.intersections().size(), 11u);
  for (const auto& x : mesh.intersections()) {
    EXPECT_GT(x.point[0], 0.4 - 1e-12);
    EXPECT_LT(x.point[0], 0.6 + 1e-12);
  }
}

TEST(Mesh, SidesPartitionTheNodes) {
  const ClassifiedMesh mesh = build_classified_mesh(cube(16), shapes::sphere(0.75));
  int plus = 0, minus = 0;
  for (NodeId p = 0; p < mesh.node_count(); ++p) (mesh.side(p) == Side::Plus ? plus : minus)++;
  EXPECT_EQ(plus + minus, mesh.node_count());
  EXPECT_GT(plus, 0);
  EXPECT_GT(minus, 0);
}

TEST(Mesh, IntersectionsJoinOppositeSides) {
  const ClassifiedMesh mesh = build_classified_mesh(cube(20), shapes::sphere(0.75));
  for (const auto& x : mesh.intersections()) {
    EXPECT_NE(mesh.side(x.lower), mesh.side(x.upper));
    EXPECT_EQ(mesh.side(x.node_plus_side), Side::Plus);
    EXPECT_EQ(mesh.side(x.node_minus_side), Side::Minus);
    EXPECT_GT(x.fraction, 0.0);
    EXPECT_LT(x.fraction, 1.0);
    EXPECT_NEAR(std::sqrt(dot(x.point, x.point)), 0.75, 1e-12);
    EXPECT_TRUE(mesh.irregular(x.lower));
    EXPECT_TRUE(mesh.irregular(x.upper));
  }
}

TEST(Mesh, IrregularCountGrowsLikeSurface) {
  std::vector<int> ns{20, 40, 80};
  std::vector<double> counts;
  for (int n : ns) {
    counts.push_back(static_cast<double>(build_classified_mesh(cube(n), shapes::sphere(0.75)).irregular_count()));
  }
  const double slope = -study::fitted_order(ns, counts);
  EXPECT_GE(slope, 1.8);
  EXPECT_LE(slope, 2.2);
}

TEST(Mesh, DoubleCrossingIsTooCoarse) {
  // A thin slab between two mesh nodes: both endpoints share a sign.
  MeshSpec s;
  s.dim = 2;
  s.lo = {0.0, 0.0, 0.0};
  s.hi = {1.0, 1.0, 0.0};
  s.n = {4, 4, 1};
  const LevelSetShape slab("slab", 2, [](const Point& x) { return std::abs(x[0] - 0.375) - 0.05; });
  EXPECT_THROW(build_classified_mesh(s, slab), ResolutionTooCoarse);
  const ClassifiedMesh mesh = build_classified_mesh(s, slab, {.allow_hidden_crossings = true});
  EXPECT_EQ(mesh.hidden_crossings(), 5);
  EXPECT_TRUE(mesh.intersections().empty());
}

TEST(Mesh, CsvDump) {
  MeshSpec s;
  s.dim = 2;
  s.lo = {0.0, 0.0, 0.0};
  s.hi = {1.0, 1.0, 0.0};
  s.n = {10, 10, 1};
  const ClassifiedMesh mesh = build_classified_mesh(s, plane_x(0.5001, 2));
  const std::string nodes = ::testing::TempDir() + "mesh_nodes.csv";
  const std::string ixs = ::testing::TempDir() + "mesh_intersections.csv";
  write_mesh_csv(mesh, nodes, ixs);
  const auto lines = [](const std::string& path) {
    std::ifstream in(path);
    int n = 0;
    std::string line;
    while (std::getline(in, line)) ++n;
    return n;
  };
  EXPECT_EQ(lines(nodes), 1 + 121);
  EXPECT_EQ(lines(ixs), 1 + 11);
  std::remove(nodes.c_str());
  std::remove(ixs.c_str());
}
