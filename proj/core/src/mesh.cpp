#include "mibfvm/mesh.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "mibfvm/errors.hpp"

namespace mibfvm {

void MeshSpec::validate() const {
  if (dim != 2 && dim != 3) throw InvalidMeshSpec("mesh dimension must be 2 or 3");
  for (int a = 0; a < dim; ++a) {
    if (!(hi[a] > lo[a])) {
      throw InvalidMeshSpec("mesh bounds must satisfy hi > lo on axis " + std::string(axis_name(a)));
    }
    if (n[a] < 4) {
      throw InvalidMeshSpec("mesh needs at least 4 cells on axis " + std::string(axis_name(a)));
    }
  }
}

double perturb_node_phi(double phi_value, double scale, double neighbor_sign) {
  const double floor = 1e-12 * scale;
  if (std::abs(phi_value) >= floor) return phi_value;
  if (phi_value > 0.0) return floor;
  if (phi_value < 0.0) return -floor;
  return neighbor_sign < 0.0 ? -floor : floor;
}

ClassifiedMesh::ClassifiedMesh(MeshSpec spec, std::vector<double> phi, std::vector<Side> sides,
                               std::vector<Intersection> intersections, int perturbed_nodes,
                               int hidden_crossings)
    : spec_(std::move(spec)),
      phi_(std::move(phi)),
      sides_(std::move(sides)),
      intersections_(std::move(intersections)),
      perturbed_nodes_(perturbed_nodes),
      hidden_crossings_(hidden_crossings) {
  const NodeId count = static_cast<NodeId>(sides_.size());
  for (int a = 0; a < 3; ++a) edge_lookup_[a].assign(a < spec_.dim ? count : 0, -1);
  for (int id = 0; id < static_cast<int>(intersections_.size()); ++id) {
    const auto& ix = intersections_[id];
    edge_lookup_[ix.axis][ix.lower] = id;
  }
  irregular_.assign(count, 0);
  for (NodeId node = 0; node < count; ++node) {
    for (int a = 0; a < spec_.dim && !irregular_[node]; ++a) {
      for (int dir : {-1, 1}) {
        if (auto nb = spec_.shifted(node, a, dir); nb && sides_[*nb] != sides_[node]) {
          irregular_[node] = 1;
          break;
        }
      }
    }
  }
}

std::size_t ClassifiedMesh::irregular_count() const {
  std::size_t c = 0;
  for (auto f : irregular_) c += f;
  return c;
}

namespace {

int count_sign_changes(const double* values, int count) {
  int changes = 0;
  int last = 0;
  for (int i = 0; i < count; ++i) {
    const int s = values[i] > 0.0 ? 1 : (values[i] < 0.0 ? -1 : 0);
    if (s == 0) continue;
    if (last != 0 && s != last) ++changes;
    last = s;
  }
  return changes;
}

std::string format_point(const Point& p, int dim) {
  std::ostringstream os;
  os << '(' << p[0] << ", " << p[1];
  if (dim == 3) os << ", " << p[2];
  os << ')';
  return os.str();
}

}  // namespace

ClassifiedMesh build_classified_mesh(const MeshSpec& spec, const LevelSetShape& shape, const MeshOptions& options) {
  spec.validate();
  if (spec.dim != shape.dim()) {
    throw InvalidMeshSpec("mesh dimension does not match the shape dimension");
  }
  const NodeId count = spec.node_count();
  std::vector<double> raw(count);
  for (NodeId node = 0; node < count; ++node) raw[node] = shape.phi(spec.position(node));

  const double floor = 1e-12 * shape.scale();
  std::vector<double> phi(raw);
  int perturbed = 0;
  for (NodeId node = 0; node < count; ++node) {
    if (std::abs(raw[node]) >= floor) continue;
    double neighbor_sign = 1.0;
    bool found = false;
    for (int a = 0; a < spec.dim && !found; ++a) {
      for (int dir : {-1, 1}) {
        if (auto nb = spec.shifted(node, a, dir); nb && std::abs(raw[*nb]) >= floor) {
          neighbor_sign = raw[*nb];
          found = true;
          break;
        }
      }
    }
    phi[node] = perturb_node_phi(raw[node], shape.scale(), neighbor_sign);
    ++perturbed;
  }

  std::vector<Side> sides(count);
  for (NodeId node = 0; node < count; ++node) sides[node] = LevelSetShape::side_of(phi[node]);

  constexpr int kInteriorSamples = 8;
  const auto lipschitz = shape.lipschitz();
  std::vector<Intersection> intersections;
  int hidden = 0;
  for (int a = 0; a < spec.dim; ++a) {
    const double h = spec.spacing(a);
    for (NodeId node = 0; node < count; ++node) {
      const auto upper = spec.shifted(node, a, 1);
      if (!upper) continue;
      const double phi0 = phi[node];
      const double phi1 = phi[*upper];
      const bool crosses = (phi0 < 0.0) != (phi1 < 0.0);
      const bool may_cross =
          crosses || !lipschitz || std::min(std::abs(phi0), std::abs(phi1)) <= *lipschitz * h;
      if (!may_cross) continue;

      const Point p0 = spec.position(node);
      const Point p1 = spec.position(*upper);
      double samples[kInteriorSamples + 2];
      samples[0] = phi0;
      for (int s = 1; s <= kInteriorSamples; ++s) {
        const double t = static_cast<double>(s) / (kInteriorSamples + 1);
        samples[s] = shape.phi(p0 + t * (p1 - p0));
      }
      samples[kInteriorSamples + 1] = phi1;
      if (count_sign_changes(samples, kInteriorSamples + 2) > 1) {
        if (!crosses && options.allow_hidden_crossings) {
          ++hidden;
          continue;
        }
        throw ResolutionTooCoarse("interface crosses the " + std::string(axis_name(a)) + "-edge at " +
                                  format_point(p0, spec.dim) +
                                  " more than once; refine the mesh");
      }
      if (!crosses) continue;

      Intersection ix;
      ix.axis = a;
      ix.lower = node;
      ix.upper = *upper;
      ix.node_plus_side = sides[node] == Side::Plus ? node : *upper;
      ix.node_minus_side = sides[node] == Side::Plus ? *upper : node;
      ix.point = locate_root(shape, p0, phi0, p1, phi1);
      ix.fraction = (ix.point[a] - p0[a]) / h;
      ix.frame = local_frame(shape, ix.point);
      intersections.push_back(ix);
    }
  }
  return ClassifiedMesh(spec, std::move(phi), std::move(sides), std::move(intersections), perturbed, hidden);
}

void write_mesh_csv(const ClassifiedMesh& mesh, const std::string& nodes_path,
                    const std::string& intersections_path) {
  const auto& spec = mesh.spec();
  {
    std::ofstream out(nodes_path);
    if (!out) throw Error("cannot open " + nodes_path + " for writing");
    out << std::setprecision(12) << "node,x,y,z,side,irregular\n";
    for (NodeId node = 0; node < mesh.node_count(); ++node) {
      const Point p = spec.position(node);
      out << node << ',' << p[0] << ',' << p[1] << ',' << p[2] << ',' << to_string(mesh.side(node)) << ','
          << (mesh.irregular(node) ? 1 : 0) << '\n';
    }
  }
  std::ofstream out(intersections_path);
  if (!out) throw Error("cannot open " + intersections_path + " for writing");
  out << std::setprecision(12) << "id,axis,x,y,z,nx,ny,nz\n";
  for (std::size_t id = 0; id < mesh.intersections().size(); ++id) {
    const auto& ix = mesh.intersections()[id];
    out << id << ',' << axis_name(ix.axis) << ',' << ix.point[0] << ',' << ix.point[1] << ',' << ix.point[2]
        << ',' << ix.frame.normal[0] << ',' << ix.frame.normal[1] << ',' << ix.frame.normal[2] << '\n';
  }
}

}  // namespace mibfvm
