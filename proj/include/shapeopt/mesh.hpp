#pragma once

// Interface-conforming triangulations of the square (-1,1)^2 split into an
// exterior region (label 1) and a star-shaped interior region (label 2).
//
// Orientation conventions used everywhere downstream:
//  * triangles are counter-clockwise (positive signed area);
//  * the interface loop runs counter-clockwise around region 2, so the
//    outward normal of region 2 on edge (a, b) is the edge tangent rotated
//    clockwise by 90 degrees.

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "shapeopt/kernels.hpp"
#include "shapeopt/types.hpp"

namespace shapeopt {

enum class BoundaryTag { top, bottom, left, right, interface };

std::string_view to_string(BoundaryTag tag);
BoundaryTag parse_boundary_tag(std::string_view name);

struct BoundaryEdge {
  int a = 0;
  int b = 0;
  BoundaryTag tag = BoundaryTag::interface;
};

/// Connectivity and everything derived from it. Shared (immutable) by every
/// mesh produced from the same one through deformation.
struct Topology {
  std::size_t num_vertices = 0;
  std::vector<std::array<int, 3>> triangles;
  std::vector<int> region;
  std::vector<BoundaryEdge> boundary_edges;
  /// Counter-clockwise cyclic vertex list of the interface.
  std::vector<int> interface_loop;

  Incidence incidence;
  std::vector<char> on_outer;      // vertex lies on the square boundary
  std::vector<char> on_top;        // vertex lies on the top edge (Dirichlet for the heat problem)
  std::vector<int> interface_pos;  // position in interface_loop, -1 otherwise
  /// Element patch of the vertex touches the interface.
  std::vector<char> near_interface;
  /// For loop edge i = (loop[i], loop[i+1]): adjacent {region-1, region-2} triangle.
  std::vector<std::array<int, 2>> interface_edge_triangles;
};

class TriMesh {
 public:
  /// Builds the topology from raw arrays and validates every invariant.
  TriMesh(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> triangles,
          std::vector<int> region, std::vector<BoundaryEdge> boundary_edges);
  /// Same connectivity, new coordinates. Throws MeshError on an inverted element.
  TriMesh(std::shared_ptr<const Topology> topology, std::vector<Vec2> vertices);

  std::uint64_t id() const { return id_; }
  const Topology& topology() const { return *topology_; }
  const std::shared_ptr<const Topology>& shared_topology() const { return topology_; }
  bool same_connectivity(const TriMesh& other) const { return topology_ == other.topology_; }

  std::size_t num_vertices() const { return vertices_.size(); }
  std::size_t num_triangles() const { return topology_->triangles.size(); }
  std::span<const Vec2> vertices() const { return vertices_; }
  const Vec2& vertex(std::size_t i) const { return vertices_[i]; }
  std::span<const std::array<int, 3>> triangles() const { return topology_->triangles; }
  const std::array<int, 3>& triangle(std::size_t e) const { return topology_->triangles[e]; }
  int region(std::size_t e) const { return topology_->region[e]; }
  std::span<const BoundaryEdge> boundary_edges() const { return topology_->boundary_edges; }
  std::span<const int> interface_loop() const { return topology_->interface_loop; }

  double signed_area(std::size_t e) const;
  /// Gradients of the three barycentric (hat) functions on element e.
  std::array<Vec2, 3> gradients(std::size_t e) const;
  Vec2 centroid(std::size_t e) const;

 private:
  std::shared_ptr<const Topology> topology_;
  std::vector<Vec2> vertices_;
  std::uint64_t id_;
};

/// Nodal 2-vector field, interleaved (x0, y0, x1, y1, ...).
struct DeformField {
  std::vector<double> values;
  std::uint64_t mesh_id = 0;

  static DeformField zeros(const TriMesh& mesh) { return {std::vector<double>(2 * mesh.num_vertices(), 0.0), mesh.id()}; }
  Vec2 at(std::size_t i) const { return {values[2 * i], values[2 * i + 1]}; }
  void set(std::size_t i, Vec2 v) { values[2 * i] = v.x; values[2 * i + 1] = v.y; }
  std::size_t num_vertices() const { return values.size() / 2; }
};

/// Periodic radius function theta -> r(theta) of a star-shaped interface.
using RadialProfile = std::function<double(double)>;

RadialProfile circle_profile(double radius);
/// Polar form of the axis-aligned ellipse with semi-axes a (x) and b (y).
RadialProfile ellipse_profile(double a, double b);

/// Square mesh whose interface polyline interpolates (r cos t, r sin t).
/// A template with a circular interface of radius 0.5 is built and then
/// radially morphed. Throws MeshError if the profile leaves the square or
/// the morph inverts an element.
TriMesh generate_interface_mesh(const RadialProfile& profile, double target_edge_length);

/// Edge length for which generate_interface_mesh yields about `cells` triangles.
double edge_length_for_cells(std::size_t cells);

/// x <- x + scale * U(x). Throws MeshError (with the element index) and
/// leaves the input untouched if any element would be inverted.
TriMesh apply_deformation(const TriMesh& mesh, const DeformField& u, double scale);

struct InterfaceVertexGeometry {
  Vec2 normal;        // outward unit normal of region 2
  double arc_length;  // half the sum of the two adjacent edge lengths
  double curvature;   // turning angle / arc length, positive on a ccw circle
};

/// One record per interface_loop entry, in loop order.
std::vector<InterfaceVertexGeometry> interface_geometry(const TriMesh& mesh);

/// Sum of interface edge lengths.
double interface_perimeter(const TriMesh& mesh);

/// 4*sqrt(3)*area / (sum of squared edge lengths); 1 for equilateral.
double element_quality(const TriMesh& mesh, std::size_t e);
double min_quality(const TriMesh& mesh);

/// Point-in-polygon test against the interface polyline.
bool inside_interface(const TriMesh& mesh, Vec2 p);

/// Re-checks every structural invariant; throws MeshError.
void validate(const TriMesh& mesh);

}  // namespace shapeopt
