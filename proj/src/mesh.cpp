#include "shapeopt/mesh.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <unordered_map>

namespace shapeopt {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTemplateRadius = 0.5;
constexpr double kSquareTol = 1e-12;

std::uint64_t next_mesh_id() {
  static std::atomic<std::uint64_t> counter{1};
  return counter.fetch_add(1);
}

std::uint64_t edge_key(int a, int b) {
  const auto lo = static_cast<std::uint64_t>(std::min(a, b));
  const auto hi = static_cast<std::uint64_t>(std::max(a, b));
  return (lo << 32) | hi;
}

bool is_outer(BoundaryTag tag) { return tag != BoundaryTag::interface; }

std::shared_ptr<const Topology> build_topology(std::size_t num_vertices,
                                               std::vector<std::array<int, 3>> triangles,
                                               std::vector<int> region,
                                               std::vector<BoundaryEdge> boundary_edges) {
  auto topo = std::make_shared<Topology>();
  topo->num_vertices = num_vertices;
  if (region.size() != triangles.size()) throw MeshError("region labels do not match triangle count");
  for (std::size_t e = 0; e < triangles.size(); ++e) {
    for (int v : triangles[e])
      if (v < 0 || static_cast<std::size_t>(v) >= num_vertices)
        throw MeshError("triangle references vertex out of range", static_cast<std::int64_t>(e));
    if (region[e] != 1 && region[e] != 2)
      throw MeshError("region label must be 1 or 2", static_cast<std::int64_t>(e));
  }

  std::unordered_map<std::uint64_t, std::vector<int>> edge_tris;
  edge_tris.reserve(triangles.size() * 2);
  for (std::size_t e = 0; e < triangles.size(); ++e)
    for (int k = 0; k < 3; ++k)
      edge_tris[edge_key(triangles[e][static_cast<std::size_t>(k)], triangles[e][static_cast<std::size_t>((k + 1) % 3)])]
          .push_back(static_cast<int>(e));

  std::unordered_map<std::uint64_t, BoundaryTag> tagged;
  for (const auto& be : boundary_edges) {
    const auto key = edge_key(be.a, be.b);
    const auto it = edge_tris.find(key);
    if (it == edge_tris.end()) throw MeshError("boundary edge is not a mesh edge");
    if (!tagged.emplace(key, be.tag).second) throw MeshError("boundary edge listed twice");
    if (is_outer(be.tag) && it->second.size() != 1)
      throw MeshError("outer boundary edge must belong to exactly one triangle");
  }
  for (const auto& [key, tris] : edge_tris) {
    if (tris.size() > 2) throw MeshError("non-manifold edge", tris[2]);
    if (tris.size() == 1 && !tagged.contains(key))
      throw MeshError("untagged boundary edge", tris[0]);
    if (tris.size() == 2 && region[static_cast<std::size_t>(tris[0])] != region[static_cast<std::size_t>(tris[1])] &&
        !tagged.contains(key))
      throw MeshError("region change across an edge not tagged as interface", tris[0]);
  }

  // Orient interface edges so that the region-2 triangle lies on their left.
  std::unordered_map<int, int> next;
  std::unordered_map<std::uint64_t, std::array<int, 2>> iface_tris;
  int first = -1;
  for (const auto& be : boundary_edges) {
    if (be.tag != BoundaryTag::interface) continue;
    const auto& tris = edge_tris[edge_key(be.a, be.b)];
    if (tris.size() != 2) throw MeshError("interface edge must be shared by two triangles");
    int t1 = tris[0], t2 = tris[1];
    if (region[static_cast<std::size_t>(t1)] == 2) std::swap(t1, t2);
    if (region[static_cast<std::size_t>(t1)] != 1 || region[static_cast<std::size_t>(t2)] != 2)
      throw MeshError("interface edge must separate region 1 from region 2", t1);
    const auto& tri = triangles[static_cast<std::size_t>(t2)];
    int a = be.a, b = be.b;
    for (int k = 0; k < 3; ++k) {
      if (tri[static_cast<std::size_t>(k)] == b && tri[static_cast<std::size_t>((k + 1) % 3)] == a) {
        std::swap(a, b);
        break;
      }
    }
    if (!next.emplace(a, b).second) throw MeshError("interface is not a simple closed loop");
    iface_tris[edge_key(a, b)] = {t1, t2};
    if (first < 0) first = a;
  }
  if (first < 0) throw MeshError("mesh has no interface");
  std::vector<int> loop;
  int v = first;
  do {
    loop.push_back(v);
    const auto it = next.find(v);
    if (it == next.end() || loop.size() > next.size()) throw MeshError("interface is not a closed loop");
    v = it->second;
  } while (v != first);
  if (loop.size() != next.size()) throw MeshError("interface consists of more than one loop");

  topo->incidence = Incidence::build(num_vertices, triangles);
  topo->on_outer.assign(num_vertices, 0);
  topo->on_top.assign(num_vertices, 0);
  for (const auto& be : boundary_edges) {
    if (!is_outer(be.tag)) continue;
    topo->on_outer[static_cast<std::size_t>(be.a)] = topo->on_outer[static_cast<std::size_t>(be.b)] = 1;
    if (be.tag == BoundaryTag::top) topo->on_top[static_cast<std::size_t>(be.a)] = topo->on_top[static_cast<std::size_t>(be.b)] = 1;
  }
  topo->interface_pos.assign(num_vertices, -1);
  for (std::size_t i = 0; i < loop.size(); ++i) {
    auto& pos = topo->interface_pos[static_cast<std::size_t>(loop[i])];
    if (pos >= 0) throw MeshError("interface loop visits a vertex twice");
    if (topo->on_outer[static_cast<std::size_t>(loop[i])]) throw MeshError("interface touches the outer boundary");
    pos = static_cast<int>(i);
  }
  topo->interface_edge_triangles.resize(loop.size());
  for (std::size_t i = 0; i < loop.size(); ++i)
    topo->interface_edge_triangles[i] = iface_tris.at(edge_key(loop[i], loop[(i + 1) % loop.size()]));

  std::vector<char> touches(triangles.size(), 0);
  for (std::size_t e = 0; e < triangles.size(); ++e)
    for (int w : triangles[e])
      if (topo->interface_pos[static_cast<std::size_t>(w)] >= 0) touches[e] = 1;
  topo->near_interface.assign(num_vertices, 0);
  for (std::size_t w = 0; w < num_vertices; ++w)
    for (int e : topo->incidence.of(w))
      if (touches[static_cast<std::size_t>(e)]) topo->near_interface[w] = 1;

  topo->triangles = std::move(triangles);
  topo->region = std::move(region);
  topo->boundary_edges = std::move(boundary_edges);
  topo->interface_loop = std::move(loop);
  return topo;
}

void check_orientation(const TriMesh& mesh) {
  for (std::size_t e = 0; e < mesh.num_triangles(); ++e)
    if (!(mesh.signed_area(e) > 0.0))
      throw MeshError("inverted or degenerate element " + std::to_string(e), static_cast<std::int64_t>(e));
}

double square_exit_radius(double theta) {
  return 1.0 / std::max(std::abs(std::cos(theta)), std::abs(std::sin(theta)));
}

Vec2 square_point(double theta) {
  const double c = std::cos(theta), s = std::sin(theta);
  const double m = std::max(std::abs(c), std::abs(s));
  Vec2 q{c / m, s / m};
  auto snap = [](double& x) {
    if (std::abs(std::abs(x) - 1.0) < 1e-9) x = std::copysign(1.0, x);
  };
  snap(q.x);
  snap(q.y);
  return q;
}

struct TemplateSize {
  int interface_count;
  int inner_rings;
  int outer_rings;
};

TemplateSize template_size(double h) {
  TemplateSize s{};
  const double circumference = 2.0 * kPi * kTemplateRadius;
  s.interface_count = 8 * std::max(1, static_cast<int>(std::lround(circumference / h / 8.0)));
  s.inner_rings = std::max(1, static_cast<int>(std::lround(kTemplateRadius / h)));
  s.outer_rings = std::max(2, static_cast<int>(std::lround(0.55 / h)));
  return s;
}

int ring_count(const TemplateSize& s, int ring) {
  if (ring == s.inner_rings) return s.interface_count;
  const int c = static_cast<int>(std::lround(static_cast<double>(s.interface_count) * ring / s.inner_rings));
  return std::max(6, c + (c % 2));
}

std::size_t template_cells(double h) {
  const auto s = template_size(h);
  std::size_t cells = static_cast<std::size_t>(ring_count(s, 1));
  for (int i = 2; i <= s.inner_rings; ++i)
    cells += static_cast<std::size_t>(ring_count(s, i - 1) + ring_count(s, i));
  return cells + 2u * static_cast<std::size_t>(s.interface_count) * static_cast<std::size_t>(s.outer_rings);
}

struct RawMesh {
  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<int> region;
  std::vector<BoundaryEdge> edges;
  std::vector<int> interface_ring;

  void add_triangle(int a, int b, int c, int label) {
    const Vec2 &pa = vertices[static_cast<std::size_t>(a)], &pb = vertices[static_cast<std::size_t>(b)],
               &pc = vertices[static_cast<std::size_t>(c)];
    if (cross(pb - pa, pc - pa) < 0.0) std::swap(b, c);
    triangles.push_back({a, b, c});
    region.push_back(label);
  }
};

RawMesh build_template(double h) {
  const auto size = template_size(h);
  RawMesh m;
  m.vertices.push_back({0.0, 0.0});

  // Interior: concentric rings, neighbouring rings zipped together by angle.
  std::vector<int> prev_ring{0};
  double prev_offset = 0.0;
  for (int i = 1; i <= size.inner_rings; ++i) {
    const int count = ring_count(size, i);
    const double radius = kTemplateRadius * i / size.inner_rings;
    const double spacing = 2.0 * kPi / count;
    const double offset = (i == size.inner_rings || i % 2 == 0) ? 0.0 : 0.5 * spacing;
    std::vector<int> ring;
    for (int k = 0; k < count; ++k) {
      const double t = offset + spacing * k;
      ring.push_back(static_cast<int>(m.vertices.size()));
      m.vertices.push_back(i == size.inner_rings ? Vec2{kTemplateRadius * std::cos(2.0 * kPi * k / count),
                                                        kTemplateRadius * std::sin(2.0 * kPi * k / count)}
                                                 : Vec2{radius * std::cos(t), radius * std::sin(t)});
    }
    if (i == 1) {
      for (int k = 0; k < count; ++k) m.add_triangle(0, ring[static_cast<std::size_t>(k)], ring[static_cast<std::size_t>((k + 1) % count)], 2);
    } else {
      const int na = static_cast<int>(prev_ring.size()), nb = count;
      const double sa = 2.0 * kPi / na;
      int a = 0, b = 0;
      while (a < na || b < nb) {
        const double next_a = prev_offset + sa * (a + 1);
        const double next_b = offset + spacing * (b + 1);
        const bool advance_a = b == nb || (a < na && next_a <= next_b);
        const int va = prev_ring[static_cast<std::size_t>(a % na)];
        const int vb = ring[static_cast<std::size_t>(b % nb)];
        if (advance_a) {
          m.add_triangle(va, prev_ring[static_cast<std::size_t>((a + 1) % na)], vb, 2);
          ++a;
        } else {
          m.add_triangle(va, ring[static_cast<std::size_t>((b + 1) % nb)], vb, 2);
          ++b;
        }
      }
    }
    prev_ring = std::move(ring);
    prev_offset = offset;
  }
  m.interface_ring = prev_ring;
  const int n = size.interface_count;
  for (int k = 0; k < n; ++k)
    m.edges.push_back({m.interface_ring[static_cast<std::size_t>(k)], m.interface_ring[static_cast<std::size_t>((k + 1) % n)],
                       BoundaryTag::interface});

  // Exterior: rings blending the circle into the square along fixed rays.
  std::vector<int> inner = m.interface_ring;
  for (int j = 1; j <= size.outer_rings; ++j) {
    const double s = static_cast<double>(j) / size.outer_rings;
    std::vector<int> ring;
    for (int k = 0; k < n; ++k) {
      const double t = 2.0 * kPi * k / n;
      const Vec2 q = square_point(t);
      const Vec2 c{kTemplateRadius * std::cos(t), kTemplateRadius * std::sin(t)};
      ring.push_back(static_cast<int>(m.vertices.size()));
      m.vertices.push_back(j == size.outer_rings ? q : (1.0 - s) * c + s * q);
    }
    for (int k = 0; k < n; ++k) {
      const int a0 = inner[static_cast<std::size_t>(k)], a1 = inner[static_cast<std::size_t>((k + 1) % n)];
      const int b0 = ring[static_cast<std::size_t>(k)], b1 = ring[static_cast<std::size_t>((k + 1) % n)];
      const double d1 = norm(m.vertices[static_cast<std::size_t>(b1)] - m.vertices[static_cast<std::size_t>(a0)]);
      const double d2 = norm(m.vertices[static_cast<std::size_t>(b0)] - m.vertices[static_cast<std::size_t>(a1)]);
      if (d1 <= d2) {
        m.add_triangle(a0, a1, b1, 1);
        m.add_triangle(a0, b1, b0, 1);
      } else {
        m.add_triangle(a0, a1, b0, 1);
        m.add_triangle(a1, b1, b0, 1);
      }
    }
    inner = std::move(ring);
  }
  for (int k = 0; k < n; ++k) {
    const int a = inner[static_cast<std::size_t>(k)], b = inner[static_cast<std::size_t>((k + 1) % n)];
    const Vec2 pa = m.vertices[static_cast<std::size_t>(a)], pb = m.vertices[static_cast<std::size_t>(b)];
    BoundaryTag tag;
    if (pa.y == 1.0 && pb.y == 1.0) tag = BoundaryTag::top;
    else if (pa.y == -1.0 && pb.y == -1.0) tag = BoundaryTag::bottom;
    else if (pa.x == -1.0 && pb.x == -1.0) tag = BoundaryTag::left;
    else if (pa.x == 1.0 && pb.x == 1.0) tag = BoundaryTag::right;
    else throw MeshError("template boundary edge off the square");
    m.edges.push_back({a, b, tag});
  }
  return m;
}

}  // namespace

std::string_view to_string(BoundaryTag tag) {
  switch (tag) {
    case BoundaryTag::top: return "top";
    case BoundaryTag::bottom: return "bottom";
    case BoundaryTag::left: return "left";
    case BoundaryTag::right: return "right";
    case BoundaryTag::interface: return "interface";
  }
  return "unknown";
}

BoundaryTag parse_boundary_tag(std::string_view name) {
  for (auto tag : {BoundaryTag::top, BoundaryTag::bottom, BoundaryTag::left, BoundaryTag::right, BoundaryTag::interface})
    if (to_string(tag) == name) return tag;
  throw MeshError("unknown boundary tag '" + std::string(name) + "'");
}

TriMesh::TriMesh(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> triangles, std::vector<int> region,
                 std::vector<BoundaryEdge> boundary_edges)
    : topology_(build_topology(vertices.size(), std::move(triangles), std::move(region), std::move(boundary_edges))),
      vertices_(std::move(vertices)),
      id_(next_mesh_id()) {
  check_orientation(*this);
  for (const auto& be : topology_->boundary_edges) {
    if (be.tag == BoundaryTag::interface) continue;
    for (int v : {be.a, be.b}) {
      const Vec2 p = vertices_[static_cast<std::size_t>(v)];
      const bool ok = (be.tag == BoundaryTag::top && std::abs(p.y - 1.0) < kSquareTol) ||
                      (be.tag == BoundaryTag::bottom && std::abs(p.y + 1.0) < kSquareTol) ||
                      (be.tag == BoundaryTag::left && std::abs(p.x + 1.0) < kSquareTol) ||
                      (be.tag == BoundaryTag::right && std::abs(p.x - 1.0) < kSquareTol);
      if (!ok) throw MeshError("boundary edge tagged '" + std::string(to_string(be.tag)) + "' is off the square");
    }
  }
}

TriMesh::TriMesh(std::shared_ptr<const Topology> topology, std::vector<Vec2> vertices)
    : topology_(std::move(topology)), vertices_(std::move(vertices)), id_(next_mesh_id()) {
  if (vertices_.size() != topology_->num_vertices) throw MismatchError("vertex count does not match topology");
  check_orientation(*this);
}

double TriMesh::signed_area(std::size_t e) const {
  const auto& t = triangle(e);
  const Vec2 a = vertex(static_cast<std::size_t>(t[0]));
  return 0.5 * cross(vertex(static_cast<std::size_t>(t[1])) - a, vertex(static_cast<std::size_t>(t[2])) - a);
}

std::array<Vec2, 3> TriMesh::gradients(std::size_t e) const {
  const auto& t = triangle(e);
  const Vec2 p0 = vertex(static_cast<std::size_t>(t[0]));
  const Vec2 p1 = vertex(static_cast<std::size_t>(t[1]));
  const Vec2 p2 = vertex(static_cast<std::size_t>(t[2]));
  const double two_area = cross(p1 - p0, p2 - p0);
  return {Vec2{p1.y - p2.y, p2.x - p1.x} * (1.0 / two_area), Vec2{p2.y - p0.y, p0.x - p2.x} * (1.0 / two_area),
          Vec2{p0.y - p1.y, p1.x - p0.x} * (1.0 / two_area)};
}

Vec2 TriMesh::centroid(std::size_t e) const {
  const auto& t = triangle(e);
  return (1.0 / 3.0) * (vertex(static_cast<std::size_t>(t[0])) + vertex(static_cast<std::size_t>(t[1])) +
                        vertex(static_cast<std::size_t>(t[2])));
}

RadialProfile circle_profile(double radius) {
  return [radius](double) { return radius; };
}

RadialProfile ellipse_profile(double a, double b) {
  return [a, b](double t) { return a * b / std::hypot(b * std::cos(t), a * std::sin(t)); };
}

double edge_length_for_cells(std::size_t cells) {
  double lo = 1e-3, hi = 1.0;  // template_cells is non-increasing in h
  for (int it = 0; it < 60; ++it) {
    const double mid = std::sqrt(lo * hi);
    if (template_cells(mid) > cells) lo = mid;
    else hi = mid;
  }
  const auto below = template_cells(hi), above = template_cells(lo);
  const auto diff = [cells](std::size_t c) { return c > cells ? c - cells : cells - c; };
  return diff(below) <= diff(above) ? hi : lo;
}

TriMesh generate_interface_mesh(const RadialProfile& profile, double target_edge_length) {
  if (!(target_edge_length > 0.0)) throw MeshError("target edge length must be positive");
  RawMesh raw = build_template(target_edge_length);

  const int n = static_cast<int>(raw.interface_ring.size());
  for (int k = 0; k < 8 * n; ++k) {
    const double t = 2.0 * kPi * k / (8.0 * n);
    const double r = profile(t);
    if (!(r > 0.0) || !(r < 1.0) || !(r < square_exit_radius(t)))
      throw MeshError("radial profile leaves (0, 1) or the unit square at angle " + std::to_string(t));
  }

  std::vector<char> boundary(raw.vertices.size(), 0);
  for (const auto& be : raw.edges)
    if (be.tag != BoundaryTag::interface) boundary[static_cast<std::size_t>(be.a)] = boundary[static_cast<std::size_t>(be.b)] = 1;
  std::vector<int> ring_pos(raw.vertices.size(), -1);
  for (int k = 0; k < n; ++k) ring_pos[static_cast<std::size_t>(raw.interface_ring[static_cast<std::size_t>(k)])] = k;

  for (std::size_t v = 0; v < raw.vertices.size(); ++v) {
    if (boundary[v]) continue;
    Vec2& p = raw.vertices[v];
    if (ring_pos[v] >= 0) {
      const double t = 2.0 * kPi * ring_pos[v] / n;
      const double r = profile(t);
      p = {r * std::cos(t), r * std::sin(t)};
      continue;
    }
    const double rho = norm(p);
    if (rho == 0.0) continue;
    const double t = std::atan2(p.y, p.x);
    const double r = profile(t);
    double mapped;
    if (rho <= kTemplateRadius) {
      mapped = rho * r / kTemplateRadius;
    } else {
      const double big = square_exit_radius(t);
      mapped = r + (rho - kTemplateRadius) * (big - r) / (big - kTemplateRadius);
    }
    p *= mapped / rho;
  }

  // Report the worst element before handing over to the validating constructor.
  std::size_t worst = 0;
  double worst_area = std::numeric_limits<double>::infinity();
  for (std::size_t e = 0; e < raw.triangles.size(); ++e) {
    const auto& t = raw.triangles[e];
    const Vec2 a = raw.vertices[static_cast<std::size_t>(t[0])];
    const double area = 0.5 * cross(raw.vertices[static_cast<std::size_t>(t[1])] - a, raw.vertices[static_cast<std::size_t>(t[2])] - a);
    if (area < worst_area) {
      worst_area = area;
      worst = e;
    }
  }
  if (!(worst_area > 0.0))
    throw MeshError("radial morph inverts element " + std::to_string(worst) + " (signed area " +
                        std::to_string(worst_area) + ")",
                    static_cast<std::int64_t>(worst));

  return TriMesh(std::move(raw.vertices), std::move(raw.triangles), std::move(raw.region), std::move(raw.edges));
}

TriMesh apply_deformation(const TriMesh& mesh, const DeformField& u, double scale) {
  if (u.mesh_id != mesh.id()) throw MismatchError("deformation field lives on another mesh");
  if (u.num_vertices() != mesh.num_vertices()) throw MismatchError("deformation field has the wrong size");
  std::vector<Vec2> moved(mesh.vertices().begin(), mesh.vertices().end());
  for (std::size_t i = 0; i < moved.size(); ++i) moved[i] += scale * u.at(i);
  return TriMesh(mesh.shared_topology(), std::move(moved));
}

std::vector<InterfaceVertexGeometry> interface_geometry(const TriMesh& mesh) {
  const auto loop = mesh.interface_loop();
  const std::size_t n = loop.size();
  std::vector<InterfaceVertexGeometry> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 prev = mesh.vertex(static_cast<std::size_t>(loop[(i + n - 1) % n]));
    const Vec2 here = mesh.vertex(static_cast<std::size_t>(loop[i]));
    const Vec2 next = mesh.vertex(static_cast<std::size_t>(loop[(i + 1) % n]));
    const double l0 = norm(here - prev), l1 = norm(next - here);
    if (!(l0 > 0.0) || !(l1 > 0.0)) throw MeshError("zero-length interface edge at loop position " + std::to_string(i));
    const Vec2 t0 = (1.0 / l0) * (here - prev), t1 = (1.0 / l1) * (next - here);
    const Vec2 bisector = Vec2{t0.y, -t0.x} + Vec2{t1.y, -t1.x};
    const double turning = std::atan2(cross(t0, t1), dot(t0, t1));
    out[i].normal = (1.0 / norm(bisector)) * bisector;
    out[i].arc_length = 0.5 * (l0 + l1);
    out[i].curvature = turning / out[i].arc_length;
  }
  return out;
}

double interface_perimeter(const TriMesh& mesh) {
  const auto loop = mesh.interface_loop();
  double sum = 0.0;
  for (std::size_t i = 0; i < loop.size(); ++i)
    sum += norm(mesh.vertex(static_cast<std::size_t>(loop[(i + 1) % loop.size()])) - mesh.vertex(static_cast<std::size_t>(loop[i])));
  return sum;
}

double element_quality(const TriMesh& mesh, std::size_t e) {
  const auto& t = mesh.triangle(e);
  const Vec2 a = mesh.vertex(static_cast<std::size_t>(t[0]));
  const Vec2 b = mesh.vertex(static_cast<std::size_t>(t[1]));
  const Vec2 c = mesh.vertex(static_cast<std::size_t>(t[2]));
  const double sq = dot(b - a, b - a) + dot(c - b, c - b) + dot(a - c, a - c);
  return 4.0 * std::sqrt(3.0) * mesh.signed_area(e) / sq;
}

double min_quality(const TriMesh& mesh) {
  double q = std::numeric_limits<double>::infinity();
  for (std::size_t e = 0; e < mesh.num_triangles(); ++e) q = std::min(q, element_quality(mesh, e));
  return q;
}

bool inside_interface(const TriMesh& mesh, Vec2 p) {
  const auto loop = mesh.interface_loop();
  bool inside = false;
  for (std::size_t i = 0, j = loop.size() - 1; i < loop.size(); j = i++) {
    const Vec2 a = mesh.vertex(static_cast<std::size_t>(loop[i]));
    const Vec2 b = mesh.vertex(static_cast<std::size_t>(loop[j]));
    if ((a.y > p.y) != (b.y > p.y) && p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x) inside = !inside;
  }
  return inside;
}

void validate(const TriMesh& mesh) {
  check_orientation(mesh);
  const auto loop = mesh.interface_loop();
  const std::size_t n = loop.size();
  if (n < 3) throw MeshError("interface loop has fewer than three vertices");
  // Simplicity: non-adjacent interface edges must not intersect.
  auto seg = [&](std::size_t i) {
    return std::pair{mesh.vertex(static_cast<std::size_t>(loop[i])), mesh.vertex(static_cast<std::size_t>(loop[(i + 1) % n]))};
  };
  for (std::size_t i = 0; i < n; ++i) {
    const auto [a, b] = seg(i);
    for (std::size_t j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;
      const auto [c, d] = seg(j);
      const double d1 = cross(b - a, c - a), d2 = cross(b - a, d - a);
      const double d3 = cross(d - c, a - c), d4 = cross(d - c, b - c);
      if (((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0)))
        throw MeshError("interface self-intersects between edges " + std::to_string(i) + " and " + std::to_string(j));
    }
  }
  double twice_area = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto [a, b] = seg(i);
    twice_area += cross(a, b);
  }
  if (!(twice_area > 0.0)) throw MeshError("interface loop is not counter-clockwise");
}

}  // namespace shapeopt
