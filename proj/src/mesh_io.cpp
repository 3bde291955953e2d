#include "shapeopt/mesh_io.hpp"

#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace shapeopt {

namespace {

template <typename T>
T read_value(std::istream& in, const char* what) {
  T value{};
  if (!(in >> value)) throw Error(std::string("trimesh2: failed to read ") + what);
  return value;
}

void check_stream(const std::ostream& out, const std::filesystem::path& path) {
  if (!out) throw Error("failed to write " + path.string());
}

}  // namespace

void write_trimesh(std::ostream& out, const TriMesh& mesh) {
  const auto old_precision = out.precision(std::numeric_limits<double>::max_digits10);
  out << "trimesh2 " << mesh.num_vertices() << ' ' << mesh.num_triangles() << ' ' << mesh.boundary_edges().size()
      << '\n';
  for (const auto& v : mesh.vertices()) out << v.x << ' ' << v.y << '\n';
  for (std::size_t e = 0; e < mesh.num_triangles(); ++e) {
    const auto& t = mesh.triangle(e);
    out << t[0] << ' ' << t[1] << ' ' << t[2] << ' ' << mesh.region(e) << '\n';
  }
  // Interface edges in loop order keep the loop start stable across a round trip.
  const auto loop = mesh.interface_loop();
  for (std::size_t i = 0; i < loop.size(); ++i) out << loop[i] << ' ' << loop[(i + 1) % loop.size()] << " interface\n";
  for (const auto& be : mesh.boundary_edges())
    if (be.tag != BoundaryTag::interface) out << be.a << ' ' << be.b << ' ' << to_string(be.tag) << '\n';
  out.precision(old_precision);
}

TriMesh read_trimesh(std::istream& in) {
  std::string magic;
  in >> magic;
  if (magic != "trimesh2") throw Error("not a trimesh2 file (header '" + magic + "')");
  const auto nv = read_value<std::size_t>(in, "vertex count");
  const auto nt = read_value<std::size_t>(in, "triangle count");
  const auto nbe = read_value<std::size_t>(in, "boundary edge count");
  std::vector<Vec2> vertices(nv);
  for (auto& v : vertices) {
    v.x = read_value<double>(in, "vertex");
    v.y = read_value<double>(in, "vertex");
  }
  std::vector<std::array<int, 3>> triangles(nt);
  std::vector<int> region(nt);
  for (std::size_t e = 0; e < nt; ++e) {
    for (auto& i : triangles[e]) i = read_value<int>(in, "triangle");
    region[e] = read_value<int>(in, "region");
  }
  std::vector<BoundaryEdge> edges(nbe);
  for (auto& be : edges) {
    be.a = read_value<int>(in, "boundary edge");
    be.b = read_value<int>(in, "boundary edge");
    be.tag = parse_boundary_tag(read_value<std::string>(in, "boundary tag"));
  }
  return TriMesh(std::move(vertices), std::move(triangles), std::move(region), std::move(edges));
}

void save_trimesh(const TriMesh& mesh, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string());
  write_trimesh(out, mesh);
  check_stream(out, path);
}

TriMesh load_trimesh(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return read_trimesh(in);
}

void write_vtk(std::ostream& out, const TriMesh& mesh, std::span<const ScalarField> scalars,
               std::span<const VectorField> vectors) {
  const std::size_t nv = mesh.num_vertices(), nt = mesh.num_triangles();
  for (const auto& f : scalars)
    if (f.values.size() != nv) throw MismatchError("scalar field '" + f.name + "' has the wrong size");
  for (const auto& f : vectors)
    if (f.values.size() != 2 * nv) throw MismatchError("vector field '" + f.name + "' has the wrong size");

  const auto old_precision = out.precision(std::numeric_limits<double>::max_digits10);
  out << "# vtk DataFile Version 2.0\nshapeopt mesh\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << nv << " double\n";
  for (const auto& v : mesh.vertices()) out << v.x << ' ' << v.y << " 0\n";
  out << "CELLS " << nt << ' ' << 4 * nt << '\n';
  for (std::size_t e = 0; e < nt; ++e) {
    const auto& t = mesh.triangle(e);
    out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  }
  out << "CELL_TYPES " << nt << '\n';
  for (std::size_t e = 0; e < nt; ++e) out << "5\n";
  out << "CELL_DATA " << nt << "\nSCALARS region int 1\nLOOKUP_TABLE default\n";
  for (std::size_t e = 0; e < nt; ++e) out << mesh.region(e) << '\n';
  if (!scalars.empty() || !vectors.empty()) {
    out << "POINT_DATA " << nv << '\n';
    for (const auto& f : scalars) {
      out << "SCALARS " << f.name << " double 1\nLOOKUP_TABLE default\n";
      for (double x : f.values) out << x << '\n';
    }
    for (const auto& f : vectors) {
      out << "VECTORS " << f.name << " double\n";
      for (std::size_t i = 0; i < nv; ++i) out << f.values[2 * i] << ' ' << f.values[2 * i + 1] << " 0\n";
    }
  }
  out.precision(old_precision);
}

void save_vtk(const TriMesh& mesh, const std::filesystem::path& path, std::span<const ScalarField> scalars,
              std::span<const VectorField> vectors) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string());
  write_vtk(out, mesh, scalars, vectors);
  check_stream(out, path);
}

}  // namespace shapeopt
