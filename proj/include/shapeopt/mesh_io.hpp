#pragma once

// Native plain-text mesh format:
//   trimesh2 <nv> <nt> <nbe>
//   x y                 (nv lines)
//   i j k region        (nt lines)
//   a b tag             (nbe lines, tag in top|bottom|left|right|interface)
// and legacy VTK 2.0 ASCII output for visualization.

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "shapeopt/mesh.hpp"

namespace shapeopt {

void write_trimesh(std::ostream& out, const TriMesh& mesh);
TriMesh read_trimesh(std::istream& in);
void save_trimesh(const TriMesh& mesh, const std::filesystem::path& path);
TriMesh load_trimesh(const std::filesystem::path& path);

struct ScalarField {
  std::string name;
  std::span<const double> values;  // one per vertex
};

struct VectorField {
  std::string name;
  std::span<const double> values;  // interleaved 2-vectors, one per vertex
};

/// Unstructured grid with region labels as cell data and the given nodal
/// fields as point data (vectors get a zero z component).
void write_vtk(std::ostream& out, const TriMesh& mesh, std::span<const ScalarField> scalars = {},
               std::span<const VectorField> vectors = {});
void save_vtk(const TriMesh& mesh, const std::filesystem::path& path, std::span<const ScalarField> scalars = {},
              std::span<const VectorField> vectors = {});

}  // namespace shapeopt
