#pragma once

// P1 finite elements on TriMesh: scalar mass/stiffness assembly, Jacobi
// preconditioned conjugate gradients with Dirichlet elimination, and point
// evaluation of nodal fields.

#include <array>
#include <functional>
#include <map>
#include <span>
#include <vector>

#include "shapeopt/kernels.hpp"
#include "shapeopt/mesh.hpp"

namespace shapeopt {

/// Symmetric positive (semi)definite operator in CSR storage.
using SparseSpd = CsrMatrix;

/// Prescribed values for individual unknowns.
class DirichletSet {
 public:
  void set(std::size_t dof, double value) { values_[dof] = value; }
  bool contains(std::size_t dof) const { return values_.contains(dof); }
  std::size_t size() const { return values_.size(); }
  const std::map<std::size_t, double>& values() const { return values_; }
  /// Same unknowns, all values zero.
  DirichletSet homogeneous() const;

 private:
  std::map<std::size_t, double> values_;
};

/// Element matrices of the P1 triangle, local order as in the triangle.
std::array<double, 9> element_mass(double area);
std::array<double, 9> element_stiffness(const std::array<Vec2, 3>& gradients, double area, double k);

SparseSpd assemble_mass(const TriMesh& mesh);
/// k1 on region 1, k2 on region 2.
SparseSpd assemble_stiffness(const TriMesh& mesh, double k1, double k2);
/// a + alpha * b; both must share the sparsity pattern.
SparseSpd add_scaled(const SparseSpd& a, double alpha, const SparseSpd& b);

struct PcgOptions {
  double rel_tol = 1e-10;
  int max_iter = 20000;
  bool jacobi = true;
  /// Called after every iteration with the current iterate (full vector).
  std::function<void(int, std::span<const double>)> on_iterate;
};

struct PcgResult {
  std::vector<double> x;
  int iterations = 0;
  double rel_residual = 0.0;
};

/// Solves A x = rhs on the unknowns not in `dirichlet`, with x fixed to the
/// prescribed values elsewhere (row/column elimination). The residual is
/// measured on free unknowns relative to the eliminated right-hand side.
/// Throws SolverError on breakdown (non-SPD input) or non-convergence.
PcgResult pcg_solve(const SparseSpd& a, std::span<const double> rhs, const DirichletSet& dirichlet,
                    const PcgOptions& options = {}, std::span<const double> initial_guess = {});

/// Containing element and barycentric coordinates of a query point.
struct PointLocation {
  int element = -1;
  std::array<double, 3> bary{};
};

/// Bucket-grid point location with brute-force fallback. Points outside the
/// mesh by at most `snap_tol` are snapped to the nearest element.
class PointLocator {
 public:
  explicit PointLocator(const TriMesh& mesh);
  PointLocation locate(Vec2 p, double snap_tol = 1e-10) const;

 private:
  const TriMesh* mesh_;
  Vec2 lo_, hi_;
  int nx_ = 1, ny_ = 1;
  std::vector<std::vector<int>> buckets_;
};

/// Precomputed P1 evaluation of fields of `source` at fixed points.
class Interpolation {
 public:
  Interpolation(const TriMesh& source, std::span<const Vec2> points, double snap_tol = 1e-10);
  std::vector<double> apply(std::span<const double> field) const;
  std::span<const PointLocation> locations() const { return locations_; }

 private:
  std::vector<std::array<int, 3>> vertices_;
  std::vector<PointLocation> locations_;
  std::size_t source_vertices_;
};

std::vector<double> point_interpolate(const TriMesh& mesh, std::span<const double> field,
                                      std::span<const Vec2> points);

}  // namespace shapeopt
