#pragma once

// Linear elasticity a(U, V) = int sigma(U) : eps(V) on the whole mesh with
// U = 0 on the outer boundary. It is used twice: as the inner product of
// the Steklov-Poincare type shape metric and as the mesh deformation. A
// volume-form shape derivative paired with vector hat functions is a load
// whose elasticity solution U is the gradient representation, i.e.
// a(U, V) = DJ[V] for all admissible V.

#include <cstdint>
#include <span>
#include <vector>

#include "shapeopt/fem.hpp"
#include "shapeopt/mesh.hpp"
#include "shapeopt/shape_calculus.hpp"

namespace shapeopt {

struct LameParameters {
  double lambda;
  double mu;
};

/// lambda = nu E / ((1 + nu)(1 - 2 nu)), mu = E / (2 (1 + nu)).
LameParameters lame_from_young_poisson(double young, double poisson);

class ElasticityOperator {
 public:
  ElasticityOperator(const TriMesh& mesh, double young, double poisson, PcgOptions solver = {});

  /// Full stiffness before boundary elimination (rigid motions in its kernel).
  const SparseSpd& matrix() const { return matrix_; }
  /// Both components of every outer-boundary vertex, value zero.
  const DirichletSet& clamped() const { return clamped_; }
  const LameParameters& lame() const { return lame_; }
  double young() const { return young_; }
  double poisson() const { return poisson_; }
  const PcgOptions& solver() const { return solver_; }
  std::uint64_t mesh_id() const { return mesh_id_; }

 private:
  SparseSpd matrix_;
  DirichletSet clamped_;
  LameParameters lame_;
  double young_, poisson_;
  PcgOptions solver_;
  std::uint64_t mesh_id_;
};

/// Element stiffness (6x6, dofs interleaved per local vertex).
std::array<double, 36> element_elasticity(const std::array<Vec2, 3>& gradients, double area, LameParameters lame);

ElasticityOperator assemble_elasticity(const TriMesh& mesh, double young, double poisson, PcgOptions solver = {});

/// U with a(U, V) = load . V for every V vanishing on the outer boundary.
DeformField solve_representation(const ElasticityOperator& op, const ShapeLoad& load);

/// a(U, V) = U^T A V.
double inner(const ElasticityOperator& op, const DeformField& u, const DeformField& v);
double inner(const ElasticityOperator& op, std::span<const double> u, std::span<const double> v);

/// Largest Frobenius norm of the element-constant Jacobian of U.
double injectivity_margin(const TriMesh& mesh, const DeformField& u);

}  // namespace shapeopt
