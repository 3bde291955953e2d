#pragma once

// Surface-form pipeline: L2 projection of element-constant interface traces,
// the Sobolev metric (id - A Laplace-Beltrami) on the closed interface
// polyline, and the Dirichlet-driven elasticity extension of the resulting
// normal deformation into the volume mesh.

#include <cstdint>
#include <span>
#include <vector>

#include "shapeopt/fem.hpp"
#include "shapeopt/mesh.hpp"
#include "shapeopt/parabolic.hpp"
#include "shapeopt/steklov.hpp"

namespace shapeopt {

/// Periodic P1 mass and stiffness on the interface loop (arc-length
/// weighted); vertex order is the loop order.
class CurveSystem {
 public:
  CurveSystem(const TriMesh& mesh, double smoothing);

  const SparseSpd& mass() const { return mass_; }
  const SparseSpd& stiffness() const { return stiffness_; }
  /// M + A K
  const SparseSpd& metric() const { return metric_; }
  double smoothing() const { return smoothing_; }
  std::size_t size() const { return mass_.rows; }
  std::uint64_t mesh_id() const { return mesh_id_; }

 private:
  SparseSpd mass_, stiffness_, metric_;
  double smoothing_;
  std::uint64_t mesh_id_;
};

/// Projection of per-edge constants (entry i on edge loop[i] -> loop[i+1])
/// onto continuous piecewise linears: M_c s = int raw phi_i.
std::vector<double> l2_project_interface(const TriMesh& mesh, std::span<const double> raw_per_edge,
                                         const PcgOptions& solver = {});

/// g with (M_c + A K_c) g = M_c density. Throws for A <= 0.
std::vector<double> sobolev_representation(const CurveSystem& sys, std::span<const double> density,
                                           const PcgOptions& solver = {});

/// g1(u, v) = u^T (M_c + A K_c) v.
double sobolev_inner(const CurveSystem& sys, std::span<const double> u, std::span<const double> v);

/// Elasticity solve with zero volume load, U = g n on the interface and
/// U = 0 on the outer boundary.
DeformField dirichlet_deformation(const ElasticityOperator& op, std::span<const double> g, const TriMesh& mesh);

struct SurfaceGradient {
  std::vector<double> projected;  // L2-projected jump density
  std::vector<double> density;    // projected + mu_reg * curvature
  std::vector<double> gradient;   // Sobolev representation
};

/// Full surface pipeline for the current state/adjoint pair.
SurfaceGradient surface_shape_gradient(const TriMesh& mesh, const ModelData& data, const TimeField& y,
                                       const TimeField& p, const TimeField& ybar, double mu_reg,
                                       const CurveSystem& sys);

}  // namespace shapeopt
