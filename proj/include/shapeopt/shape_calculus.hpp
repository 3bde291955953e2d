#pragma once

// Shape derivative of the tracking functional in volume form (a nodal load
// for the elasticity solve), in boundary form (a density on the interface),
// and the exact derivative of the discrete perimeter.

#include <cstdint>
#include <vector>

#include "shapeopt/mesh.hpp"
#include "shapeopt/parabolic.hpp"

namespace shapeopt {

/// Nodal 2-vector load, interleaved like DeformField. Its pairing with a
/// deformation V is the shape derivative in direction V.
struct ShapeLoad {
  std::vector<double> values;
  bool restricted = false;
  std::uint64_t mesh_id = 0;

  static ShapeLoad zeros(const TriMesh& mesh) { return {std::vector<double>(2 * mesh.num_vertices(), 0.0), false, mesh.id()}; }
  ShapeLoad& operator+=(const ShapeLoad& other);
  Vec2 at(std::size_t i) const { return {values[2 * i], values[2 * i + 1]}; }
};

/// Pointwise Hadamard density multiplying <V, n>, one value per interface
/// loop position.
struct SurfaceDensity {
  std::vector<double> values;
  std::uint64_t mesh_id = 0;
};

/// Volume form of the tracking shape derivative tested against every vector
/// hat function:
///   int_0^T int_Omega -k grad(y)^T (grad V + grad V^T) grad(p) - p grad(f)^T V
///     + div(V) (1/2 (y - ybar)^2 + dy/dt p + k grad(y)^T grad(p) - f p)
/// with dy/dt the backward difference, paired with the adjoint multiplier of
/// the same step, and exact element quadrature. This is the exact derivative
/// of the discrete tracking functional with respect to vertex positions when
/// ybar is carried along with the vertices. With `restrict`, rows at vertices
/// whose element patch misses the interface are zeroed. Rows on the outer
/// boundary are always zero.
ShapeLoad assemble_domain_derivative(const TriMesh& mesh, const ModelData& data, const TimeField& y,
                                     const TimeField& p, const TimeField& ybar, bool restrict);

/// Spatial gradient of the observation at the vertices, one array per step.
using ObservationGradient = std::vector<std::vector<Vec2>>;

/// Term from moving the vertices through a fixed-in-space observation:
/// -sum_n dt (M (y^n - ybar^n))_v grad ybar^n(x_v). Added to the domain form
/// it gives the derivative of the tracking functional when ybar is
/// re-evaluated at the moved vertices instead of carried with them.
/// Same row restriction as assemble_domain_derivative.
ShapeLoad assemble_observation_load(const TriMesh& mesh, const TimeField& y, const TimeField& ybar,
                                    const ObservationGradient& ybar_gradient, bool restrict);

/// Hadamard density of the tracking term, multiplying <V, n> with n the
/// outward normal of region 2:
///   sum_n dt (k2 - k1) grad y_1^T grad p_2
///     = sum_n dt [ (k2 - k1) d_t y d_t p + (1/k1 - 1/k2) (k dn y)(k dn p) ].
/// Tangential derivatives come from the nodal values along the interface,
/// the (continuous) normal fluxes from the residuals of the discrete state
/// and adjoint equations restricted to region-2 elements, divided by the
/// lumped arc length. One value per interface_loop vertex.
SurfaceDensity assemble_boundary_derivative(const TriMesh& mesh, const ModelData& data, const TimeField& y,
                                            const TimeField& p, const TimeField& ybar);

/// Same density per interface edge: tangential product on the edge, flux
/// product averaged over its end points. Entry i belongs to loop edge
/// (loop[i], loop[i+1]).
std::vector<double> interface_edge_density(const TriMesh& mesh, const ModelData& data, const TimeField& y,
                                           const TimeField& p, const TimeField& ybar);

/// Lumped boundary integral sum_i density_i <V_i, n_i> arc_i.
double boundary_directional_value(const TriMesh& mesh, const SurfaceDensity& density, const DeformField& v);

/// Exact derivative of mu_reg * (discrete perimeter): sum over interface
/// edges of mu_reg * t_e . (V_b - V_a).
ShapeLoad assemble_perimeter_load(const TriMesh& mesh, double mu_reg);

/// Duality pairing load . V.
double directional_value(const ShapeLoad& load, const DeformField& v);

}  // namespace shapeopt
