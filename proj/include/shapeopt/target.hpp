#pragma once

// Synthetic observations: the state of the target geometry, solved on its own
// mesh and transferred to the current iterate's vertices.

#include "shapeopt/config.hpp"
#include "shapeopt/mesh.hpp"
#include "shapeopt/parabolic.hpp"
#include "shapeopt/shape_calculus.hpp"

namespace shapeopt {

/// Model data with the configured coefficients, time grid and solver options.
ModelData model_data(const ExperimentConfig& config);
PcgOptions solver_options(const ExperimentConfig& config);

struct TargetData {
  TriMesh mesh;
  TimeField ybar;
  RadialProfile profile;
};

/// Meshes the target shape with config.target_cells cells and solves the state.
TargetData generate_target_data(const ExperimentConfig& config);

/// ybar evaluated at the vertices of `mesh` (P1 interpolation on the target mesh).
TimeField interpolate_observation(const TargetData& target, const TriMesh& mesh);

/// Gradient of the target-mesh observation at the vertices of `mesh`.
ObservationGradient interpolate_observation_gradient(const TargetData& target, const TriMesh& mesh);

/// RMS over interface vertices of | |x| - r(theta(x)) |.
double distance_to_target(const TriMesh& mesh, const RadialProfile& target_profile);

}  // namespace shapeopt
