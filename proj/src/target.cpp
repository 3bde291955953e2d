#include "shapeopt/target.hpp"

#include <cmath>

#include "shapeopt/fem.hpp"

namespace shapeopt {

PcgOptions solver_options(const ExperimentConfig& config) {
  PcgOptions options;
  options.rel_tol = config.cg_tol;
  options.max_iter = config.cg_max_iter;
  return options;
}

ModelData model_data(const ExperimentConfig& config) {
  ModelData data;
  data.k1 = config.k1;
  data.k2 = config.k2;
  data.final_time = config.final_time;
  data.n_steps = config.n_steps;
  data.solver = solver_options(config);
  return data;
}

TargetData generate_target_data(const ExperimentConfig& config) {
  auto profile = config.target_shape.profile();
  TriMesh mesh = generate_interface_mesh(profile, edge_length_for_cells(static_cast<std::size_t>(config.target_cells)));
  TimeField ybar = solve_state(mesh, model_data(config));
  return {std::move(mesh), std::move(ybar), std::move(profile)};
}

TimeField interpolate_observation(const TargetData& target, const TriMesh& mesh) {
  const Interpolation interp(target.mesh, mesh.vertices());
  TimeField out;
  out.dt = target.ybar.dt;
  out.mesh_id = mesh.id();
  out.steps.reserve(target.ybar.steps.size());
  for (const auto& step : target.ybar.steps) out.steps.push_back(interp.apply(step));
  return out;
}

ObservationGradient interpolate_observation_gradient(const TargetData& target, const TriMesh& mesh) {
  const Interpolation interp(target.mesh, mesh.vertices());
  const auto locations = interp.locations();
  ObservationGradient out(target.ybar.steps.size(), std::vector<Vec2>(mesh.num_vertices()));
  for (std::size_t v = 0; v < locations.size(); ++v) {
    const auto e = static_cast<std::size_t>(locations[v].element);
    const auto g = target.mesh.gradients(e);
    const auto& tri = target.mesh.triangle(e);
    for (std::size_t n = 0; n < out.size(); ++n) {
      const auto& field = target.ybar[n];
      Vec2 grad;
      for (std::size_t a = 0; a < 3; ++a) grad += field[static_cast<std::size_t>(tri[a])] * g[a];
      out[n][v] = grad;
    }
  }
  return out;
}

double distance_to_target(const TriMesh& mesh, const RadialProfile& target_profile) {
  const auto loop = mesh.interface_loop();
  double sum = 0.0;
  for (int v : loop) {
    const Vec2 x = mesh.vertex(static_cast<std::size_t>(v));
    const double d = norm(x) - target_profile(std::atan2(x.y, x.x));
    sum += d * d;
  }
  return std::sqrt(sum / static_cast<double>(loop.size()));
}

}  // namespace shapeopt
