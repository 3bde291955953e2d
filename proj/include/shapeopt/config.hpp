#pragma once

// Experiment configuration: a declarative "key = value" text file with one
// [section] per module. Every key has a default; serialize() writes all of
// them, and parse(serialize(c)) == c bit for bit.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "shapeopt/mesh.hpp"

namespace shapeopt {

enum class Method { lbfgs, full_bfgs, gradient, surface_lbfgs, surface_gradient };

std::string_view to_string(Method method);
Method parse_method(std::string_view name);
/// Surface-form (Sobolev metric, Dirichlet deformation) methods.
bool uses_surface_form(Method method);

/// Star-shaped interface description: "circle R", "ellipse A B",
/// "star R0 AMP K" (R0 + AMP cos(K t)) or "shifted_ellipse A B CX CY".
struct ShapeSpec {
  std::string kind = "circle";
  std::vector<double> params{0.5};

  RadialProfile profile() const;
  std::string to_string() const;
  static ShapeSpec parse(std::string_view text);
  friend bool operator==(const ShapeSpec&, const ShapeSpec&) = default;
};

struct ExperimentConfig {
  // [model]
  double k1 = 1.0;
  double k2 = 0.001;
  double final_time = 20.0;
  int n_steps = 30;
  // [regularization]
  double mu_reg = 1e-6;
  double mu_init = 0.01;
  int decay_iters = 0;  // 0: constant mu_reg from the first iteration
  // [elasticity]
  double young = 0.1;
  double poisson = 0.01;
  // [optimizer]
  Method method = Method::lbfgs;
  int memory = 3;
  int max_iter = 30;
  double gradient_tol = 1e-6;  // relative to the first gradient norm
  bool restrict_load = true;
  bool observation_term = true;  // derivative of the interpolated observation
  bool armijo = true;
  double armijo_slope = 1e-4;
  double backtrack_factor = 0.5;
  int max_backtracks = 8;
  double injectivity_bound = 0.5;
  // [surface]
  double sobolev_a = 0.01;
  // [mesh]
  int cells = 1000;
  int target_cells = 4000;
  ShapeSpec initial_shape{"ellipse", {0.6, 0.4}};
  ShapeSpec target_shape{"circle", {0.5}};
  // [solver]
  double cg_tol = 1e-10;
  int cg_max_iter = 20000;
  // [output]
  std::string output_dir = "out";
  std::uint64_t seed = 1;

  /// Applies "key=value" or "section.key=value"; throws on unknown keys.
  void set(std::string_view assignment);
  void validate() const;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::string& path);
std::string serialize(const ExperimentConfig& config);

}  // namespace shapeopt
