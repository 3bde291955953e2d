#pragma once

// Shape optimization loop. Approach A: restricted volume-form derivative as
// an elasticity load, gradient U with a(U, V) = DJ[V]. Approach B: boundary
// density, Sobolev representation g on the interface and the Dirichlet
// elasticity extension of g n. Quasi-Newton directions come from the two-loop
// recursion in the matching inner product (a or g1); vector transport is the
// identity on nodal arrays because connectivity never changes.

#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "shapeopt/config.hpp"
#include "shapeopt/mesh.hpp"
#include "shapeopt/parabolic.hpp"
#include "shapeopt/steklov.hpp"
#include "shapeopt/target.hpp"

namespace shapeopt {

using InnerProduct = std::function<double(std::span<const double>, std::span<const double>)>;

struct LbfgsPair {
  std::vector<double> s;
  std::vector<double> y;
  double rho = 0.0;  // 1 / <y, s>
};

/// Ring buffer of curvature pairs. capacity 0 turns the direction into the
/// plain gradient.
class LbfgsMemory {
 public:
  explicit LbfgsMemory(std::size_t capacity) : capacity_(capacity) {}

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return pairs_.size(); }
  bool empty() const { return pairs_.empty(); }
  const std::deque<LbfgsPair>& pairs() const { return pairs_; }
  std::uint64_t mesh_id() const { return mesh_id_; }
  void clear() { pairs_.clear(); }

  /// Stores (s, y) iff <y, s> > 1e-12 sqrt(<y, y><s, s>); evicts the oldest
  /// pair at capacity. Returns whether the pair was stored.
  bool update(std::vector<double> s, std::vector<double> y, const InnerProduct& inner);
  /// q = H grad by the two-loop recursion with H0 = <y, s>/<y, y> of the
  /// newest pair (identity when empty).
  std::vector<double> direction(std::span<const double> grad, const InnerProduct& inner) const;
  /// Moves the stored fields to `mesh` (identity on the arrays).
  void transport_to(const TriMesh& from, const TriMesh& to);
  void set_mesh(std::uint64_t id) { mesh_id_ = id; }

 private:
  std::size_t capacity_;
  std::deque<LbfgsPair> pairs_;
  std::uint64_t mesh_id_ = 0;
};

/// Nodal identity between meshes of the same connectivity.
DeformField transport(const DeformField& field, const TriMesh& from, const TriMesh& to);

/// Two-loop direction for deformation fields in the elasticity metric.
DeformField lbfgs_direction(const LbfgsMemory& memory, const ElasticityOperator& op, const DeformField& grad);
bool lbfgs_update(LbfgsMemory& memory, const DeformField& s, const DeformField& y, const ElasticityOperator& op);

/// Geometric decay from mu_init to mu_final over decay_iters iterations,
/// mu_final afterwards (linear decay when mu_final is 0).
double regularization_schedule(int iter, double mu_init, double mu_final, int decay_iters);

struct IterateRecord {
  int iter = 0;
  double J = 0.0;
  double j_track = 0.0;
  double perimeter = 0.0;
  double distance = 0.0;
  double step = 0.0;      // scale applied to reach this iterate
  double gradnorm = 0.0;  // metric norm of the gradient at this iterate
  double minquality = 0.0;
};

/// Per-iteration checks that do not belong in the CSV.
struct IterateDiagnostics {
  int iter = 0;
  double metric_identity = 0.0;   // max |<G, V> - DJ[V]| / (|load| |V|) over random V
  double transport_change = 0.0;  // |a'(s, s) - a(s, s)| / a(s, s) for the accepted step
  double injectivity = 0.0;       // injectivity_margin * step of the accepted step
  int backtracks = 0;
  bool pair_stored = false;
};

enum class RunStatus { converged, max_iterations, stalled, failed };
std::string_view to_string(RunStatus status);

struct OptimizationResult {
  std::vector<IterateRecord> history;
  std::vector<IterateDiagnostics> diagnostics;
  std::optional<TriMesh> final_mesh;
  std::vector<double> final_temperature;  // y at the final time on final_mesh
  DeformField final_gradient;             // last gradient deformation on final_mesh
  RunStatus status = RunStatus::max_iterations;
  bool diverged = false;
  std::string message;
  double initial_quality = 0.0;
};

struct OptimizationCallbacks {
  /// Called after every recorded iterate (iteration 0 included).
  std::function<void(const IterateRecord&, const TriMesh&, std::span<const double> temperature, const DeformField& gradient)>
      on_iterate;
};

/// Runs the configured method from `initial` against `target`.
OptimizationResult run_optimization(const ExperimentConfig& config, const TargetData& target, const TriMesh& initial,
                                    const OptimizationCallbacks& callbacks = {});
/// Builds target data and the initial mesh from the config, then runs.
OptimizationResult run_optimization(const ExperimentConfig& config, const OptimizationCallbacks& callbacks = {});

/// Initial mesh described by the config.
TriMesh initial_mesh(const ExperimentConfig& config);

/// Total approach-A load at a mesh: domain form + observation term (skipped
/// when ybar_gradient is null) + perimeter term, with the configured
/// restriction.
struct ShapeGradientA {
  ShapeLoad load;
  DeformField gradient;
};
ShapeGradientA shape_gradient_volume(const TriMesh& mesh, const ModelData& data, const TimeField& y,
                                     const TimeField& p, const TimeField& ybar, const ObservationGradient* ybar_gradient,
                                     double mu_reg, bool restrict, const ElasticityOperator& op);

}  // namespace shapeopt
