#pragma once

// Transmission heat problem on TriMesh: implicit Euler in time, P1 in space,
// y = top_value on the top edge and homogeneous Neumann conditions elsewhere.
// The adjoint is the exact discrete adjoint of this scheme with respect to
// the rectangle-rule tracking functional
//   j = sum_{n=1..N} dt * 1/2 * (y^n - ybar^n)^T M (y^n - ybar^n).

#include <cstdint>
#include <functional>
#include <vector>

#include "shapeopt/fem.hpp"
#include "shapeopt/mesh.hpp"

namespace shapeopt {

/// Nodal scalar field at times t_n = n * dt, n = 0..N.
struct TimeField {
  std::vector<std::vector<double>> steps;
  double dt = 0.0;
  std::uint64_t mesh_id = 0;

  std::size_t num_steps() const { return steps.empty() ? 0 : steps.size() - 1; }
  const std::vector<double>& operator[](std::size_t n) const { return steps[n]; }
  std::vector<double>& operator[](std::size_t n) { return steps[n]; }
};

/// Volume source f(t, x) with its spatial gradient. Empty means f = 0.
struct SourceTerm {
  std::function<double(double, Vec2)> value;
  std::function<Vec2(double, Vec2)> gradient;

  explicit operator bool() const { return static_cast<bool>(value); }
};

struct ModelData {
  double k1 = 1.0;
  double k2 = 0.001;
  double final_time = 20.0;
  int n_steps = 30;
  /// Initial nodal field; empty means y0 = 0.
  std::vector<double> y0;
  SourceTerm source;
  double top_value = 1.0;
  PcgOptions solver{};

  double dt() const { return final_time / n_steps; }
  void validate() const;
};

/// Matrices shared by the state and adjoint solves on one mesh.
class HeatOperator {
 public:
  HeatOperator(const TriMesh& mesh, const ModelData& data);

  const SparseSpd& mass() const { return mass_; }
  const SparseSpd& stiffness() const { return stiffness_; }
  /// M + dt K
  const SparseSpd& system() const { return system_; }
  /// Vertices on the top edge.
  const DirichletSet& top() const { return top_; }
  std::uint64_t mesh_id() const { return mesh_id_; }

 private:
  SparseSpd mass_, stiffness_, system_;
  DirichletSet top_;
  std::uint64_t mesh_id_;
};

TimeField solve_state(const TriMesh& mesh, const ModelData& data);
TimeField solve_state(const TriMesh& mesh, const ModelData& data, const HeatOperator& op);

/// Backward adjoint sweep. Entry m (m = 0..N-1) is the multiplier of the
/// step t_m -> t_{m+1}; entry N is zero (terminal condition p(T) = 0):
///   (M + dt K) p_m = M p_{m+1} - dt M (y^{m+1} - ybar^{m+1}),  p = 0 on top.
/// The gradient of j with respect to the nodal initial condition is -M p_0.
TimeField solve_adjoint(const TriMesh& mesh, const ModelData& data, const TimeField& state, const TimeField& ybar);
TimeField solve_adjoint(const TriMesh& mesh, const ModelData& data, const HeatOperator& op, const TimeField& state,
                        const TimeField& ybar);

struct ObjectiveValue {
  double total = 0.0;      // J = tracking + mu_reg * perimeter
  double tracking = 0.0;   // j
  double perimeter = 0.0;  // discrete interface length
};

ObjectiveValue objective(const TriMesh& mesh, const TimeField& state, const TimeField& ybar, double mu_reg);
ObjectiveValue objective(const TriMesh& mesh, const SparseSpd& mass, const TimeField& state, const TimeField& ybar,
                         double mu_reg);

/// Throws MismatchError unless both fields share mesh and time grid.
void check_aligned(const TimeField& a, const TimeField& b);

}  // namespace shapeopt
