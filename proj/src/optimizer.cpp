#include "shapeopt/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "shapeopt/shape_calculus.hpp"
#include "shapeopt/surface_metric.hpp"

namespace shapeopt {

bool LbfgsMemory::update(std::vector<double> s, std::vector<double> y, const InnerProduct& inner) {
  if (capacity_ == 0) return false;
  if (s.size() != y.size()) throw MismatchError("curvature pair of mismatched sizes");
  const double ys = inner(y, s);
  const double yy = inner(y, y);
  const double ss = inner(s, s);
  if (!(ys > 1e-12 * std::sqrt(yy * ss))) return false;
  if (pairs_.size() == capacity_) pairs_.pop_front();
  pairs_.push_back({std::move(s), std::move(y), 1.0 / ys});
  return true;
}

std::vector<double> LbfgsMemory::direction(std::span<const double> grad, const InnerProduct& inner) const {
  std::vector<double> q(grad.begin(), grad.end());
  if (pairs_.empty()) return q;
  const std::size_t m = pairs_.size();
  std::vector<double> alpha(m);
  for (std::size_t i = m; i-- > 0;) {
    const auto& pr = pairs_[i];
    if (!(pr.rho > 0.0)) throw Error("stored curvature pair with non-positive rho");
    alpha[i] = pr.rho * inner(pr.s, q);
    kernels::axpy(-alpha[i], pr.y, q);
  }
  const auto& newest = pairs_.back();
  const double gamma = 1.0 / (newest.rho * inner(newest.y, newest.y));
  for (double& v : q) v *= gamma;
  for (std::size_t i = 0; i < m; ++i) {
    const auto& pr = pairs_[i];
    const double beta = pr.rho * inner(pr.y, q);
    kernels::axpy(alpha[i] - beta, pr.s, q);
  }
  return q;
}

void LbfgsMemory::transport_to(const TriMesh& from, const TriMesh& to) {
  if (!from.same_connectivity(to)) throw MismatchError("transport between meshes of different connectivity");
  mesh_id_ = to.id();
}

DeformField transport(const DeformField& field, const TriMesh& from, const TriMesh& to) {
  if (field.mesh_id != from.id()) throw MismatchError("field does not live on the source mesh");
  if (!from.same_connectivity(to)) throw MismatchError("transport between meshes of different connectivity");
  return {field.values, to.id()};
}

namespace {

InnerProduct elasticity_inner(const ElasticityOperator& op) {
  return [&op](std::span<const double> u, std::span<const double> v) { return inner(op, u, v); };
}

InnerProduct curve_inner(const CurveSystem& sys) {
  return [&sys](std::span<const double> u, std::span<const double> v) { return sobolev_inner(sys, u, v); };
}

}  // namespace

DeformField lbfgs_direction(const LbfgsMemory& memory, const ElasticityOperator& op, const DeformField& grad) {
  if (grad.mesh_id != op.mesh_id()) throw MismatchError("gradient lives on another mesh");
  if (!memory.empty() && memory.mesh_id() != grad.mesh_id) throw MismatchError("memory not transported to the gradient mesh");
  return {memory.direction(grad.values, elasticity_inner(op)), grad.mesh_id};
}

bool lbfgs_update(LbfgsMemory& memory, const DeformField& s, const DeformField& y, const ElasticityOperator& op) {
  if (s.mesh_id != op.mesh_id() || y.mesh_id != op.mesh_id()) throw MismatchError("pair lives on another mesh");
  memory.set_mesh(op.mesh_id());
  return memory.update(s.values, y.values, elasticity_inner(op));
}

double regularization_schedule(int iter, double mu_init, double mu_final, int decay_iters) {
  if (decay_iters <= 0 || iter >= decay_iters) return mu_final;
  if (iter <= 0) return mu_init;
  const double t = static_cast<double>(iter) / static_cast<double>(decay_iters);
  if (mu_final <= 0.0) return mu_init * (1.0 - t);
  return mu_init * std::pow(mu_final / mu_init, t);
}

std::string_view to_string(RunStatus status) {
  switch (status) {
    case RunStatus::converged: return "converged";
    case RunStatus::max_iterations: return "max_iterations";
    case RunStatus::stalled: return "stalled";
    case RunStatus::failed: return "failed";
  }
  return "unknown";
}

TriMesh initial_mesh(const ExperimentConfig& config) {
  return generate_interface_mesh(config.initial_shape.profile(),
                                 edge_length_for_cells(static_cast<std::size_t>(config.cells)));
}

ShapeGradientA shape_gradient_volume(const TriMesh& mesh, const ModelData& data, const TimeField& y,
                                     const TimeField& p, const TimeField& ybar, const ObservationGradient* ybar_gradient,
                                     double mu_reg, bool restrict, const ElasticityOperator& op) {
  ShapeLoad load = assemble_domain_derivative(mesh, data, y, p, ybar, restrict);
  if (ybar_gradient) load += assemble_observation_load(mesh, y, ybar, *ybar_gradient, restrict);
  load += assemble_perimeter_load(mesh, mu_reg);
  load.restricted = restrict;
  DeformField u = solve_representation(op, load);
  return {std::move(load), std::move(u)};
}

namespace {

// Objective-level data at one mesh.
struct Evaluation {
  TimeField ybar;
  TimeField y;
  ObjectiveValue value;
};

Evaluation evaluate(const TriMesh& mesh, const TargetData& target, const ModelData& data, double mu) {
  Evaluation ev;
  ev.ybar = interpolate_observation(target, mesh);
  ev.y = solve_state(mesh, data);
  ev.value = objective(mesh, ev.y, ev.ybar, mu);
  return ev;
}

// Gradient-level data at one mesh.
struct Gradient {
  std::vector<double> grad;  // A: U (interleaved), B: g (per loop vertex)
  DeformField field;         // deformation realizing grad
  std::vector<double> dual;  // A: load, B: M_c density
  double norm = 0.0;
};

double metric_identity(const std::vector<double>& grad, const std::vector<double>& dual, const InnerProduct& inner,
                       const std::vector<char>& fixed, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  const double dual_norm = std::sqrt(kernels::dot(dual, dual));
  if (dual_norm == 0.0) return 0.0;
  double worst = 0.0;
  std::vector<double> v(grad.size());
  for (int k = 0; k < 10; ++k) {
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = fixed.empty() || !fixed[i] ? normal(rng) : 0.0;
    const double lhs = inner(grad, v);
    const double rhs = kernels::dot(dual, v);
    worst = std::max(worst, std::abs(lhs - rhs) / (dual_norm * std::sqrt(kernels::dot(v, v))));
  }
  return worst;
}

class Run {
 public:
  Run(const ExperimentConfig& config, const TargetData& target, const OptimizationCallbacks& callbacks)
      : config_(config), target_(target), callbacks_(callbacks), data_(model_data(config)), rng_(config.seed) {}

  OptimizationResult operator()(const TriMesh& initial) {
    OptimizationResult result;
    const bool surface = uses_surface_form(config_.method);
    std::size_t capacity = 0;
    switch (config_.method) {
      case Method::lbfgs:
      case Method::surface_lbfgs: capacity = static_cast<std::size_t>(config_.memory); break;
      case Method::full_bfgs: capacity = static_cast<std::size_t>(std::max(config_.max_iter, 1)); break;
      case Method::gradient:
      case Method::surface_gradient: capacity = 0; break;
    }
    LbfgsMemory memory(capacity);

    TriMesh mesh = initial;
    result.initial_quality = min_quality(mesh);
    int iter = 0;
    double mu = regularization_schedule(0, config_.mu_init, config_.mu_reg, config_.decay_iters);
    std::optional<Evaluation> ev;
    std::optional<ElasticityOperator> op;
    std::optional<CurveSystem> curve;
    Gradient grad;
    try {
      ev = evaluate(mesh, target_, data_, mu);
      op.emplace(mesh, config_.young, config_.poisson, solver_options(config_));
      if (surface) curve.emplace(mesh, config_.sobolev_a);
      grad = gradient(mesh, *ev, *op, curve ? &*curve : nullptr, mu);
    } catch (const Error& e) {
      result.status = RunStatus::failed;
      result.diverged = true;
      result.message = e.what();
      result.final_mesh = mesh;
      return result;
    }
    memory.set_mesh(mesh.id());
    record(result, 0, mesh, *ev, 0.0, grad);
    const double first_norm = grad.norm;
    int rejections = 0;
    double start_scale = 1.0;

    while (iter < config_.max_iter) {
      if (grad.norm <= config_.gradient_tol * first_norm || grad.norm == 0.0) {
        result.status = RunStatus::converged;
        break;
      }
      const InnerProduct ip = surface ? curve_inner(*curve) : elasticity_inner(*op);
      std::vector<double> dir = memory.direction(grad.grad, ip);
      for (double& v : dir) v = -v;
      double slope = ip(grad.grad, dir);
      if (!(slope < 0.0)) {
        memory.clear();
        dir = grad.grad;
        for (double& v : dir) v = -v;
        slope = ip(grad.grad, dir);
      }
      const DeformField deformation =
          surface ? dirichlet_deformation(*op, dir, mesh) : DeformField{dir, mesh.id()};
      const double margin = injectivity_margin(mesh, deformation);
      double scale = start_scale;
      if (margin > 0.0) scale = std::min(scale, config_.injectivity_bound / margin);

      IterateDiagnostics diag;
      diag.iter = iter + 1;
      const int next_iter = iter + 1;
      const double next_mu = regularization_schedule(next_iter, config_.mu_init, config_.mu_reg, config_.decay_iters);
      std::optional<TriMesh> trial;
      std::optional<Evaluation> trial_ev;
      for (int bt = 0; bt <= config_.max_backtracks; ++bt) {
        try {
          TriMesh candidate = apply_deformation(mesh, deformation, scale);
          Evaluation cand_ev = evaluate(candidate, target_, data_, mu);
          if (!config_.armijo || cand_ev.value.total <= ev->value.total + config_.armijo_slope * scale * slope) {
            trial.emplace(std::move(candidate));
            trial_ev.emplace(std::move(cand_ev));
            diag.backtracks = bt;
            break;
          }
        } catch (const MeshError&) {
        } catch (const SolverError&) {
        }
        scale *= config_.backtrack_factor;
      }
      if (!trial) {
        memory.clear();
        start_scale = scale;
        if (++rejections >= 3) {
          result.status = RunStatus::stalled;
          result.message = "step rejected three times in a row";
          break;
        }
        continue;
      }
      rejections = 0;
      start_scale = 1.0;
      diag.injectivity = margin * scale;

      try {
        std::vector<double> step = dir;
        for (double& v : step) v *= scale;
        const double old_norm = ip(step, step);
        if (next_mu != mu) trial_ev->value = objective(*trial, trial_ev->y, trial_ev->ybar, next_mu);
        memory.transport_to(mesh, *trial);
        mesh = std::move(*trial);
        ev = std::move(trial_ev);
        mu = next_mu;
        op.emplace(mesh, config_.young, config_.poisson, solver_options(config_));
        if (surface) curve.emplace(mesh, config_.sobolev_a);
        Gradient next = gradient(mesh, *ev, *op, curve ? &*curve : nullptr, mu);
        const InnerProduct nip = surface ? curve_inner(*curve) : elasticity_inner(*op);
        const double new_norm = nip(step, step);
        diag.transport_change = old_norm > 0.0 ? std::abs(new_norm - old_norm) / old_norm : 0.0;
        std::vector<double> yv = next.grad;
        kernels::axpy(-1.0, grad.grad, yv);
        diag.pair_stored = memory.update(std::move(step), std::move(yv), nip);
        grad = std::move(next);
      } catch (const Error& e) {
        result.status = RunStatus::failed;
        result.diverged = true;
        result.message = e.what();
        break;
      }
      iter = next_iter;
      diag.metric_identity = pending_identity_;
      result.diagnostics.push_back(diag);
      record(result, iter, mesh, *ev, scale, grad);
    }

    result.final_mesh = mesh;
    result.final_temperature = ev->y.steps.back();
    result.final_gradient = grad.field;
    finish(result);
    return result;
  }

 private:
  Gradient gradient(const TriMesh& mesh, const Evaluation& ev, const ElasticityOperator& op, const CurveSystem* curve,
                    double mu) {
    Gradient out;
    const TimeField p = solve_adjoint(mesh, data_, ev.y, ev.ybar);
    if (curve == nullptr) {
      ObservationGradient gb;
      if (config_.observation_term) gb = interpolate_observation_gradient(target_, mesh);
      auto a = shape_gradient_volume(mesh, data_, ev.y, p, ev.ybar, config_.observation_term ? &gb : nullptr, mu,
                                     config_.restrict_load, op);
      std::vector<char> fixed(a.gradient.values.size(), 0);
      for (const auto& [dof, value] : op.clamped().values()) fixed[dof] = 1;
      out.grad = a.gradient.values;
      out.field = std::move(a.gradient);
      out.dual = std::move(a.load.values);
      out.norm = std::sqrt(std::max(0.0, inner(op, out.grad, out.grad)));
      pending_identity_ = metric_identity(out.grad, out.dual, elasticity_inner(op), fixed, rng_);
    } else {
      const SurfaceGradient sg = surface_shape_gradient(mesh, data_, ev.y, p, ev.ybar, mu, *curve);
      out.grad = sg.gradient;
      out.field = dirichlet_deformation(op, out.grad, mesh);
      out.dual.resize(sg.density.size());
      kernels::spmv(curve->mass(), sg.density, out.dual);
      out.norm = std::sqrt(std::max(0.0, sobolev_inner(*curve, out.grad, out.grad)));
      pending_identity_ = metric_identity(out.grad, out.dual, curve_inner(*curve), {}, rng_);
    }
    return out;
  }

  void record(OptimizationResult& result, int iter, const TriMesh& mesh, const Evaluation& ev, double step,
              const Gradient& grad) {
    IterateRecord rec;
    rec.iter = iter;
    rec.J = ev.value.total;
    rec.j_track = ev.value.tracking;
    rec.perimeter = ev.value.perimeter;
    rec.distance = distance_to_target(mesh, target_.profile);
    rec.step = step;
    rec.gradnorm = grad.norm;
    rec.minquality = min_quality(mesh);
    if (iter == 0) {
      IterateDiagnostics d0;
      d0.metric_identity = pending_identity_;
      result.diagnostics.push_back(d0);
    }
    result.history.push_back(rec);
    if (callbacks_.on_iterate) callbacks_.on_iterate(rec, mesh, ev.y.steps.back(), grad.field);
  }

  void finish(OptimizationResult& result) const {
    if (result.status == RunStatus::failed) {
      result.diverged = true;
      return;
    }
    for (const auto& rec : result.history)
      if (rec.minquality < 0.3 * result.initial_quality) {
        result.diverged = true;
        result.message = "mesh quality collapsed";
        return;
      }
    if (result.status == RunStatus::converged) return;
    const double j0 = result.history.front().J;
    bool decreased = false;
    for (const auto& rec : result.history)
      if (rec.iter >= 1 && rec.iter <= 10 && rec.J < j0) decreased = true;
    if (!decreased) {
      result.diverged = true;
      result.message = "objective did not decrease within 10 iterations";
    }
  }

  const ExperimentConfig& config_;
  const TargetData& target_;
  const OptimizationCallbacks& callbacks_;
  ModelData data_;
  std::mt19937_64 rng_;
  double pending_identity_ = 0.0;
};

}  // namespace

OptimizationResult run_optimization(const ExperimentConfig& config, const TargetData& target, const TriMesh& initial,
                                    const OptimizationCallbacks& callbacks) {
  config.validate();
  return Run(config, target, callbacks)(initial);
}

OptimizationResult run_optimization(const ExperimentConfig& config, const OptimizationCallbacks& callbacks) {
  config.validate();
  const TargetData target = generate_target_data(config);
  return run_optimization(config, target, initial_mesh(config), callbacks);
}

}  // namespace shapeopt
