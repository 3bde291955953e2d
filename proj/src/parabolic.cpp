#include "shapeopt/parabolic.hpp"

#include <cmath>

namespace shapeopt {

void ModelData::validate() const {
  if (!(k1 > 0.0) || !(k2 > 0.0)) throw Error("diffusion coefficients must be positive");
  if (!(final_time > 0.0)) throw Error("final time must be positive");
  if (n_steps < 1) throw Error("at least one time step is required");
}

void check_aligned(const TimeField& a, const TimeField& b) {
  if (a.mesh_id != b.mesh_id) throw MismatchError("time fields live on different meshes");
  if (a.num_steps() != b.num_steps() || a.dt != b.dt) throw MismatchError("time fields use different time grids");
}

HeatOperator::HeatOperator(const TriMesh& mesh, const ModelData& data)
    : mass_(assemble_mass(mesh)),
      stiffness_(assemble_stiffness(mesh, data.k1, data.k2)),
      system_(add_scaled(mass_, data.dt(), stiffness_)),
      mesh_id_(mesh.id()) {
  data.validate();
  const auto& on_top = mesh.topology().on_top;
  for (std::size_t v = 0; v < on_top.size(); ++v)
    if (on_top[v]) top_.set(v, data.top_value);
}

TimeField solve_state(const TriMesh& mesh, const ModelData& data) {
  return solve_state(mesh, data, HeatOperator(mesh, data));
}

TimeField solve_state(const TriMesh& mesh, const ModelData& data, const HeatOperator& op) {
  if (op.mesh_id() != mesh.id()) throw MismatchError("heat operator assembled on another mesh");
  data.validate();
  const std::size_t nv = mesh.num_vertices();
  const double dt = data.dt();
  TimeField y{{}, dt, mesh.id()};
  y.steps.reserve(static_cast<std::size_t>(data.n_steps) + 1);
  if (data.y0.empty()) {
    y.steps.emplace_back(nv, 0.0);
  } else {
    if (data.y0.size() != nv) throw MismatchError("initial condition has the wrong size");
    y.steps.push_back(data.y0);
  }

  std::vector<double> rhs(nv), f(nv), mf(nv);
  for (int n = 1; n <= data.n_steps; ++n) {
    const auto& prev = y.steps.back();
    kernels::spmv(op.mass(), prev, rhs);
    if (data.source) {
      const double t = n * dt;
      for (std::size_t i = 0; i < nv; ++i) f[i] = data.source.value(t, mesh.vertex(i));
      kernels::spmv(op.mass(), f, mf);
      kernels::axpy(dt, mf, rhs);
    }
    y.steps.push_back(pcg_solve(op.system(), rhs, op.top(), data.solver, prev).x);
  }
  return y;
}

TimeField solve_adjoint(const TriMesh& mesh, const ModelData& data, const TimeField& state, const TimeField& ybar) {
  return solve_adjoint(mesh, data, HeatOperator(mesh, data), state, ybar);
}

TimeField solve_adjoint(const TriMesh& mesh, const ModelData& data, const HeatOperator& op, const TimeField& state,
                        const TimeField& ybar) {
  check_aligned(state, ybar);
  if (state.mesh_id != mesh.id() || op.mesh_id() != mesh.id())
    throw MismatchError("adjoint inputs live on another mesh");
  const std::size_t nv = mesh.num_vertices();
  const std::size_t nt = state.num_steps();
  const double dt = state.dt;
  const DirichletSet zero_top = op.top().homogeneous();

  TimeField p{std::vector<std::vector<double>>(nt + 1, std::vector<double>(nv, 0.0)), dt, mesh.id()};
  std::vector<double> rhs(nv), misfit(nv), m_misfit(nv);
  for (std::size_t m = nt; m-- > 0;) {
    for (std::size_t i = 0; i < nv; ++i) misfit[i] = state[m + 1][i] - ybar[m + 1][i];
    kernels::spmv(op.mass(), p[m + 1], rhs);
    kernels::spmv(op.mass(), misfit, m_misfit);
    kernels::axpy(-dt, m_misfit, rhs);
    p[m] = pcg_solve(op.system(), rhs, zero_top, data.solver, p[m + 1]).x;
  }
  return p;
}

ObjectiveValue objective(const TriMesh& mesh, const TimeField& state, const TimeField& ybar, double mu_reg) {
  return objective(mesh, assemble_mass(mesh), state, ybar, mu_reg);
}

ObjectiveValue objective(const TriMesh& mesh, const SparseSpd& mass, const TimeField& state, const TimeField& ybar,
                         double mu_reg) {
  check_aligned(state, ybar);
  if (state.mesh_id != mesh.id()) throw MismatchError("state lives on another mesh");
  const std::size_t nv = mesh.num_vertices();
  std::vector<double> e(nv), me(nv);
  ObjectiveValue out;
  for (std::size_t n = 1; n <= state.num_steps(); ++n) {
    for (std::size_t i = 0; i < nv; ++i) e[i] = state[n][i] - ybar[n][i];
    kernels::spmv(mass, e, me);
    out.tracking += state.dt * 0.5 * kernels::dot(e, me);
  }
  out.perimeter = interface_perimeter(mesh);
  out.total = out.tracking + mu_reg * out.perimeter;
  return out;
}

}  // namespace shapeopt
