#include "shapeopt/surface_metric.hpp"

#include <algorithm>
#include <string>

#include "shapeopt/shape_calculus.hpp"

namespace shapeopt {

namespace {

// Periodic tridiagonal pattern over n vertices (n >= 3).
SparseSpd periodic_pattern(std::size_t n) {
  SparseSpd m;
  m.rows = n;
  m.row_ptr.resize(n + 1);
  for (std::size_t i = 0; i < n; ++i) {
    m.row_ptr[i] = 3 * i;
    int cols[3] = {static_cast<int>((i + n - 1) % n), static_cast<int>(i), static_cast<int>((i + 1) % n)};
    std::sort(cols, cols + 3);
    m.col.insert(m.col.end(), cols, cols + 3);
  }
  m.row_ptr[n] = 3 * n;
  m.val.assign(3 * n, 0.0);
  return m;
}

std::vector<double> edge_lengths(const TriMesh& mesh) {
  const auto loop = mesh.interface_loop();
  const std::size_t n = loop.size();
  std::vector<double> len(n);
  for (std::size_t i = 0; i < n; ++i) {
    len[i] = norm(mesh.vertex(static_cast<std::size_t>(loop[(i + 1) % n])) - mesh.vertex(static_cast<std::size_t>(loop[i])));
    if (!(len[i] > 0.0)) throw MeshError("degenerate interface edge at loop position " + std::to_string(i));
  }
  return len;
}

void add(SparseSpd& m, std::size_t i, std::size_t j, double v) {
  m.val[static_cast<std::size_t>(m.find(i, j))] += v;
}

}  // namespace

CurveSystem::CurveSystem(const TriMesh& mesh, double smoothing) : smoothing_(smoothing), mesh_id_(mesh.id()) {
  if (smoothing < 0.0) throw Error("Sobolev smoothing parameter must be non-negative");
  const auto len = edge_lengths(mesh);
  const std::size_t n = len.size();
  if (n < 3) throw MeshError("interface loop too short");
  mass_ = periodic_pattern(n);
  stiffness_ = periodic_pattern(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = (i + 1) % n;
    const double l = len[i];
    add(mass_, i, i, l / 3.0);
    add(mass_, j, j, l / 3.0);
    add(mass_, i, j, l / 6.0);
    add(mass_, j, i, l / 6.0);
    add(stiffness_, i, i, 1.0 / l);
    add(stiffness_, j, j, 1.0 / l);
    add(stiffness_, i, j, -1.0 / l);
    add(stiffness_, j, i, -1.0 / l);
  }
  metric_ = add_scaled(mass_, smoothing, stiffness_);
}

std::vector<double> l2_project_interface(const TriMesh& mesh, std::span<const double> raw, const PcgOptions& solver) {
  const auto len = edge_lengths(mesh);
  const std::size_t n = len.size();
  if (raw.size() != n) throw MismatchError("expected one value per interface edge");
  const CurveSystem sys(mesh, 0.0);
  std::vector<double> rhs(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    rhs[i] += 0.5 * len[i] * raw[i];
    rhs[(i + 1) % n] += 0.5 * len[i] * raw[i];
  }
  return pcg_solve(sys.mass(), rhs, {}, solver).x;
}

std::vector<double> sobolev_representation(const CurveSystem& sys, std::span<const double> density,
                                           const PcgOptions& solver) {
  if (!(sys.smoothing() > 0.0)) throw Error("Sobolev metric requires A > 0");
  if (density.size() != sys.size()) throw MismatchError("density has the wrong size");
  std::vector<double> rhs(density.size());
  kernels::spmv(sys.mass(), density, rhs);
  return pcg_solve(sys.metric(), rhs, {}, solver).x;
}

double sobolev_inner(const CurveSystem& sys, std::span<const double> u, std::span<const double> v) {
  if (u.size() != sys.size() || v.size() != sys.size()) throw MismatchError("curve field has the wrong size");
  std::vector<double> av(v.size());
  kernels::spmv(sys.metric(), v, av);
  return kernels::dot(u, av);
}

DeformField dirichlet_deformation(const ElasticityOperator& op, std::span<const double> g, const TriMesh& mesh) {
  if (op.mesh_id() != mesh.id()) throw MismatchError("operator assembled on another mesh");
  const auto loop = mesh.interface_loop();
  if (g.size() != loop.size()) throw MismatchError("expected one value per interface vertex");
  const auto geo = interface_geometry(mesh);
  DirichletSet bc = op.clamped();
  for (std::size_t i = 0; i < loop.size(); ++i) {
    const auto v = static_cast<std::size_t>(loop[i]);
    bc.set(2 * v, g[i] * geo[i].normal.x);
    bc.set(2 * v + 1, g[i] * geo[i].normal.y);
  }
  const std::vector<double> rhs(op.matrix().rows, 0.0);
  return {pcg_solve(op.matrix(), rhs, bc, op.solver()).x, mesh.id()};
}

SurfaceGradient surface_shape_gradient(const TriMesh& mesh, const ModelData& data, const TimeField& y,
                                       const TimeField& p, const TimeField& ybar, double mu_reg,
                                       const CurveSystem& sys) {
  if (sys.mesh_id() != mesh.id()) throw MismatchError("curve system assembled on another mesh");
  SurfaceGradient out;
  out.projected = l2_project_interface(mesh, interface_edge_density(mesh, data, y, p, ybar), data.solver);
  out.density = out.projected;
  if (mu_reg > 0.0) {
    const auto geo = interface_geometry(mesh);
    for (std::size_t i = 0; i < geo.size(); ++i) out.density[i] += mu_reg * geo[i].curvature;
  }
  out.gradient = sobolev_representation(sys, out.density, data.solver);
  return out;
}

}  // namespace shapeopt
