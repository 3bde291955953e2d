#include "shapeopt/steklov.hpp"

#include <algorithm>
#include <cmath>

namespace shapeopt {

LameParameters lame_from_young_poisson(double young, double poisson) {
  if (!(young > 0.0)) throw Error("Young's modulus must be positive");
  if (!(poisson > 0.0) || !(poisson < 0.5)) throw Error("Poisson's ratio must lie in (0, 0.5)");
  return {poisson * young / ((1.0 + poisson) * (1.0 - 2.0 * poisson)), young / (2.0 * (1.0 + poisson))};
}

std::array<double, 36> element_elasticity(const std::array<Vec2, 3>& g, double area, LameParameters lame) {
  // Strain rows (eps_xx, eps_yy, gamma_xy) against local dofs.
  std::array<std::array<double, 6>, 3> b{};
  for (std::size_t a = 0; a < 3; ++a) {
    b[0][2 * a] = g[a].x;
    b[1][2 * a + 1] = g[a].y;
    b[2][2 * a] = g[a].y;
    b[2][2 * a + 1] = g[a].x;
  }
  const double l = lame.lambda, m = lame.mu;
  const double d[3][3] = {{l + 2 * m, l, 0.0}, {l, l + 2 * m, 0.0}, {0.0, 0.0, m}};
  std::array<double, 36> ke{};
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 6; ++j) {
      double s = 0.0;
      for (std::size_t r = 0; r < 3; ++r)
        for (std::size_t c = 0; c < 3; ++c) s += b[r][i] * d[r][c] * b[c][j];
      ke[i * 6 + j] = area * s;
    }
  return ke;
}

ElasticityOperator::ElasticityOperator(const TriMesh& mesh, double young, double poisson, PcgOptions solver)
    : lame_(lame_from_young_poisson(young, poisson)),
      young_(young),
      poisson_(poisson),
      solver_(std::move(solver)),
      mesh_id_(mesh.id()) {
  matrix_ = kernels::make_pattern(mesh.num_vertices(), mesh.triangles(), 2);
  const std::size_t ne = mesh.num_triangles();
  std::vector<double> local(ne * 36);
#pragma omp parallel for schedule(static)
  for (std::size_t e = 0; e < ne; ++e) {
    const auto ke = element_elasticity(mesh.gradients(e), mesh.signed_area(e), lame_);
    std::copy(ke.begin(), ke.end(), local.begin() + static_cast<std::ptrdiff_t>(e * 36));
  }
  kernels::assemble_into(matrix_, mesh.triangles(), mesh.topology().incidence, 2, local);
  const auto& on_outer = mesh.topology().on_outer;
  for (std::size_t v = 0; v < on_outer.size(); ++v) {
    if (!on_outer[v]) continue;
    clamped_.set(2 * v, 0.0);
    clamped_.set(2 * v + 1, 0.0);
  }
}

ElasticityOperator assemble_elasticity(const TriMesh& mesh, double young, double poisson, PcgOptions solver) {
  return ElasticityOperator(mesh, young, poisson, std::move(solver));
}

DeformField solve_representation(const ElasticityOperator& op, const ShapeLoad& load) {
  if (load.mesh_id != op.mesh_id() || load.values.size() != op.matrix().rows)
    throw MismatchError("load lives on another mesh");
  return {pcg_solve(op.matrix(), load.values, op.clamped(), op.solver()).x, op.mesh_id()};
}

double inner(const ElasticityOperator& op, std::span<const double> u, std::span<const double> v) {
  if (u.size() != op.matrix().rows || v.size() != op.matrix().rows) throw MismatchError("field has the wrong size");
  std::vector<double> av(v.size());
  kernels::spmv(op.matrix(), v, av);
  return kernels::dot(u, av);
}

double inner(const ElasticityOperator& op, const DeformField& u, const DeformField& v) {
  if (u.mesh_id != op.mesh_id() || v.mesh_id != op.mesh_id()) throw MismatchError("fields live on another mesh");
  return inner(op, std::span<const double>(u.values), std::span<const double>(v.values));
}

double injectivity_margin(const TriMesh& mesh, const DeformField& u) {
  if (u.mesh_id != mesh.id() || u.num_vertices() != mesh.num_vertices())
    throw MismatchError("field lives on another mesh");
  double margin = 0.0;
  for (std::size_t e = 0; e < mesh.num_triangles(); ++e) {
    const auto g = mesh.gradients(e);
    const auto& t = mesh.triangle(e);
    double j[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
    for (std::size_t a = 0; a < 3; ++a) {
      const Vec2 ua = u.at(static_cast<std::size_t>(t[a]));
      j[0][0] += ua.x * g[a].x;
      j[0][1] += ua.x * g[a].y;
      j[1][0] += ua.y * g[a].x;
      j[1][1] += ua.y * g[a].y;
    }
    margin = std::max(margin, std::sqrt(j[0][0] * j[0][0] + j[0][1] * j[0][1] + j[1][0] * j[1][0] + j[1][1] * j[1][1]));
  }
  return margin;
}

}  // namespace shapeopt
