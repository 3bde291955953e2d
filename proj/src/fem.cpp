#include "shapeopt/fem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace shapeopt {

DirichletSet DirichletSet::homogeneous() const {
  DirichletSet out;
  for (const auto& [dof, value] : values_) out.set(dof, 0.0);
  return out;
}

std::array<double, 9> element_mass(double area) {
  const double d = area / 6.0, o = area / 12.0;
  return {d, o, o, o, d, o, o, o, d};
}

std::array<double, 9> element_stiffness(const std::array<Vec2, 3>& g, double area, double k) {
  std::array<double, 9> ke{};
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) ke[i * 3 + j] = k * area * dot(g[i], g[j]);
  return ke;
}

namespace {

SparseSpd assemble_scalar(const TriMesh& mesh, auto&& element) {
  SparseSpd m = kernels::make_pattern(mesh.num_vertices(), mesh.triangles(), 1);
  const std::size_t ne = mesh.num_triangles();
  std::vector<double> local(ne * 9);
#pragma omp parallel for schedule(static)
  for (std::size_t e = 0; e < ne; ++e) {
    const auto ke = element(e);
    std::copy(ke.begin(), ke.end(), local.begin() + static_cast<std::ptrdiff_t>(e * 9));
  }
  kernels::assemble_into(m, mesh.triangles(), mesh.topology().incidence, 1, local);
  return m;
}

}  // namespace

SparseSpd assemble_mass(const TriMesh& mesh) {
  return assemble_scalar(mesh, [&](std::size_t e) { return element_mass(mesh.signed_area(e)); });
}

SparseSpd assemble_stiffness(const TriMesh& mesh, double k1, double k2) {
  if (!(k1 > 0.0) || !(k2 > 0.0)) throw Error("diffusion coefficients must be positive");
  return assemble_scalar(mesh, [&](std::size_t e) {
    return element_stiffness(mesh.gradients(e), mesh.signed_area(e), mesh.region(e) == 1 ? k1 : k2);
  });
}

SparseSpd add_scaled(const SparseSpd& a, double alpha, const SparseSpd& b) {
  if (a.rows != b.rows || a.col != b.col) throw MismatchError("matrices do not share a sparsity pattern");
  SparseSpd out = a;
  for (std::size_t k = 0; k < out.val.size(); ++k) out.val[k] += alpha * b.val[k];
  return out;
}

PcgResult pcg_solve(const SparseSpd& a, std::span<const double> rhs, const DirichletSet& dirichlet,
                    const PcgOptions& options, std::span<const double> initial_guess) {
  const std::size_t n = a.rows;
  if (rhs.size() != n) throw MismatchError("right-hand side has the wrong size");
  if (!initial_guess.empty() && initial_guess.size() != n) throw MismatchError("initial guess has the wrong size");

  std::vector<char> fixed(n, 0);
  std::vector<double> xd(n, 0.0);
  for (const auto& [dof, value] : dirichlet.values()) {
    if (dof >= n) throw Error("Dirichlet index out of range");
    fixed[dof] = 1;
    xd[dof] = value;
  }

  // Eliminated right-hand side b - A x_D on free rows.
  std::vector<double> b(n), tmp(n);
  kernels::spmv(a, xd, tmp);
  for (std::size_t i = 0; i < n; ++i) b[i] = fixed[i] ? 0.0 : rhs[i] - tmp[i];
  const double b_norm = std::sqrt(kernels::dot(b, b));

  PcgResult result;
  result.x = xd;
  if (b_norm == 0.0) return result;

  std::vector<double> inv_diag(n, 1.0);
  if (options.jacobi) {
    for (std::size_t i = 0; i < n; ++i) {
      if (fixed[i]) continue;
      const double d = a.diagonal(i);
      if (!(d > 0.0)) throw SolverError("non-positive diagonal entry " + std::to_string(i), 1.0, 0);
      inv_diag[i] = 1.0 / d;
    }
  }

  // Work on the free part only: y = x - x_D vanishes on fixed unknowns.
  std::vector<double> y(n, 0.0);
  if (!initial_guess.empty())
    for (std::size_t i = 0; i < n; ++i) y[i] = fixed[i] ? 0.0 : initial_guess[i];
  std::vector<double> r(n);
  kernels::spmv(a, y, tmp);
  for (std::size_t i = 0; i < n; ++i) r[i] = fixed[i] ? 0.0 : b[i] - tmp[i];

  auto finish = [&](int it, double res) {
    for (std::size_t i = 0; i < n; ++i) result.x[i] = xd[i] + y[i];
    result.iterations = it;
    result.rel_residual = res;
    return result;
  };

  double res = std::sqrt(kernels::dot(r, r)) / b_norm;
  if (res <= options.rel_tol) return finish(0, res);

  std::vector<double> z(n), p(n), q(n), x_full;
  for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
  p = z;
  double rz = kernels::dot(r, z);
  for (int it = 1; it <= options.max_iter; ++it) {
    kernels::spmv(a, p, q);
    for (std::size_t i = 0; i < n; ++i)
      if (fixed[i]) q[i] = 0.0;
    const double pq = kernels::dot(p, q);
    if (!(pq > 0.0))
      throw SolverError("conjugate gradients broke down: non-positive curvature, operator is not SPD", res, it);
    const double alpha = rz / pq;
    kernels::axpy(alpha, p, y);
    kernels::axpy(-alpha, q, r);
    res = std::sqrt(kernels::dot(r, r)) / b_norm;
    if (options.on_iterate) {
      x_full.resize(n);
      for (std::size_t i = 0; i < n; ++i) x_full[i] = xd[i] + y[i];
      options.on_iterate(it, x_full);
    }
    if (res <= options.rel_tol) return finish(it, res);
    for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    const double rz_new = kernels::dot(r, z);
    kernels::xpby(z, rz_new / rz, p);
    rz = rz_new;
  }
  throw SolverError("conjugate gradients did not converge in " + std::to_string(options.max_iter) +
                        " iterations (relative residual " + std::to_string(res) + ")",
                    res, options.max_iter);
}

namespace {

std::array<double, 3> barycentric(const TriMesh& mesh, std::size_t e, Vec2 p) {
  const auto& t = mesh.triangle(e);
  const Vec2 a = mesh.vertex(static_cast<std::size_t>(t[0]));
  const Vec2 b = mesh.vertex(static_cast<std::size_t>(t[1]));
  const Vec2 c = mesh.vertex(static_cast<std::size_t>(t[2]));
  const double area = cross(b - a, c - a);
  const double l1 = cross(p - a, c - a) / area;
  const double l2 = cross(b - a, p - a) / area;
  return {1.0 - l1 - l2, l1, l2};
}

Vec2 closest_on_segment(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 d = b - a;
  const double t = std::clamp(dot(p - a, d) / dot(d, d), 0.0, 1.0);
  return a + t * d;
}

constexpr double kInsideTol = 1e-12;

}  // namespace

PointLocator::PointLocator(const TriMesh& mesh) : mesh_(&mesh) {
  lo_ = {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  hi_ = {-lo_.x, -lo_.y};
  for (const auto& v : mesh.vertices()) {
    lo_ = {std::min(lo_.x, v.x), std::min(lo_.y, v.y)};
    hi_ = {std::max(hi_.x, v.x), std::max(hi_.y, v.y)};
  }
  const int side = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(mesh.num_triangles()) / 2.0)));
  nx_ = ny_ = side;
  buckets_.assign(static_cast<std::size_t>(nx_ * ny_), {});
  const double wx = (hi_.x - lo_.x) / nx_, wy = (hi_.y - lo_.y) / ny_;
  for (std::size_t e = 0; e < mesh.num_triangles(); ++e) {
    Vec2 blo = mesh.vertex(static_cast<std::size_t>(mesh.triangle(e)[0])), bhi = blo;
    for (int v : mesh.triangle(e)) {
      const Vec2 p = mesh.vertex(static_cast<std::size_t>(v));
      blo = {std::min(blo.x, p.x), std::min(blo.y, p.y)};
      bhi = {std::max(bhi.x, p.x), std::max(bhi.y, p.y)};
    }
    const int i0 = std::clamp(static_cast<int>((blo.x - lo_.x) / wx), 0, nx_ - 1);
    const int i1 = std::clamp(static_cast<int>((bhi.x - lo_.x) / wx), 0, nx_ - 1);
    const int j0 = std::clamp(static_cast<int>((blo.y - lo_.y) / wy), 0, ny_ - 1);
    const int j1 = std::clamp(static_cast<int>((bhi.y - lo_.y) / wy), 0, ny_ - 1);
    for (int j = j0; j <= j1; ++j)
      for (int i = i0; i <= i1; ++i) buckets_[static_cast<std::size_t>(j * nx_ + i)].push_back(static_cast<int>(e));
  }
}

PointLocation PointLocator::locate(Vec2 p, double snap_tol) const {
  const TriMesh& mesh = *mesh_;
  const double wx = (hi_.x - lo_.x) / nx_, wy = (hi_.y - lo_.y) / ny_;
  const int i = std::clamp(static_cast<int>(std::floor((p.x - lo_.x) / wx)), 0, nx_ - 1);
  const int j = std::clamp(static_cast<int>(std::floor((p.y - lo_.y) / wy)), 0, ny_ - 1);
  for (int e : buckets_[static_cast<std::size_t>(j * nx_ + i)]) {
    const auto bary = barycentric(mesh, static_cast<std::size_t>(e), p);
    if (bary[0] >= -kInsideTol && bary[1] >= -kInsideTol && bary[2] >= -kInsideTol) return {e, bary};
  }
  // Fallback: nearest element by Euclidean distance.
  double best = std::numeric_limits<double>::infinity();
  PointLocation loc;
  for (std::size_t e = 0; e < mesh.num_triangles(); ++e) {
    const auto bary = barycentric(mesh, e, p);
    if (bary[0] >= -kInsideTol && bary[1] >= -kInsideTol && bary[2] >= -kInsideTol) return {static_cast<int>(e), bary};
    const auto& t = mesh.triangle(e);
    for (int k = 0; k < 3; ++k) {
      const Vec2 q = closest_on_segment(p, mesh.vertex(static_cast<std::size_t>(t[static_cast<std::size_t>(k)])),
                                        mesh.vertex(static_cast<std::size_t>(t[static_cast<std::size_t>((k + 1) % 3)])));
      const double d = norm(p - q);
      if (d < best) {
        best = d;
        loc = {static_cast<int>(e), barycentric(mesh, e, q)};
      }
    }
  }
  if (!(best <= snap_tol))
    throw Error("point (" + std::to_string(p.x) + ", " + std::to_string(p.y) + ") lies outside the mesh");
  for (auto& l : loc.bary) l = std::clamp(l, 0.0, 1.0);
  const double s = loc.bary[0] + loc.bary[1] + loc.bary[2];
  for (auto& l : loc.bary) l /= s;
  return loc;
}

Interpolation::Interpolation(const TriMesh& source, std::span<const Vec2> points, double snap_tol)
    : source_vertices_(source.num_vertices()) {
  const PointLocator locator(source);
  locations_.resize(points.size());
  vertices_.resize(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    locations_[i] = locator.locate(points[i], snap_tol);
    vertices_[i] = source.triangle(static_cast<std::size_t>(locations_[i].element));
  }
}

std::vector<double> Interpolation::apply(std::span<const double> field) const {
  if (field.size() != source_vertices_) throw MismatchError("field does not live on the interpolation source mesh");
  std::vector<double> out(locations_.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto& v = vertices_[i];
    const auto& l = locations_[i].bary;
    out[i] = l[0] * field[static_cast<std::size_t>(v[0])] + l[1] * field[static_cast<std::size_t>(v[1])] +
             l[2] * field[static_cast<std::size_t>(v[2])];
  }
  return out;
}

std::vector<double> point_interpolate(const TriMesh& mesh, std::span<const double> field,
                                      std::span<const Vec2> points) {
  return Interpolation(mesh, points).apply(field);
}

}  // namespace shapeopt
