#include "shapeopt/shape_calculus.hpp"

#include <array>

#include "shapeopt/fem.hpp"

namespace shapeopt {

namespace {

// Exact integral of the product of two P1 functions over a triangle.
double p1_product(double area, const std::array<double, 3>& u, const std::array<double, 3>& v) {
  return area / 12.0 * (u[0] * v[0] + u[1] * v[1] + u[2] * v[2] + (u[0] + u[1] + u[2]) * (v[0] + v[1] + v[2]));
}

std::array<double, 3> gather(const std::vector<double>& field, const std::array<int, 3>& tri) {
  return {field[static_cast<std::size_t>(tri[0])], field[static_cast<std::size_t>(tri[1])],
          field[static_cast<std::size_t>(tri[2])]};
}

Vec2 element_gradient(const std::array<Vec2, 3>& g, const std::array<double, 3>& u) {
  return u[0] * g[0] + u[1] * g[1] + u[2] * g[2];
}

void check_inputs(const TriMesh& mesh, const TimeField& y, const TimeField& p) {
  check_aligned(y, p);
  if (y.mesh_id != mesh.id()) throw MismatchError("fields live on another mesh");
}

}  // namespace

ShapeLoad& ShapeLoad::operator+=(const ShapeLoad& other) {
  if (mesh_id != other.mesh_id || values.size() != other.values.size())
    throw MismatchError("loads live on different meshes");
  for (std::size_t i = 0; i < values.size(); ++i) values[i] += other.values[i];
  restricted = restricted && other.restricted;
  return *this;
}

ShapeLoad assemble_domain_derivative(const TriMesh& mesh, const ModelData& data, const TimeField& y,
                                     const TimeField& p, const TimeField& ybar, bool restrict) {
  check_inputs(mesh, y, p);
  check_aligned(y, ybar);
  const std::size_t ne = mesh.num_triangles();
  const std::size_t nt = y.num_steps();
  const double dt = y.dt;
  std::vector<double> local(ne * 6, 0.0);

#pragma omp parallel for schedule(static)
  for (std::size_t e = 0; e < ne; ++e) {
    const auto& tri = mesh.triangle(e);
    const auto g = mesh.gradients(e);
    const double area = mesh.signed_area(e);
    const double k = mesh.region(e) == 1 ? data.k1 : data.k2;
    const Vec2 center = mesh.centroid(e);

    double div_weight = 0.0;             // multiplies div V
    std::array<double, 4> w{};           // w[i*2+j] = sum dt k area d_i y d_j p
    std::array<Vec2, 3> source_part{};   // - int p grad(f)^T V, per local hat
    for (std::size_t n = 1; n <= nt; ++n) {
      const auto yn = gather(y[n], tri);
      const auto yp = gather(y[n - 1], tri);
      const auto pn = gather(p[n - 1], tri);
      const auto bn = gather(ybar[n], tri);
      const std::array<double, 3> misfit{yn[0] - bn[0], yn[1] - bn[1], yn[2] - bn[2]};
      const std::array<double, 3> dy{yn[0] - yp[0], yn[1] - yp[1], yn[2] - yp[2]};
      const Vec2 gy = element_gradient(g, yn);
      const Vec2 gp = element_gradient(g, pn);

      div_weight += dt * 0.5 * p1_product(area, misfit, misfit) + p1_product(area, dy, pn) +
                    dt * k * area * dot(gy, gp);
      w[0] += dt * k * area * gy.x * gp.x;
      w[1] += dt * k * area * gy.x * gp.y;
      w[2] += dt * k * area * gy.y * gp.x;
      w[3] += dt * k * area * gy.y * gp.y;

      if (data.source) {
        const double t = static_cast<double>(n) * dt;
        std::array<double, 3> fn{};
        for (std::size_t a = 0; a < 3; ++a) fn[a] = data.source.value(t, mesh.vertex(static_cast<std::size_t>(tri[a])));
        div_weight -= dt * p1_product(area, fn, pn);
        const Vec2 gf = data.source.gradient(t, center);
        const double psum = pn[0] + pn[1] + pn[2];
        for (std::size_t a = 0; a < 3; ++a) source_part[a] -= (dt * area / 12.0 * (psum + pn[a])) * gf;
      }
    }

    for (std::size_t a = 0; a < 3; ++a) {
      // -(W + W^T) g_a + div_weight * g_a
      const Vec2 ga = g[a];
      const double vx = -((w[0] + w[0]) * ga.x + (w[1] + w[2]) * ga.y) + div_weight * ga.x + source_part[a].x;
      const double vy = -((w[2] + w[1]) * ga.x + (w[3] + w[3]) * ga.y) + div_weight * ga.y + source_part[a].y;
      local[e * 6 + a * 2] = vx;
      local[e * 6 + a * 2 + 1] = vy;
    }
  }

  ShapeLoad load = ShapeLoad::zeros(mesh);
  kernels::assemble_vector(load.values, mesh.triangles(), mesh.topology().incidence, 2, local);
  const auto& topo = mesh.topology();
  for (std::size_t v = 0; v < mesh.num_vertices(); ++v) {
    if (topo.on_outer[v] || (restrict && !topo.near_interface[v])) {
      load.values[2 * v] = 0.0;
      load.values[2 * v + 1] = 0.0;
    }
  }
  load.restricted = restrict;
  return load;
}

namespace {

// Per step n: tangential products on the interface edges and the
// region-2 normal fluxes k2 dn y, k2 dn p at the interface vertices,
// recovered from the element residuals of the discrete equations restricted
// to region 2 and divided by the lumped arc length.
struct InterfaceTraces {
  std::vector<std::vector<double>> tangential;  // [n][edge]
  std::vector<std::vector<double>> flux_y;      // [n][loop vertex]
  std::vector<std::vector<double>> flux_p;      // [n][loop vertex]
};

InterfaceTraces interface_traces(const TriMesh& mesh, const ModelData& data, const TimeField& y, const TimeField& p,
                                 const TimeField& ybar) {
  check_inputs(mesh, y, p);
  check_aligned(y, ybar);
  const auto loop = mesh.interface_loop();
  const auto& topo = mesh.topology();
  const std::size_t nl = loop.size();
  const std::size_t nt = y.num_steps();
  const double dt = y.dt;
  const auto geo = interface_geometry(mesh);

  std::vector<std::size_t> band;
  for (std::size_t e = 0; e < mesh.num_triangles(); ++e) {
    if (mesh.region(e) != 2) continue;
    const auto& tri = mesh.triangle(e);
    if (topo.interface_pos[static_cast<std::size_t>(tri[0])] >= 0 || topo.interface_pos[static_cast<std::size_t>(tri[1])] >= 0 ||
        topo.interface_pos[static_cast<std::size_t>(tri[2])] >= 0)
      band.push_back(e);
  }
  for (std::size_t i = 0; i < nl; ++i) {
    const auto v = static_cast<std::size_t>(loop[i]);
    bool inner = false, outer = false;
    for (int e : topo.incidence.of(v)) (mesh.region(static_cast<std::size_t>(e)) == 2 ? inner : outer) = true;
    if (!inner || !outer) throw MeshError("interface vertex without elements on both sides");
  }

  InterfaceTraces out;
  out.tangential.assign(nt + 1, std::vector<double>(nl, 0.0));
  out.flux_y.assign(nt + 1, std::vector<double>(nl, 0.0));
  out.flux_p.assign(nt + 1, std::vector<double>(nl, 0.0));
  for (std::size_t n = 1; n <= nt; ++n) {
    const auto& yn = y[n];
    const auto& yo = y[n - 1];
    const auto& pn = p[n - 1];
    const auto& po = p[n];
    const auto& bn = ybar[n];
    for (std::size_t i = 0; i < nl; ++i) {
      const auto a = static_cast<std::size_t>(loop[i]);
      const auto b = static_cast<std::size_t>(loop[(i + 1) % nl]);
      const double len2 = dot(mesh.vertex(b) - mesh.vertex(a), mesh.vertex(b) - mesh.vertex(a));
      out.tangential[n][i] = (yn[b] - yn[a]) * (pn[b] - pn[a]) / len2;
    }
    auto& qy = out.flux_y[n];
    auto& qp = out.flux_p[n];
    const double t = static_cast<double>(n) * dt;
    for (std::size_t e : band) {
      const auto& tri = mesh.triangle(e);
      const double area = mesh.signed_area(e);
      const auto me = element_mass(area);
      const auto ke = element_stiffness(mesh.gradients(e), area, data.k2);
      for (std::size_t r = 0; r < 3; ++r) {
        const int pos = topo.interface_pos[static_cast<std::size_t>(tri[r])];
        if (pos < 0) continue;
        double ry = 0.0, rp = 0.0;
        for (std::size_t c = 0; c < 3; ++c) {
          const auto j = static_cast<std::size_t>(tri[c]);
          double src = 0.0;
          if (data.source) src = data.source.value(t, mesh.vertex(j));
          ry += me[r * 3 + c] * ((yn[j] - yo[j]) / dt - src) + ke[r * 3 + c] * yn[j];
          rp += me[r * 3 + c] * ((pn[j] - po[j]) / dt + yn[j] - bn[j]) + ke[r * 3 + c] * pn[j];
        }
        qy[static_cast<std::size_t>(pos)] += ry;
        qp[static_cast<std::size_t>(pos)] += rp;
      }
    }
    for (std::size_t i = 0; i < nl; ++i) {
      qy[i] /= geo[i].arc_length;
      qp[i] /= geo[i].arc_length;
    }
  }
  return out;
}

}  // namespace

SurfaceDensity assemble_boundary_derivative(const TriMesh& mesh, const ModelData& data, const TimeField& y,
                                            const TimeField& p, const TimeField& ybar) {
  const auto tr = interface_traces(mesh, data, y, p, ybar);
  const std::size_t nl = mesh.interface_loop().size();
  const double jump = data.k2 - data.k1;
  const double flux_weight = 1.0 / data.k1 - 1.0 / data.k2;
  SurfaceDensity density{std::vector<double>(nl, 0.0), mesh.id()};
  for (std::size_t n = 1; n < tr.tangential.size(); ++n)
    for (std::size_t i = 0; i < nl; ++i) {
      const double tang = 0.5 * (tr.tangential[n][i] + tr.tangential[n][(i + nl - 1) % nl]);
      density.values[i] += y.dt * (jump * tang + flux_weight * tr.flux_y[n][i] * tr.flux_p[n][i]);
    }
  return density;
}

std::vector<double> interface_edge_density(const TriMesh& mesh, const ModelData& data, const TimeField& y,
                                           const TimeField& p, const TimeField& ybar) {
  const auto tr = interface_traces(mesh, data, y, p, ybar);
  const std::size_t nl = mesh.interface_loop().size();
  const double jump = data.k2 - data.k1;
  const double flux_weight = 1.0 / data.k1 - 1.0 / data.k2;
  std::vector<double> out(nl, 0.0);
  for (std::size_t n = 1; n < tr.tangential.size(); ++n)
    for (std::size_t i = 0; i < nl; ++i) {
      const std::size_t j = (i + 1) % nl;
      const double normal = 0.5 * (tr.flux_y[n][i] * tr.flux_p[n][i] + tr.flux_y[n][j] * tr.flux_p[n][j]);
      out[i] += y.dt * (jump * tr.tangential[n][i] + flux_weight * normal);
    }
  return out;
}

ShapeLoad assemble_observation_load(const TriMesh& mesh, const TimeField& y, const TimeField& ybar,
                                    const ObservationGradient& ybar_gradient, bool restrict) {
  check_aligned(y, ybar);
  if (y.mesh_id != mesh.id()) throw MismatchError("fields live on another mesh");
  if (ybar_gradient.size() != y.steps.size()) throw MismatchError("observation gradient has the wrong number of steps");
  const SparseSpd mass = assemble_mass(mesh);
  const std::size_t nv = mesh.num_vertices();
  ShapeLoad load = ShapeLoad::zeros(mesh);
  std::vector<double> misfit(nv), weighted(nv);
  for (std::size_t n = 1; n <= y.num_steps(); ++n) {
    if (ybar_gradient[n].size() != nv) throw MismatchError("observation gradient has the wrong size");
    for (std::size_t v = 0; v < nv; ++v) misfit[v] = y[n][v] - ybar[n][v];
    kernels::spmv(mass, misfit, weighted);
    for (std::size_t v = 0; v < nv; ++v) {
      load.values[2 * v] -= y.dt * weighted[v] * ybar_gradient[n][v].x;
      load.values[2 * v + 1] -= y.dt * weighted[v] * ybar_gradient[n][v].y;
    }
  }
  const auto& topo = mesh.topology();
  for (std::size_t v = 0; v < nv; ++v) {
    if (topo.on_outer[v] || (restrict && !topo.near_interface[v])) {
      load.values[2 * v] = 0.0;
      load.values[2 * v + 1] = 0.0;
    }
  }
  load.restricted = restrict;
  return load;
}

double boundary_directional_value(const TriMesh& mesh, const SurfaceDensity& density, const DeformField& v) {
  if (density.mesh_id != mesh.id() || v.mesh_id != mesh.id()) throw MismatchError("density or field on another mesh");
  const auto geo = interface_geometry(mesh);
  const auto loop = mesh.interface_loop();
  double sum = 0.0;
  for (std::size_t i = 0; i < loop.size(); ++i)
    sum += density.values[i] * dot(v.at(static_cast<std::size_t>(loop[i])), geo[i].normal) * geo[i].arc_length;
  return sum;
}

ShapeLoad assemble_perimeter_load(const TriMesh& mesh, double mu_reg) {
  if (mu_reg < 0.0) throw Error("regularization weight must be non-negative");
  ShapeLoad load = ShapeLoad::zeros(mesh);
  load.restricted = true;
  if (mu_reg == 0.0) return load;
  const auto loop = mesh.interface_loop();
  for (std::size_t i = 0; i < loop.size(); ++i) {
    const auto a = static_cast<std::size_t>(loop[i]);
    const auto b = static_cast<std::size_t>(loop[(i + 1) % loop.size()]);
    const Vec2 d = mesh.vertex(b) - mesh.vertex(a);
    const Vec2 t = (mu_reg / norm(d)) * d;
    load.values[2 * a] -= t.x;
    load.values[2 * a + 1] -= t.y;
    load.values[2 * b] += t.x;
    load.values[2 * b + 1] += t.y;
  }
  return load;
}

double directional_value(const ShapeLoad& load, const DeformField& v) {
  if (load.mesh_id != v.mesh_id || load.values.size() != v.values.size())
    throw MismatchError("load and field live on different meshes");
  return kernels::dot(load.values, v.values);
}

}  // namespace shapeopt
