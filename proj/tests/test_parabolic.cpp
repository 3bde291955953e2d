#include <gtest/gtest.h>

#include <cstdio>
#include <numbers>
#include <random>
#include <string>

#include "shapeopt/parabolic.hpp"

namespace shapeopt {
namespace {

struct Parabolic : ::testing::Test {
  TriMesh mesh = generate_interface_mesh(circle_profile(0.5), edge_length_for_cells(1000));
  ModelData data;

  double max_abs(const std::vector<double>& v, double shift = 0.0) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x - shift));
    return m;
  }
};

TEST_F(Parabolic, UniformDiffusivityReachesSteadyState) {
  data.k2 = 1.0;
  data.final_time = 200.0;
  const TimeField y = solve_state(mesh, data);
  for (std::size_t n = 1; n <= y.num_steps(); ++n)
    for (std::size_t v = 0; v < mesh.num_vertices(); ++v) EXPECT_GE(y[n][v], y[n - 1][v] - 1e-12);
  EXPECT_LE(max_abs(y.steps.back(), 1.0), 1e-3);
}

TEST_F(Parabolic, SteadyInitialStateIsPreserved) {
  data.y0.assign(mesh.num_vertices(), 1.0);
  const TimeField y = solve_state(mesh, data);
  for (const auto& step : y.steps) EXPECT_LE(max_abs(step, 1.0), 1e-9);
}

TEST_F(Parabolic, LowDiffusivityInclusionLags) {
  const TimeField y = solve_state(mesh, data);
  double min1 = 2.0, min2 = 2.0;
  for (std::size_t e = 0; e < mesh.num_triangles(); ++e)
    for (int v : mesh.triangle(e)) {
      double& m = mesh.region(e) == 2 ? min2 : min1;
      m = std::min(m, y.steps.back()[static_cast<std::size_t>(v)]);
    }
  EXPECT_LT(min2, min1);
}

// Undershoot below 0 is a mesh-quality diagnostic (non-acute elements in the
// low-diffusivity region), the upper bound must hold.
TEST_F(Parabolic, DiscreteMaximumBound) {
  const TimeField y = solve_state(mesh, data);
  double lo = 0.0, hi = 0.0;
  for (const auto& step : y.steps)
    for (double v : step) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  RecordProperty("min_nodal_value", std::to_string(lo));
  if (lo < -1e-8) std::printf("diagnostic: min nodal value %.3e below -1e-8\n", lo);
  EXPECT_LE(hi, 1.0 + 1e-8);
  EXPECT_GT(lo, -0.1);
}

TEST_F(Parabolic, MatchingObservationGivesZeroAdjoint) {
  const TimeField y = solve_state(mesh, data);
  const TimeField p = solve_adjoint(mesh, data, y, y);
  for (const auto& step : p.steps) EXPECT_EQ(max_abs(step), 0.0);
  EXPECT_EQ(objective(mesh, y, y, 0.0).total, 0.0);
  EXPECT_NEAR(objective(mesh, y, y, 1e-6).total, 1e-6 * std::numbers::pi, 1e-6 * 1e-2);
}

TEST_F(Parabolic, ObjectiveIsQuadratic) {
  const TimeField y = solve_state(mesh, data);
  TimeField ybar = y, far = y;
  for (std::size_t n = 0; n < y.steps.size(); ++n)
    for (std::size_t v = 0; v < mesh.num_vertices(); ++v) {
      ybar[n][v] = y[n][v] - 0.1 * std::sin(static_cast<double>(v));
      far[n][v] = y[n][v] - 0.2 * std::sin(static_cast<double>(v));
    }
  const double j1 = objective(mesh, y, ybar, 0.0).tracking, j2 = objective(mesh, y, far, 0.0).tracking;
  EXPECT_NEAR(j2, 4.0 * j1, 1e-12 * j2);
}

TEST_F(Parabolic, AdjointGivesInitialConditionGradient) {
  ModelData other = data;
  other.k2 = 0.01;
  TimeField ybar = solve_state(mesh, other);
  const TimeField y = solve_state(mesh, data);
  const TimeField p = solve_adjoint(mesh, data, y, ybar);
  const SparseSpd m = assemble_mass(mesh);
  std::vector<double> mp(mesh.num_vertices());
  kernels::spmv(m, p[0], mp);

  std::mt19937_64 rng(9);
  std::normal_distribution<double> nd;
  std::vector<double> dy(mesh.num_vertices());
  for (double& v : dy) v = nd(rng);
  double predicted = 0.0;
  for (std::size_t v = 0; v < dy.size(); ++v) predicted -= mp[v] * dy[v];

  data.solver.rel_tol = 1e-13;
  const auto J = [&](double eps) {
    ModelData d = data;
    d.y0.resize(dy.size());
    for (std::size_t v = 0; v < dy.size(); ++v) d.y0[v] = eps * dy[v];
    return objective(mesh, solve_state(mesh, d), ybar, 0.0).tracking;
  };
  const double eps = 1e-4;
  const double fd = (J(eps) - J(-eps)) / (2 * eps);
  EXPECT_NEAR(predicted, fd, 1e-6 * std::abs(fd));
}

TEST_F(Parabolic, TerminalAdjointStep) {
  ModelData other = data;
  other.k2 = 0.01;
  const TimeField ybar = solve_state(mesh, other);
  const TimeField y = solve_state(mesh, data);
  data.solver.rel_tol = 1e-13;
  const TimeField p = solve_adjoint(mesh, data, y, ybar);
  const std::size_t n = y.num_steps();
  const HeatOperator op(mesh, data);
  std::vector<double> e(mesh.num_vertices()), rhs(mesh.num_vertices());
  for (std::size_t v = 0; v < e.size(); ++v) e[v] = -y.dt * (y[n][v] - ybar[n][v]);
  kernels::spmv(op.mass(), e, rhs);
  const auto expected = pcg_solve(op.system(), rhs, op.top().homogeneous(), PcgOptions{1e-13});
  for (std::size_t v = 0; v < e.size(); ++v) EXPECT_NEAR(p[n - 1][v], expected.x[v], 1e-12);
  EXPECT_EQ(max_abs(p[n]), 0.0);
}

TEST_F(Parabolic, TrackingConvergesLinearlyInTime) {
  ModelData target = data;
  target.k2 = 0.01;
  std::vector<double> j;
  for (int steps : {30, 60, 120, 240}) {
    data.n_steps = target.n_steps = steps;
    j.push_back(objective(mesh, solve_state(mesh, data), solve_state(mesh, target), 0.0).tracking);
  }
  const double r1 = (j[1] - j[0]) / (j[2] - j[1]), r2 = (j[2] - j[1]) / (j[3] - j[2]);
  EXPECT_NEAR(r1, 2.0, 0.3);
  EXPECT_NEAR(r2, 2.0, 0.3);
}

TEST_F(Parabolic, RerunsAreBitIdentical) {
  const TimeField a = solve_state(mesh, data), b = solve_state(mesh, data);
  EXPECT_EQ(a.steps, b.steps);
}

TEST_F(Parabolic, MismatchedGridsAreRejected) {
  const TimeField y = solve_state(mesh, data);
  ModelData coarse = data;
  coarse.n_steps = 10;
  const TimeField z = solve_state(mesh, coarse);
  EXPECT_THROW(solve_adjoint(mesh, data, y, z), MismatchError);
}

}  // namespace
}  // namespace shapeopt
