#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "shapeopt/optimizer.hpp"
#include "shapeopt/target.hpp"

namespace shapeopt {
namespace {

const InnerProduct kEuclid = [](std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
};

std::vector<double> random_vector(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  std::vector<double> v(n);
  for (double& x : v) x = nd(rng);
  return v;
}

DeformField random_interior_field(const TriMesh& mesh, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  DeformField v = DeformField::zeros(mesh);
  for (std::size_t i = 0; i < mesh.num_vertices(); ++i)
    if (!mesh.topology().on_outer[i]) v.set(i, {nd(rng), nd(rng)});
  return v;
}

TEST(Transport, IdentityOnNodalArrays) {
  const TriMesh mesh = generate_interface_mesh(circle_profile(0.5), edge_length_for_cells(500));
  std::mt19937_64 rng(1);
  const DeformField v = random_interior_field(mesh, rng);
  const TriMesh moved = apply_deformation(mesh, v, 1e-4);
  const DeformField t = transport(v, mesh, moved);
  EXPECT_EQ(t.values, v.values);
  EXPECT_EQ(t.mesh_id, moved.id());
  const DeformField back = transport(t, moved, mesh);
  EXPECT_EQ(back.values, v.values);
  const TriMesh other = generate_interface_mesh(circle_profile(0.5), edge_length_for_cells(800));
  EXPECT_THROW(transport(v, mesh, other), MismatchError);
}

TEST(Lbfgs, EmptyMemoryReturnsGradient) {
  std::mt19937_64 rng(2);
  const auto g = random_vector(12, rng);
  EXPECT_EQ(LbfgsMemory(3).direction(g, kEuclid), g);
  LbfgsMemory none(0);
  EXPECT_FALSE(none.update(random_vector(12, rng), random_vector(12, rng), kEuclid));
  EXPECT_EQ(none.direction(g, kEuclid), g);
}

TEST(Lbfgs, SatisfiesSecantEquation) {
  std::mt19937_64 rng(3);
  const auto s = random_vector(10, rng);
  std::vector<double> y = s;
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = (1.0 + 0.1 * static_cast<double>(i)) * s[i];
  LbfgsMemory m(4);
  ASSERT_TRUE(m.update(s, y, kEuclid));
  const auto h = m.direction(y, kEuclid);
  for (std::size_t i = 0; i < s.size(); ++i) EXPECT_NEAR(h[i], s[i], 1e-12 * std::abs(s[i]) + 1e-14);
}

TEST(Lbfgs, MatchesDenseBfgsOnQuadratic) {
  constexpr int n = 20;
  std::mt19937_64 rng(5);
  std::normal_distribution<double> nd;
  Eigen::MatrixXd B(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) B(i, j) = nd(rng);
  const Eigen::MatrixXd A = B * B.transpose() + n * Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd b(n);
  for (int i = 0; i < n; ++i) b[i] = nd(rng);
  const auto to_std = [](const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); };

  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  LbfgsMemory memory(n);
  std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>> pairs;
  for (int k = 0; k < 15; ++k) {
    const Eigen::VectorXd g = A * x - b;
    Eigen::MatrixXd H = Eigen::MatrixXd::Identity(n, n);
    if (!pairs.empty()) H *= pairs.back().second.dot(pairs.back().first) / pairs.back().second.squaredNorm();
    for (const auto& [s, y] : pairs) {
      const double rho = 1.0 / y.dot(s);
      const Eigen::MatrixXd V = Eigen::MatrixXd::Identity(n, n) - rho * y * s.transpose();
      H = V.transpose() * H * V + rho * s * s.transpose();
    }
    const Eigen::VectorXd dense = -H * g;
    const auto q = memory.direction(to_std(g), kEuclid);
    double err = 0.0;
    for (int i = 0; i < n; ++i) err += (q[static_cast<std::size_t>(i)] + dense[i]) * (q[static_cast<std::size_t>(i)] + dense[i]);
    EXPECT_LE(std::sqrt(err) / dense.norm(), 1e-10) << "iteration " << k;
    const double alpha = -g.dot(dense) / dense.dot(A * dense);
    const Eigen::VectorXd s = alpha * dense, y = A * s;
    x += s;
    pairs.emplace_back(s, y);
    ASSERT_TRUE(memory.update(to_std(s), to_std(y), kEuclid));
  }
}

TEST(Lbfgs, CurvatureGuardSkipsBadPairs) {
  std::mt19937_64 rng(6);
  const auto s = random_vector(8, rng);
  std::vector<double> y = s;
  for (double& v : y) v = -v;
  LbfgsMemory m(3);
  EXPECT_FALSE(m.update(s, y, kEuclid));
  std::vector<double> orth(8, 0.0);
  orth[0] = s[1];
  orth[1] = -s[0];
  EXPECT_FALSE(m.update(s, orth, kEuclid));
  EXPECT_TRUE(m.empty());
}

TEST(Lbfgs, RingBufferEvictsOldest) {
  std::mt19937_64 rng(7);
  LbfgsMemory m(3);
  std::vector<std::vector<double>> stored;
  for (int k = 0; k < 5; ++k) {
    auto s = random_vector(6, rng);
    auto y = s;
    for (double& v : y) v *= 2.0 + k;
    stored.push_back(s);
    ASSERT_TRUE(m.update(s, y, kEuclid));
  }
  ASSERT_EQ(m.size(), 3u);
  EXPECT_EQ(m.pairs().front().s, stored[2]);
  EXPECT_EQ(m.pairs().back().s, stored[4]);
}

TEST(Lbfgs, ElasticityMetricSecant) {
  const TriMesh mesh = generate_interface_mesh(circle_profile(0.5), edge_length_for_cells(500));
  const ElasticityOperator op(mesh, 0.1, 0.01);
  std::mt19937_64 rng(9);
  const DeformField s = random_interior_field(mesh, rng);
  DeformField y = s;
  for (std::size_t i = 0; i < y.values.size(); ++i) y.values[i] *= 1.5 + 0.5 * std::sin(static_cast<double>(i));
  LbfgsMemory m(3);
  ASSERT_TRUE(lbfgs_update(m, s, y, op));
  const DeformField h = lbfgs_direction(m, op, y);
  for (std::size_t i = 0; i < s.values.size(); ++i) EXPECT_NEAR(h.values[i], s.values[i], 1e-10);
}

TEST(Schedule, GeometricDecay) {
  EXPECT_DOUBLE_EQ(regularization_schedule(0, 1e-2, 1e-6, 8), 1e-2);
  EXPECT_NEAR(regularization_schedule(4, 1e-2, 1e-6, 8), 1e-4, 1e-16);
  EXPECT_NEAR(regularization_schedule(8, 1e-2, 1e-6, 8), 1e-6, 1e-18);
  EXPECT_EQ(regularization_schedule(20, 1e-2, 1e-6, 8), 1e-6);
  for (int k = 0; k < 8; ++k)
    EXPECT_GT(regularization_schedule(k, 1e-2, 1e-6, 8), regularization_schedule(k + 1, 1e-2, 1e-6, 8));
  EXPECT_EQ(regularization_schedule(0, 1e-2, 1e-6, 0), 1e-6);
  EXPECT_NEAR(regularization_schedule(2, 1e-2, 0.0, 4), 5e-3, 1e-16);
}

struct Runs : ::testing::Test {
  static inline ExperimentConfig cfg{};
  static inline const TargetData* target = nullptr;
  static inline const TriMesh* mesh = nullptr;
  static void SetUpTestSuite() {
    target = new TargetData(generate_target_data(cfg));
    mesh = new TriMesh(initial_mesh(cfg));
  }
  static void TearDownTestSuite() {
    delete target;
    delete mesh;
  }
  static OptimizationResult run(ExperimentConfig c) { return run_optimization(c, *target, *mesh); }
};

TEST_F(Runs, Deterministic) {
  ExperimentConfig c = cfg;
  c.max_iter = 8;
  const auto a = run(c), b = run(c);
  ASSERT_EQ(a.history.size(), b.history.size());
  for (std::size_t i = 0; i < a.history.size(); ++i) {
    EXPECT_EQ(a.history[i].J, b.history[i].J);
    EXPECT_EQ(a.history[i].distance, b.history[i].distance);
    EXPECT_EQ(a.history[i].gradnorm, b.history[i].gradnorm);
  }
  EXPECT_EQ(a.final_gradient.values, b.final_gradient.values);
}

TEST_F(Runs, GradientNormIsTheMetricNorm) {
  ExperimentConfig c = cfg;
  c.max_iter = 0;
  const auto r = run(c);
  ASSERT_EQ(r.history.size(), 1u);
  const ModelData data = model_data(c);
  const TimeField ybar = interpolate_observation(*target, *mesh);
  const TimeField y = solve_state(*mesh, data);
  const TimeField p = solve_adjoint(*mesh, data, y, ybar);
  const ObservationGradient gb = interpolate_observation_gradient(*target, *mesh);
  const ElasticityOperator op(*mesh, c.young, c.poisson, data.solver);
  const auto g = shape_gradient_volume(*mesh, data, y, p, ybar, &gb, c.mu_reg, c.restrict_load, op);
  const double a = std::sqrt(inner(op, g.gradient, g.gradient));
  EXPECT_NEAR(r.history[0].gradnorm, a, 1e-9 * a);
  EXPECT_NEAR(directional_value(g.load, g.gradient), a * a, 1e-8 * a * a);
}

TEST_F(Runs, ObjectiveDecreasesForEveryMethod) {
  for (Method m : {Method::lbfgs, Method::full_bfgs, Method::gradient, Method::surface_lbfgs, Method::surface_gradient}) {
    ExperimentConfig c = cfg;
    c.method = m;
    c.max_iter = 10;
    const auto r = run(c);
    EXPECT_FALSE(r.diverged) << to_string(m);
    for (std::size_t i = 1; i < r.history.size(); ++i) EXPECT_LT(r.history[i].J, r.history[i - 1].J) << to_string(m);
    EXPECT_LT(r.history.back().distance, 0.5 * r.history.front().distance) << to_string(m);
  }
}

TEST_F(Runs, AcceptedStepsRespectTransportAndInjectivityBounds) {
  const auto r = run(cfg);
  ASSERT_FALSE(r.diagnostics.empty());
  for (const auto& d : r.diagnostics) {
    EXPECT_LE(d.transport_change, 0.2) << "iteration " << d.iter;
    EXPECT_LE(d.injectivity, cfg.injectivity_bound + 1e-12) << "iteration " << d.iter;
    EXPECT_LE(d.metric_identity, 1e-8) << "iteration " << d.iter;
  }
}

TEST_F(Runs, StartingAtTheTargetBarelyMoves) {
  ExperimentConfig c = cfg;
  c.initial_shape = ShapeSpec{"circle", {0.5}};
  c.max_iter = 5;
  const TriMesh start = initial_mesh(c);
  const auto r = run_optimization(c, *target, start);
  EXPECT_FALSE(r.diverged);
  EXPECT_LE(r.history.front().distance, 1e-3);
  EXPECT_LE(r.history.back().distance, 2e-3);
  EXPECT_LE(r.history.front().J, 1e-2 * run(ExperimentConfig{cfg}).history.front().J);
}

}  // namespace
}  // namespace shapeopt
