#include <gtest/gtest.h>

#include <algorithm>
#include <numbers>
#include <random>

#include "shapeopt/optimizer.hpp"
#include "shapeopt/shape_calculus.hpp"
#include "shapeopt/surface_metric.hpp"
#include "shapeopt/target.hpp"

namespace shapeopt {
namespace {

DeformField smooth_patch_field(const TriMesh& mesh, std::mt19937_64& rng, const std::vector<char>& skip = {}) {
  std::normal_distribution<double> nd;
  const double a[6] = {nd(rng), nd(rng), nd(rng), nd(rng), nd(rng), nd(rng)};
  DeformField v = DeformField::zeros(mesh);
  for (std::size_t i = 0; i < mesh.num_vertices(); ++i) {
    if (!mesh.topology().near_interface[i] || (!skip.empty() && skip[i])) continue;
    const Vec2 x = mesh.vertex(i);
    v.set(i, {a[0] * std::sin(3 * x.x + x.y) + a[2] + a[4] * x.y, a[1] * std::cos(2 * x.y - x.x) + a[3] + a[5] * x.x});
  }
  return v;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

struct ShapeCalculus : ::testing::Test {
  static inline ExperimentConfig cfg = [] {
    ExperimentConfig c;
    c.cells = 4000;
    c.cg_tol = 1e-13;
    return c;
  }();
  static inline const TargetData* target = nullptr;
  static void SetUpTestSuite() { target = new TargetData(generate_target_data(cfg)); }
  static void TearDownTestSuite() { delete target; }

  TriMesh mesh = initial_mesh(cfg);
  ModelData data = model_data(cfg);
  TimeField ybar = interpolate_observation(*target, mesh);
  TimeField y = solve_state(mesh, data);
  TimeField p = solve_adjoint(mesh, data, y, ybar);
};

TEST_F(ShapeCalculus, MatchingDataGivesZeroLoad) {
  const TimeField zero = solve_adjoint(mesh, data, y, y);
  for (bool restrict : {true, false}) {
    const ShapeLoad load = assemble_domain_derivative(mesh, data, y, zero, y, restrict);
    for (double v : load.values) EXPECT_EQ(v, 0.0);
  }
}

TEST_F(ShapeCalculus, DomainFormIsExactWithCarriedObservation) {
  const ShapeLoad load = assemble_domain_derivative(mesh, data, y, p, ybar, true);
  std::mt19937_64 rng(21);
  std::vector<double> err;
  for (int k = 0; k < 10; ++k) {
    const DeformField v = smooth_patch_field(mesh, rng);
    const auto j = [&](double eps) {
      const TriMesh m = apply_deformation(mesh, v, eps);
      TimeField yb = ybar;
      yb.mesh_id = m.id();
      return objective(m, solve_state(m, data), yb, 0.0).tracking;
    };
    const double fd = (j(1e-6) - j(-1e-6)) / 2e-6;
    err.push_back(std::abs(directional_value(load, v) - fd) / std::abs(fd));
  }
  EXPECT_LE(median(err), 1e-6);
}

TEST_F(ShapeCalculus, TotalLoadIsExactWhereObjectiveIsSmooth) {
  const ObservationGradient gb = interpolate_observation_gradient(*target, mesh);
  const ElasticityOperator op(mesh, cfg.young, cfg.poisson, data.solver);
  const auto grad = shape_gradient_volume(mesh, data, y, p, ybar, &gb, cfg.mu_reg, true, op);
  const Interpolation interp(target->mesh, mesh.vertices());
  std::vector<char> kink(mesh.num_vertices());
  for (std::size_t i = 0; i < kink.size(); ++i) {
    const auto& b = interp.locations()[i].bary;
    kink[i] = std::min({b[0], b[1], b[2]}) < 1e-10;
  }
  std::mt19937_64 rng(22);
  std::vector<double> err;
  for (int k = 0; k < 10; ++k) {
    const DeformField v = smooth_patch_field(mesh, rng, kink);
    const auto J = [&](double eps) {
      const TriMesh m = apply_deformation(mesh, v, eps);
      return objective(m, solve_state(m, data), interpolate_observation(*target, m), cfg.mu_reg).total;
    };
    const double fd = (J(1e-6) - J(-1e-6)) / 2e-6;
    err.push_back(std::abs(directional_value(grad.load, v) - fd) / std::abs(fd));
  }
  EXPECT_LE(median(err), 1e-6);
}

TEST_F(ShapeCalculus, RestrictionOnlyTouchesFarVertices) {
  const ShapeLoad r = assemble_domain_derivative(mesh, data, y, p, ybar, true);
  const ShapeLoad u = assemble_domain_derivative(mesh, data, y, p, ybar, false);
  EXPECT_TRUE(r.restricted);
  EXPECT_FALSE(u.restricted);
  const auto& topo = mesh.topology();
  for (std::size_t v = 0; v < mesh.num_vertices(); ++v) {
    if (topo.on_outer[v]) {
      EXPECT_EQ(u.at(v).x, 0.0);
      EXPECT_EQ(u.at(v).y, 0.0);
    }
    if (topo.near_interface[v]) {
      EXPECT_EQ(r.at(v).x, u.at(v).x);
      EXPECT_EQ(r.at(v).y, u.at(v).y);
    } else {
      EXPECT_EQ(r.at(v).x, 0.0);
      EXPECT_EQ(r.at(v).y, 0.0);
    }
  }
}

TEST(ShapeCalculusRefinement, UnrestrictedResidualShrinks) {
  ExperimentConfig cfg;
  cfg.target_cells = 60000;
  const TargetData target = generate_target_data(cfg);
  const ModelData data = model_data(cfg);
  std::vector<double> l2, mx;
  for (int cells : {1000, 4000, 16000}) {
    ExperimentConfig c = cfg;
    c.cells = cells;
    const TriMesh mesh = initial_mesh(c);
    const TimeField ybar = interpolate_observation(target, mesh);
    const TimeField y = solve_state(mesh, data);
    const TimeField p = solve_adjoint(mesh, data, y, ybar);
    const ShapeLoad u = assemble_domain_derivative(mesh, data, y, p, ybar, false);
    double s = 0.0, m = 0.0;
    for (std::size_t v = 0; v < mesh.num_vertices(); ++v) {
      if (mesh.topology().near_interface[v]) continue;
      s += dot(u.at(v), u.at(v));
      m = std::max(m, norm(u.at(v)));
    }
    l2.push_back(std::sqrt(s));
    mx.push_back(m);
  }
  for (std::size_t i = 1; i < l2.size(); ++i) {
    EXPECT_LE(l2[i] / l2[i - 1], 0.9);
    EXPECT_LE(mx[i] / mx[i - 1], 0.45);
  }
}

TEST_F(ShapeCalculus, BoundaryFormVanishesWithoutJumpOrAdjoint) {
  ModelData same = data;
  same.k2 = same.k1;
  const TimeField ys = solve_state(mesh, same);
  const TimeField ps = solve_adjoint(mesh, same, ys, ybar);
  for (double v : assemble_boundary_derivative(mesh, same, ys, ps, ybar).values) EXPECT_NEAR(v, 0.0, 1e-14);
  const TimeField zero = solve_adjoint(mesh, data, y, y);
  for (double v : assemble_boundary_derivative(mesh, data, y, zero, y).values) EXPECT_EQ(v, 0.0);
}

TEST_F(ShapeCalculus, PerimeterLoad) {
  for (double v : assemble_perimeter_load(mesh, 0.0).values) EXPECT_EQ(v, 0.0);
  const double mu = 1e-6;
  const ShapeLoad load = assemble_perimeter_load(mesh, mu);
  std::mt19937_64 rng(23);
  for (int k = 0; k < 5; ++k) {
    const DeformField v = smooth_patch_field(mesh, rng);
    const double fd = mu * (interface_perimeter(apply_deformation(mesh, v, 1e-6)) -
                            interface_perimeter(apply_deformation(mesh, v, -1e-6))) / 2e-6;
    EXPECT_NEAR(directional_value(load, v), fd, 1e-8 * std::abs(fd));
  }
}

TEST(ShapeCalculusCircle, PerimeterDerivativeAlongNormal) {
  const TriMesh mesh = generate_interface_mesh(circle_profile(0.5), 0.02);
  const ElasticityOperator op(mesh, 0.1, 0.01);
  const std::vector<double> one(mesh.interface_loop().size(), 1.0);
  const DeformField n = dirichlet_deformation(op, one, mesh);
  const double mu = 1e-6;
  EXPECT_NEAR(directional_value(assemble_perimeter_load(mesh, mu), n), mu * 2 * std::numbers::pi, mu * 1e-3);
}

TEST_F(ShapeCalculus, DirectionalValueIsLinear) {
  const ShapeLoad load = assemble_domain_derivative(mesh, data, y, p, ybar, true);
  std::mt19937_64 rng(24);
  const DeformField a = smooth_patch_field(mesh, rng), b = smooth_patch_field(mesh, rng);
  DeformField c = DeformField::zeros(mesh);
  for (std::size_t i = 0; i < c.values.size(); ++i) c.values[i] = 2.0 * a.values[i] - 0.5 * b.values[i];
  const double lhs = directional_value(load, c);
  const double rhs = 2.0 * directional_value(load, a) - 0.5 * directional_value(load, b);
  EXPECT_NEAR(lhs, rhs, 1e-12 * (std::abs(lhs) + 1.0));
  EXPECT_EQ(directional_value(load, DeformField::zeros(mesh)), 0.0);
  EXPECT_EQ(directional_value(ShapeLoad::zeros(mesh), a), 0.0);
}

TEST(ShapeCalculusSign, SmallCircleGrowsTowardTarget) {
  ExperimentConfig cfg;
  cfg.initial_shape = ShapeSpec::parse("circle 0.4");
  const TargetData target = generate_target_data(cfg);
  const TriMesh mesh = initial_mesh(cfg);
  const ModelData data = model_data(cfg);
  const TimeField ybar = interpolate_observation(target, mesh);
  const ObservationGradient gb = interpolate_observation_gradient(target, mesh);
  const TimeField y = solve_state(mesh, data);
  const TimeField p = solve_adjoint(mesh, data, y, ybar);
  const ElasticityOperator op(mesh, cfg.young, cfg.poisson, data.solver);
  const auto geo = interface_geometry(mesh);
  const auto loop = mesh.interface_loop();
  for (const ObservationGradient* g : {&gb, static_cast<const ObservationGradient*>(nullptr)}) {
    const auto grad = shape_gradient_volume(mesh, data, y, p, ybar, g, cfg.mu_reg, true, op);
    double radial = 0.0;
    for (std::size_t i = 0; i < loop.size(); ++i)
      radial -= dot(grad.gradient.at(static_cast<std::size_t>(loop[i])), geo[i].normal);
    EXPECT_GT(radial / static_cast<double>(loop.size()), 0.0);
  }
  const SurfaceDensity dens = assemble_boundary_derivative(mesh, data, y, p, ybar);
  double mean = 0.0;
  for (double v : dens.values) mean += v;
  EXPECT_LT(mean, 0.0);
}

TEST_F(ShapeCalculus, MismatchedFieldsAreRejected) {
  const TriMesh other = apply_deformation(mesh, DeformField::zeros(mesh), 1.0);
  EXPECT_THROW(assemble_domain_derivative(other, data, y, p, ybar, true), MismatchError);
}

}  // namespace
}  // namespace shapeopt
