#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <random>

#include "shapeopt/fem.hpp"
#include "shapeopt/parabolic.hpp"

namespace shapeopt {
namespace {

Eigen::MatrixXd dense(const SparseSpd& a) {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(static_cast<long>(a.rows), static_cast<long>(a.rows));
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) d(static_cast<long>(i), a.col[k]) = a.val[k];
  return d;
}

SparseSpd diagonal(const std::vector<double>& d) {
  SparseSpd a;
  a.rows = d.size();
  for (std::size_t i = 0; i <= d.size(); ++i) a.row_ptr.push_back(i);
  for (std::size_t i = 0; i < d.size(); ++i) {
    a.col.push_back(static_cast<int>(i));
    a.val.push_back(d[i]);
  }
  return a;
}

TEST(Fem, ReferenceElementMatrices) {
  const std::array<Vec2, 3> p{Vec2{0, 0}, Vec2{1, 0}, Vec2{0, 1}};
  const double area = 0.5;
  const auto m = element_mass(area);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) EXPECT_DOUBLE_EQ(m[3 * i + j], area / 12.0 * (i == j ? 2.0 : 1.0));
  // hat gradients of the unit right triangle
  const std::array<Vec2, 3> g{Vec2{-1, -1}, Vec2{1, 0}, Vec2{0, 1}};
  const auto k = element_stiffness(g, area, 1.0);
  const double expected[9] = {1, -0.5, -0.5, -0.5, 0.5, 0, -0.5, 0, 0.5};
  for (int i = 0; i < 9; ++i) EXPECT_DOUBLE_EQ(k[i], expected[i]);
  (void)p;
}

TEST(Fem, MassSumsToDomainArea) {
  const TriMesh mesh = generate_interface_mesh(ellipse_profile(0.6, 0.4), 0.1);
  const SparseSpd m = assemble_mass(mesh);
  double sum = 0.0;
  for (double v : m.val) sum += v;
  EXPECT_NEAR(sum, 4.0, 1e-12);
  const auto d = dense(m);
  EXPECT_LE((d - d.transpose()).cwiseAbs().maxCoeff(), 1e-12 * d.cwiseAbs().maxCoeff());
}

TEST(Fem, StiffnessAnnihilatesConstantsAndIsSpd) {
  const TriMesh mesh = generate_interface_mesh(ellipse_profile(0.6, 0.4), 0.1);
  const SparseSpd k = assemble_stiffness(mesh, 1.0, 0.001);
  std::vector<double> one(k.rows, 1.0), out(k.rows);
  kernels::spmv(k, one, out);
  for (double v : out) EXPECT_LE(std::abs(v), 1e-12);
  const auto d = dense(k);
  EXPECT_LE((d - d.transpose()).cwiseAbs().maxCoeff(), 1e-12 * d.cwiseAbs().maxCoeff());
  const SparseSpd sys = add_scaled(assemble_mass(mesh), 0.5, k);
  const auto ds = dense(sys);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  for (int t = 0; t < 20; ++t) {
    Eigen::VectorXd x(ds.rows());
    for (long i = 0; i < x.size(); ++i) x[i] = nd(rng);
    EXPECT_GT(x.dot(ds * x), 0.0);
  }
}

TEST(Fem, EqualDiffusivitiesGiveSingleMaterial) {
  const TriMesh mesh = generate_interface_mesh(ellipse_profile(0.6, 0.4), 0.1);
  const SparseSpd a = assemble_stiffness(mesh, 2.0, 2.0);
  const SparseSpd b = assemble_stiffness(mesh, 1.0, 1.0);
  for (std::size_t i = 0; i < a.val.size(); ++i) EXPECT_DOUBLE_EQ(a.val[i], 2.0 * b.val[i]);
  EXPECT_THROW(assemble_stiffness(mesh, -1.0, 1.0), Error);
}

TEST(Pcg, IdentityInOneIteration) {
  const std::vector<double> b{1, 2, 3, 4};
  const auto r = pcg_solve(diagonal({1, 1, 1, 1}), b, {});
  EXPECT_EQ(r.iterations, 1);
  for (std::size_t i = 0; i < b.size(); ++i) EXPECT_DOUBLE_EQ(r.x[i], b[i]);
}

TEST(Pcg, DiagonalSystem) {
  std::vector<double> d(50), b(50);
  std::mt19937_64 rng(4);
  std::normal_distribution<double> nd;
  for (std::size_t i = 0; i < d.size(); ++i) {
    d[i] = static_cast<double>(i + 1);
    b[i] = nd(rng);
  }
  const auto r = pcg_solve(diagonal(d), b, {}, PcgOptions{1e-12});
  for (std::size_t i = 0; i < d.size(); ++i) EXPECT_NEAR(r.x[i], b[i] / d[i], 1e-12);
}

TEST(Pcg, HeatSystemMatchesDenseSolve) {
  const TriMesh mesh = generate_interface_mesh(circle_profile(0.5), 0.35);
  ASSERT_LE(mesh.num_vertices(), 200u);
  const ModelData data;
  const HeatOperator op(mesh, data);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> nd;
  std::vector<double> rhs(mesh.num_vertices());
  for (double& v : rhs) v = nd(rng);
  const auto r = pcg_solve(op.system(), rhs, op.top(), PcgOptions{1e-12});

  // dense oracle with the same elimination
  const auto a = dense(op.system());
  const long n = a.rows();
  std::vector<long> free;
  for (long i = 0; i < n; ++i)
    if (!op.top().contains(static_cast<std::size_t>(i))) free.push_back(i);
  Eigen::VectorXd fixed = Eigen::VectorXd::Zero(n);
  for (const auto& [dof, value] : op.top().values()) fixed[static_cast<long>(dof)] = value;
  const Eigen::VectorXd shifted = Eigen::Map<const Eigen::VectorXd>(rhs.data(), n) - a * fixed;
  Eigen::MatrixXd af(free.size(), free.size());
  Eigen::VectorXd bf(free.size());
  for (std::size_t i = 0; i < free.size(); ++i) {
    bf[static_cast<long>(i)] = shifted[free[i]];
    for (std::size_t j = 0; j < free.size(); ++j) af(static_cast<long>(i), static_cast<long>(j)) = a(free[i], free[j]);
  }
  const Eigen::VectorXd xf = af.llt().solve(bf);
  double err = 0.0, ref = 0.0;
  for (std::size_t i = 0; i < free.size(); ++i) {
    err += std::pow(r.x[static_cast<std::size_t>(free[i])] - xf[static_cast<long>(i)], 2);
    ref += xf[static_cast<long>(i)] * xf[static_cast<long>(i)];
  }
  EXPECT_LE(std::sqrt(err / ref), 1e-8);
  for (const auto& [dof, value] : op.top().values()) EXPECT_EQ(r.x[dof], value);
}

TEST(Pcg, EnergyDecreasesAndJacobiDoesNotChangeSolution) {
  const TriMesh mesh = generate_interface_mesh(ellipse_profile(0.6, 0.4), 0.1);
  const ModelData data;
  const HeatOperator op(mesh, data);
  const SparseSpd& a = op.system();
  std::vector<double> b(a.rows, 0.0);
  for (std::size_t i = 0; i < b.size(); ++i) b[i] = std::sin(static_cast<double>(i));
  const DirichletSet bc = op.top().homogeneous();
  std::vector<double> energy;
  PcgOptions opt{1e-10};
  opt.on_iterate = [&](int, std::span<const double> x) {
    std::vector<double> ax(x.size());
    kernels::spmv(a, x, ax);
    double e = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
      if (!bc.contains(i)) e += 0.5 * x[i] * ax[i] - x[i] * b[i];
    energy.push_back(e);
  };
  const auto jac = pcg_solve(a, b, bc, opt);
  for (std::size_t i = 1; i < energy.size(); ++i) EXPECT_LE(energy[i], energy[i - 1] + 1e-14 * std::abs(energy[i]));
  PcgOptions plain{1e-10};
  plain.jacobi = false;
  const auto unp = pcg_solve(a, b, bc, plain);
  double diff = 0.0, norm = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    diff = std::max(diff, std::abs(jac.x[i] - unp.x[i]));
    norm = std::max(norm, std::abs(unp.x[i]));
  }
  EXPECT_LE(diff, 1e-8 * norm);
}

TEST(Pcg, IndefiniteInputIsReported) {
  EXPECT_THROW(pcg_solve(diagonal({1, -1, 2}), std::vector<double>{1, 1, 1}, {}), SolverError);
}

TEST(Pcg, IterationLimitIsReported) {
  const TriMesh mesh = generate_interface_mesh(ellipse_profile(0.6, 0.4), 0.1);
  const SparseSpd k = assemble_stiffness(mesh, 1.0, 0.001);
  DirichletSet bc;
  for (std::size_t i = 0; i < mesh.num_vertices(); ++i)
    if (mesh.topology().on_top[i]) bc.set(i, 1.0);
  PcgOptions opt{1e-12};
  opt.max_iter = 2;
  EXPECT_THROW(pcg_solve(k, std::vector<double>(k.rows, 0.0), bc, opt), SolverError);
}

TEST(Interpolation, ReproducesLinearsAndNodalValues) {
  const TriMesh mesh = generate_interface_mesh(ellipse_profile(0.6, 0.4), 0.1);
  std::vector<double> fx(mesh.num_vertices());
  for (std::size_t i = 0; i < fx.size(); ++i) fx[i] = 2.0 * mesh.vertex(i).x - mesh.vertex(i).y;
  std::vector<Vec2> pts{{0.1, 0.2}, {-0.99, 0.99}, {1.0, -1.0}, {0.33, -0.71}, mesh.vertex(17)};
  const auto vals = point_interpolate(mesh, fx, pts);
  for (std::size_t i = 0; i < pts.size(); ++i) EXPECT_NEAR(vals[i], 2.0 * pts[i].x - pts[i].y, 1e-14);
  EXPECT_EQ(vals.back(), fx[17]);
  EXPECT_THROW(point_interpolate(mesh, fx, std::vector<Vec2>{{1.5, 0.0}}), Error);
}

TEST(Interpolation, TransferErrorIsSecondOrder) {
  const auto f = [](Vec2 p) { return std::sin(2 * p.x) * std::cos(3 * p.y); };
  std::vector<double> err;
  for (double h : {0.1, 0.05}) {
    const TriMesh fine = generate_interface_mesh(circle_profile(0.5), h / 2);
    const TriMesh coarse = generate_interface_mesh(ellipse_profile(0.6, 0.4), h);
    std::vector<double> ff(fine.num_vertices());
    for (std::size_t i = 0; i < ff.size(); ++i) ff[i] = f(fine.vertex(i));
    const auto onc = point_interpolate(fine, ff, coarse.vertices());
    const auto back = point_interpolate(coarse, onc, fine.vertices());
    const SparseSpd m = assemble_mass(fine);
    std::vector<double> e(ff.size()), me(ff.size());
    for (std::size_t i = 0; i < e.size(); ++i) e[i] = back[i] - ff[i];
    kernels::spmv(m, e, me);
    err.push_back(std::sqrt(kernels::dot(e, me)));
  }
  EXPECT_GT(err[0] / err[1], 3.0);
}

}  // namespace
}  // namespace shapeopt
