#include <gtest/gtest.h>
#include <omp.h>

#include <random>

#include "shapeopt/fem.hpp"
#include "shapeopt/kernels.hpp"
#include "shapeopt/mesh.hpp"

namespace shapeopt {
namespace {

struct KernelFixture : ::testing::Test {
  TriMesh mesh = generate_interface_mesh(ellipse_profile(0.6, 0.4), edge_length_for_cells(3000));
  Incidence incidence = Incidence::build(mesh.num_vertices(), mesh.triangles());
  std::mt19937_64 rng{11};

  std::vector<double> random(std::size_t n) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> v(n);
    for (double& x : v) x = u(rng);
    return v;
  }
};

TEST_F(KernelFixture, AssemblyMatchesSerialBitForBit) {
  for (int block : {1, 2}) {
    const std::size_t local = 3 * static_cast<std::size_t>(block);
    const auto elems = random(mesh.num_triangles() * local * local);
    CsrMatrix par = kernels::make_pattern(mesh.num_vertices(), mesh.triangles(), block);
    CsrMatrix ser = par;
    kernels::assemble_into(par, mesh.triangles(), incidence, block, elems);
    kernels::serial::assemble_into(ser, mesh.triangles(), block, elems);
    EXPECT_EQ(par.val, ser.val) << "block " << block;

    const auto vecs = random(mesh.num_triangles() * local);
    std::vector<double> a(mesh.num_vertices() * static_cast<std::size_t>(block)), b(a.size());
    kernels::assemble_vector(a, mesh.triangles(), incidence, block, vecs);
    kernels::serial::assemble_vector(b, mesh.triangles(), block, vecs);
    EXPECT_EQ(a, b);
  }
}

TEST_F(KernelFixture, SpmvAndAxpyMatchSerial) {
  const SparseSpd k = assemble_stiffness(mesh, 1.0, 0.001);
  const auto x = random(k.rows);
  std::vector<double> y1(k.rows), y2(k.rows);
  kernels::spmv(k, x, y1);
  kernels::serial::spmv(k, x, y2);
  EXPECT_EQ(y1, y2);
  kernels::axpy(0.3, x, y1);
  kernels::serial::axpy(0.3, x, y2);
  EXPECT_EQ(y1, y2);
}

TEST_F(KernelFixture, DotIsThreadCountInvariantAndCloseToSerial) {
  const auto a = random(100000), b = random(100000);
  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  const double one = kernels::dot(a, b);
  omp_set_num_threads(4);
  const double four = kernels::dot(a, b);
  omp_set_num_threads(saved);
  EXPECT_EQ(one, four);
  EXPECT_NEAR(one, kernels::serial::dot(a, b), 1e-10 * std::abs(one) + 1e-12);
}

TEST_F(KernelFixture, PatternIsSortedAndSymmetric) {
  const CsrMatrix p = kernels::make_pattern(mesh.num_vertices(), mesh.triangles(), 2);
  for (std::size_t i = 0; i < p.rows; ++i) {
    for (std::size_t k = p.row_ptr[i] + 1; k < p.row_ptr[i + 1]; ++k) EXPECT_LT(p.col[k - 1], p.col[k]);
    for (std::size_t k = p.row_ptr[i]; k < p.row_ptr[i + 1]; ++k)
      EXPECT_GE(p.find(static_cast<std::size_t>(p.col[k]), i), 0);
  }
}

}  // namespace
}  // namespace shapeopt
