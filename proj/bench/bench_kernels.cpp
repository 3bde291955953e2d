// Serial reference vs OpenMP kernels on generated interface meshes.
// Argument: approximate number of triangles.

#include <benchmark/benchmark.h>

#include <algorithm>
#include <map>
#include <random>
#include <vector>

#include "shapeopt/fem.hpp"
#include "shapeopt/kernels.hpp"
#include "shapeopt/mesh.hpp"

namespace {

using namespace shapeopt;

struct Fixture {
  TriMesh mesh;
  Incidence incidence;
  CsrMatrix pattern;
  std::vector<double> element_matrices;
  std::vector<double> element_vectors;
  std::vector<double> x;
};

const Fixture& fixture(std::size_t cells) {
  static std::map<std::size_t, Fixture> cache;
  auto it = cache.find(cells);
  if (it != cache.end()) return it->second;
  TriMesh mesh = generate_interface_mesh(circle_profile(0.5), edge_length_for_cells(cells));
  Fixture f{mesh, Incidence::build(mesh.num_vertices(), mesh.triangles()),
            kernels::make_pattern(mesh.num_vertices(), mesh.triangles(), 1), {}, {}, {}};
  for (std::size_t e = 0; e < mesh.num_triangles(); ++e) {
    const auto ke = element_stiffness(mesh.gradients(e), mesh.signed_area(e), 1.0);
    f.element_matrices.insert(f.element_matrices.end(), ke.begin(), ke.end());
    const double a = mesh.signed_area(e) / 3.0;
    f.element_vectors.insert(f.element_vectors.end(), {a, a, a});
  }
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  f.x.resize(mesh.num_vertices());
  for (double& v : f.x) v = u(rng);
  f.pattern = kernels::make_pattern(mesh.num_vertices(), mesh.triangles(), 1);
  kernels::assemble_into(f.pattern, mesh.triangles(), f.incidence, 1, f.element_matrices);
  return cache.emplace(cells, std::move(f)).first->second;
}

void BM_spmv_serial(benchmark::State& state) {
  const auto& f = fixture(state.range(0));
  std::vector<double> y(f.x.size());
  for (auto _ : state) {
    kernels::serial::spmv(f.pattern, f.x, y);
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(state.iterations() * f.pattern.nnz());
}

void BM_spmv_omp(benchmark::State& state) {
  const auto& f = fixture(state.range(0));
  std::vector<double> y(f.x.size());
  for (auto _ : state) {
    kernels::spmv(f.pattern, f.x, y);
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(state.iterations() * f.pattern.nnz());
}

void BM_dot_serial(benchmark::State& state) {
  const auto& f = fixture(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::serial::dot(f.x, f.x));
}

void BM_dot_omp(benchmark::State& state) {
  const auto& f = fixture(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::dot(f.x, f.x));
}

void BM_assemble_serial(benchmark::State& state) {
  const auto& f = fixture(state.range(0));
  CsrMatrix m = kernels::make_pattern(f.mesh.num_vertices(), f.mesh.triangles(), 1);
  for (auto _ : state) {
    std::fill(m.val.begin(), m.val.end(), 0.0);
    kernels::serial::assemble_into(m, f.mesh.triangles(), 1, f.element_matrices);
    benchmark::DoNotOptimize(m.val.data());
  }
}

void BM_assemble_omp(benchmark::State& state) {
  const auto& f = fixture(state.range(0));
  CsrMatrix m = kernels::make_pattern(f.mesh.num_vertices(), f.mesh.triangles(), 1);
  for (auto _ : state) {
    std::fill(m.val.begin(), m.val.end(), 0.0);
    kernels::assemble_into(m, f.mesh.triangles(), f.incidence, 1, f.element_matrices);
    benchmark::DoNotOptimize(m.val.data());
  }
}

void BM_load_serial(benchmark::State& state) {
  const auto& f = fixture(state.range(0));
  std::vector<double> out(f.mesh.num_vertices());
  for (auto _ : state) {
    std::fill(out.begin(), out.end(), 0.0);
    kernels::serial::assemble_vector(out, f.mesh.triangles(), 1, f.element_vectors);
    benchmark::DoNotOptimize(out.data());
  }
}

void BM_load_omp(benchmark::State& state) {
  const auto& f = fixture(state.range(0));
  std::vector<double> out(f.mesh.num_vertices());
  for (auto _ : state) {
    std::fill(out.begin(), out.end(), 0.0);
    kernels::assemble_vector(out, f.mesh.triangles(), f.incidence, 1, f.element_vectors);
    benchmark::DoNotOptimize(out.data());
  }
}

}  // namespace

#define SIZES Arg(1000)->Arg(4000)->Arg(25000)
BENCHMARK(BM_spmv_serial)->SIZES;
BENCHMARK(BM_spmv_omp)->SIZES;
BENCHMARK(BM_dot_serial)->SIZES;
BENCHMARK(BM_dot_omp)->SIZES;
BENCHMARK(BM_assemble_serial)->SIZES;
BENCHMARK(BM_assemble_omp)->SIZES;
BENCHMARK(BM_load_serial)->SIZES;
BENCHMARK(BM_load_omp)->SIZES;

BENCHMARK_MAIN();
