#include "shapeopt/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace shapeopt {

std::ptrdiff_t CsrMatrix::find(std::size_t i, std::size_t j) const {
  const auto first = col.begin() + static_cast<std::ptrdiff_t>(row_ptr[i]);
  const auto last = col.begin() + static_cast<std::ptrdiff_t>(row_ptr[i + 1]);
  const auto it = std::lower_bound(first, last, static_cast<int>(j));
  if (it == last || *it != static_cast<int>(j)) return -1;
  return it - col.begin();
}

double CsrMatrix::at(std::size_t i, std::size_t j) const {
  const auto pos = find(i, j);
  return pos < 0 ? 0.0 : val[static_cast<std::size_t>(pos)];
}

double CsrMatrix::norm_inf() const {
  double result = 0.0;
  for (std::size_t i = 0; i < rows; ++i) {
    double row = 0.0;
    for (std::size_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k) row += std::abs(val[k]);
    result = std::max(result, row);
  }
  return result;
}

Incidence Incidence::build(std::size_t num_vertices, std::span<const std::array<int, 3>> triangles) {
  Incidence inc;
  inc.offset.assign(num_vertices + 1, 0);
  for (const auto& t : triangles)
    for (int v : t) ++inc.offset[static_cast<std::size_t>(v) + 1];
  for (std::size_t i = 0; i < num_vertices; ++i) inc.offset[i + 1] += inc.offset[i];
  inc.element.resize(inc.offset.back());
  std::vector<std::size_t> fill(inc.offset.begin(), inc.offset.end() - 1);
  for (std::size_t e = 0; e < triangles.size(); ++e)
    for (int v : triangles[e]) inc.element[fill[static_cast<std::size_t>(v)]++] = static_cast<int>(e);
  return inc;
}

namespace kernels {

namespace {

// Fixed chunking keeps reductions independent of the thread count.
constexpr std::size_t kChunk = 2048;

}  // namespace

CsrMatrix make_pattern(std::size_t num_vertices, std::span<const std::array<int, 3>> triangles,
                       int block) {
  std::vector<std::vector<int>> adjacency(num_vertices);
  for (const auto& t : triangles)
    for (int a : t)
      for (int b : t) adjacency[static_cast<std::size_t>(a)].push_back(b);
  for (auto& row : adjacency) {
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
  }

  const auto b = static_cast<std::size_t>(block);
  CsrMatrix m;
  m.rows = num_vertices * b;
  m.row_ptr.assign(m.rows + 1, 0);
  for (std::size_t v = 0; v < num_vertices; ++v)
    for (std::size_t c = 0; c < b; ++c) m.row_ptr[v * b + c + 1] = adjacency[v].size() * b;
  for (std::size_t r = 0; r < m.rows; ++r) m.row_ptr[r + 1] += m.row_ptr[r];
  m.col.resize(m.row_ptr.back());
  m.val.assign(m.row_ptr.back(), 0.0);
  for (std::size_t v = 0; v < num_vertices; ++v) {
    for (std::size_t c = 0; c < b; ++c) {
      std::size_t k = m.row_ptr[v * b + c];
      for (int w : adjacency[v])
        for (std::size_t d = 0; d < b; ++d) m.col[k++] = static_cast<int>(static_cast<std::size_t>(w) * b + d);
    }
  }
  return m;
}

void assemble_into(CsrMatrix& matrix, std::span<const std::array<int, 3>> triangles,
                   const Incidence& incidence, int block, std::span<const double> element_matrices) {
  const std::size_t b = static_cast<std::size_t>(block);
  const std::size_t nloc = 3 * b;
  const std::size_t num_vertices = incidence.offset.size() - 1;
#pragma omp parallel for schedule(static)
  for (std::size_t v = 0; v < num_vertices; ++v) {
    for (int e : incidence.of(v)) {
      const auto& tri = triangles[static_cast<std::size_t>(e)];
      std::size_t a = 0;
      while (static_cast<std::size_t>(tri[a]) != v) ++a;
      const double* ke = element_matrices.data() + static_cast<std::size_t>(e) * nloc * nloc;
      for (std::size_t c = 0; c < b; ++c) {
        const std::size_t row = v * b + c;
        const std::size_t lrow = a * b + c;
        for (std::size_t j = 0; j < 3; ++j)
          for (std::size_t d = 0; d < b; ++d) {
            const auto pos = matrix.find(row, static_cast<std::size_t>(tri[j]) * b + d);
            matrix.val[static_cast<std::size_t>(pos)] += ke[lrow * nloc + j * b + d];
          }
      }
    }
  }
}

void assemble_vector(std::span<double> out, std::span<const std::array<int, 3>> triangles,
                     const Incidence& incidence, int block, std::span<const double> element_vectors) {
  const std::size_t b = static_cast<std::size_t>(block);
  const std::size_t num_vertices = incidence.offset.size() - 1;
#pragma omp parallel for schedule(static)
  for (std::size_t v = 0; v < num_vertices; ++v) {
    for (int e : incidence.of(v)) {
      const auto& tri = triangles[static_cast<std::size_t>(e)];
      std::size_t a = 0;
      while (static_cast<std::size_t>(tri[a]) != v) ++a;
      for (std::size_t c = 0; c < b; ++c)
        out[v * b + c] += element_vectors[static_cast<std::size_t>(e) * 3 * b + a * b + c];
    }
  }
}

void spmv(const CsrMatrix& a, std::span<const double> x, std::span<double> y) {
  const std::size_t n = a.rows;
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (std::size_t k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k)
      sum += a.val[k] * x[static_cast<std::size_t>(a.col[k])];
    y[i] = sum;
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size();
  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  std::vector<double> partial(chunks, 0.0);
#pragma omp parallel for schedule(static)
  for (std::size_t c = 0; c < chunks; ++c) {
    const std::size_t end = std::min(n, (c + 1) * kChunk);
    double s = 0.0;
    for (std::size_t i = c * kChunk; i < end; ++i) s += a[i] * b[i];
    partial[c] = s;
  }
  double sum = 0.0;
  for (double s : partial) sum += s;
  return sum;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  const std::size_t n = x.size();
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void xpby(std::span<const double> x, double beta, std::span<double> y) {
  const std::size_t n = x.size();
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < n; ++i) y[i] = x[i] + beta * y[i];
}

namespace serial {

void assemble_into(CsrMatrix& matrix, std::span<const std::array<int, 3>> triangles, int block,
                   std::span<const double> element_matrices) {
  const std::size_t b = static_cast<std::size_t>(block);
  const std::size_t nloc = 3 * b;
  for (std::size_t e = 0; e < triangles.size(); ++e) {
    const auto& tri = triangles[e];
    const double* ke = element_matrices.data() + e * nloc * nloc;
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t c = 0; c < b; ++c)
        for (std::size_t j = 0; j < 3; ++j)
          for (std::size_t d = 0; d < b; ++d) {
            const auto pos = matrix.find(static_cast<std::size_t>(tri[i]) * b + c,
                                         static_cast<std::size_t>(tri[j]) * b + d);
            matrix.val[static_cast<std::size_t>(pos)] += ke[(i * b + c) * nloc + j * b + d];
          }
  }
}

void assemble_vector(std::span<double> out, std::span<const std::array<int, 3>> triangles, int block,
                     std::span<const double> element_vectors) {
  const std::size_t b = static_cast<std::size_t>(block);
  for (std::size_t e = 0; e < triangles.size(); ++e)
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t c = 0; c < b; ++c)
        out[static_cast<std::size_t>(triangles[e][i]) * b + c] += element_vectors[e * 3 * b + i * b + c];
}

void spmv(const CsrMatrix& a, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < a.rows; ++i) {
    double sum = 0.0;
    for (std::size_t k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k)
      sum += a.val[k] * x[static_cast<std::size_t>(a.col[k])];
    y[i] = sum;
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

}  // namespace serial
}  // namespace kernels
}  // namespace shapeopt
