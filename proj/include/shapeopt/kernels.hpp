#pragma once

// Data-parallel kernels shared by every PDE solve. Each kernel has an OpenMP
// implementation (namespace kernels) and a plain serial reference
// (namespace kernels::serial) that the tests and the benchmark compare
// against. The OpenMP versions are deterministic: results do not depend on
// the thread count.

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace shapeopt {

/// Compressed sparse row matrix with sorted column indices per row.
struct CsrMatrix {
  std::size_t rows = 0;
  std::vector<std::size_t> row_ptr;  // size rows + 1
  std::vector<int> col;
  std::vector<double> val;

  std::size_t nnz() const { return col.size(); }
  /// Entry (i, j), zero if not stored.
  double at(std::size_t i, std::size_t j) const;
  /// Position of (i, j) in col/val, or -1.
  std::ptrdiff_t find(std::size_t i, std::size_t j) const;
  double diagonal(std::size_t i) const { return at(i, i); }
  double norm_inf() const;
};

/// Vertex-to-element incidence in CSR form; element lists are ascending.
struct Incidence {
  std::vector<std::size_t> offset;
  std::vector<int> element;

  static Incidence build(std::size_t num_vertices, std::span<const std::array<int, 3>> triangles);
  std::span<const int> of(std::size_t vertex) const {
    return {element.data() + offset[vertex], offset[vertex + 1] - offset[vertex]};
  }
};

namespace kernels {

/// Sparsity pattern of a P1 operator with `block` unknowns per vertex
/// (interleaved: dof = vertex * block + component). Values are zero.
CsrMatrix make_pattern(std::size_t num_vertices, std::span<const std::array<int, 3>> triangles,
                       int block);

/// Adds element matrices (row-major, (3*block)^2 entries each, local dof
/// order vertex-major) into `matrix`. Gathers per row over incident elements
/// in ascending element order, so the result is bit-identical to
/// serial::assemble_into.
void assemble_into(CsrMatrix& matrix, std::span<const std::array<int, 3>> triangles,
                   const Incidence& incidence, int block, std::span<const double> element_matrices);

/// Same gather for element vectors (3*block entries each).
void assemble_vector(std::span<double> out, std::span<const std::array<int, 3>> triangles,
                     const Incidence& incidence, int block, std::span<const double> element_vectors);

void spmv(const CsrMatrix& a, std::span<const double> x, std::span<double> y);
double dot(std::span<const double> a, std::span<const double> b);
/// y <- y + alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);
/// y <- x + beta * y
void xpby(std::span<const double> x, double beta, std::span<double> y);

namespace serial {

void assemble_into(CsrMatrix& matrix, std::span<const std::array<int, 3>> triangles, int block,
                   std::span<const double> element_matrices);
void assemble_vector(std::span<double> out, std::span<const std::array<int, 3>> triangles, int block,
                     std::span<const double> element_vectors);
void spmv(const CsrMatrix& a, std::span<const double> x, std::span<double> y);
double dot(std::span<const double> a, std::span<const double> b);
void axpy(double alpha, std::span<const double> x, std::span<double> y);

}  // namespace serial
}  // namespace kernels
}  // namespace shapeopt
