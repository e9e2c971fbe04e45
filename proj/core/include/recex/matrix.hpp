#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace recex {

// Row-major dense matrix of doubles. Everything in this project is 64-bit
// float; desk-scale models are small enough that exact, reproducible tests
// matter more than throughput.
struct DenseMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> v;

  DenseMatrix() = default;
  DenseMatrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), v(r * c, fill) {}

  double& at(std::size_t r, std::size_t c) { return v[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return v[r * cols + c]; }

  std::span<double> row(std::size_t r) { return {v.data() + r * cols, cols}; }
  std::span<const double> row(std::size_t r) const {
    return {v.data() + r * cols, cols};
  }

  std::size_t size() const { return v.size(); }
  void fill(double x) { std::fill(v.begin(), v.end(), x); }

  bool same_shape(const DenseMatrix& o) const {
    return rows == o.rows && cols == o.cols;
  }
};

// C = A * B
DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);
// C = A * B^T. Row i of C depends only on row i of A and is accumulated in
// index order, so single-row products match the batched result bit for bit.
DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b);
// C = A^T * B
DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b);

void add_inplace(DenseMatrix& a, const DenseMatrix& b);
void axpy_inplace(DenseMatrix& a, double alpha, const DenseMatrix& b);
void scale_inplace(DenseMatrix& a, double alpha);

// y = M * x and the transposed form, accumulation in index order.
void matvec(const DenseMatrix& m, std::span<const double> x, std::span<double> y);
void matvec_t(const DenseMatrix& m, std::span<const double> x, std::span<double> y);

double dot(std::span<const double> a, std::span<const double> b);

bool all_finite(const DenseMatrix& m);
bool all_finite(std::span<const double> v);

// FNV-1a over the raw little-endian bytes of the values plus the shape.
// Used for the frozen-parameter contracts; not cryptographic.
uint64_t content_hash(const DenseMatrix& m, uint64_t h = 0xcbf29ce484222325ull);
uint64_t content_hash(std::span<const double> v, uint64_t h = 0xcbf29ce484222325ull);

}  // namespace recex
