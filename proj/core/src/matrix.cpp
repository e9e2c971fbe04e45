#include "recex/matrix.hpp"

#include <cmath>
#include <cstring>

#include "recex/errors.hpp"

namespace recex {

namespace {
void require(bool ok, const char* msg) {
  if (!ok) throw NumericError(msg);
}
}  // namespace

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
  require(a.cols == b.rows, "matmul: inner dimensions differ");
  DenseMatrix c(a.rows, b.cols);
  for (std::size_t i = 0; i < a.rows; ++i) {
    const double* ai = a.v.data() + i * a.cols;
    double* ci = c.v.data() + i * c.cols;
    for (std::size_t k = 0; k < a.cols; ++k) {
      const double aik = ai[k];
      if (aik == 0.0) continue;
      const double* bk = b.v.data() + k * b.cols;
      for (std::size_t j = 0; j < b.cols; ++j) ci[j] += aik * bk[j];
    }
  }
  return c;
}

DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b) {
  require(a.cols == b.cols, "matmul_nt: inner dimensions differ");
  DenseMatrix c(a.rows, b.rows);
  for (std::size_t i = 0; i < a.rows; ++i) {
    const double* ai = a.v.data() + i * a.cols;
    double* ci = c.v.data() + i * c.cols;
    for (std::size_t j = 0; j < b.rows; ++j) {
      const double* bj = b.v.data() + j * b.cols;
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols; ++k) s += ai[k] * bj[k];
      ci[j] = s;
    }
  }
  return c;
}

DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b) {
  require(a.rows == b.rows, "matmul_tn: inner dimensions differ");
  DenseMatrix c(a.cols, b.cols);
  for (std::size_t k = 0; k < a.rows; ++k) {
    const double* ak = a.v.data() + k * a.cols;
    const double* bk = b.v.data() + k * b.cols;
    for (std::size_t i = 0; i < a.cols; ++i) {
      const double aki = ak[i];
      if (aki == 0.0) continue;
      double* ci = c.v.data() + i * c.cols;
      for (std::size_t j = 0; j < b.cols; ++j) ci[j] += aki * bk[j];
    }
  }
  return c;
}

void add_inplace(DenseMatrix& a, const DenseMatrix& b) {
  require(a.same_shape(b), "add_inplace: shape mismatch");
  for (std::size_t i = 0; i < a.v.size(); ++i) a.v[i] += b.v[i];
}

void axpy_inplace(DenseMatrix& a, double alpha, const DenseMatrix& b) {
  require(a.same_shape(b), "axpy_inplace: shape mismatch");
  for (std::size_t i = 0; i < a.v.size(); ++i) a.v[i] += alpha * b.v[i];
}

void scale_inplace(DenseMatrix& a, double alpha) {
  for (double& x : a.v) x *= alpha;
}

void matvec(const DenseMatrix& m, std::span<const double> x, std::span<double> y) {
  require(m.cols == x.size() && m.rows == y.size(), "matvec: shape mismatch");
  for (std::size_t i = 0; i < m.rows; ++i) {
    const double* mi = m.v.data() + i * m.cols;
    double s = 0.0;
    for (std::size_t k = 0; k < m.cols; ++k) s += mi[k] * x[k];
    y[i] = s;
  }
}

void matvec_t(const DenseMatrix& m, std::span<const double> x, std::span<double> y) {
  require(m.rows == x.size() && m.cols == y.size(), "matvec_t: shape mismatch");
  std::fill(y.begin(), y.end(), 0.0);
  for (std::size_t k = 0; k < m.rows; ++k) {
    const double xk = x[k];
    if (xk == 0.0) continue;
    const double* mk = m.v.data() + k * m.cols;
    for (std::size_t j = 0; j < m.cols; ++j) y[j] += xk * mk[j];
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), "dot: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

bool all_finite(std::span<const double> v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

bool all_finite(const DenseMatrix& m) { return all_finite(std::span<const double>(m.v)); }

uint64_t content_hash(std::span<const double> v, uint64_t h) {
  constexpr uint64_t prime = 0x100000001b3ull;
  for (double x : v) {
    uint64_t bits;
    std::memcpy(&bits, &x, sizeof(bits));
    for (int b = 0; b < 8; ++b) {
      h ^= (bits >> (8 * b)) & 0xff;
      h *= prime;
    }
  }
  return h;
}

uint64_t content_hash(const DenseMatrix& m, uint64_t h) {
  constexpr uint64_t prime = 0x100000001b3ull;
  for (uint64_t dim : {static_cast<uint64_t>(m.rows), static_cast<uint64_t>(m.cols)}) {
    for (int b = 0; b < 8; ++b) {
      h ^= (dim >> (8 * b)) & 0xff;
      h *= prime;
    }
  }
  return content_hash(std::span<const double>(m.v), h);
}

}  // namespace recex
