#pragma once

#include <cmath>
#include <numbers>
#include <span>

#include "recex/matrix.hpp"

// Row-level kernels shared by the batched forward, the backward pass and the
// incremental decoder. Keeping one accumulation order everywhere is what
// makes cached decoding bit-identical to the full forward.
namespace recex::lmops {

inline constexpr double kLnEps = 1e-5;
// tanh-approximation GELU constants
inline const double kGeluScale = std::sqrt(2.0 / std::numbers::pi);
inline constexpr double kGeluCubic = 0.044715;

void layernorm_row(std::span<const double> x, std::span<const double> gain,
                   std::span<const double> bias, std::span<double> out,
                   double& mean_out, double& rstd_out);

double gelu(double x);
double gelu_grad(double x);

void project_row(const DenseMatrix& w, std::span<const double> bias,
                 std::span<const double> x, std::span<double> out);

void add_injection_row(const DenseMatrix& w, std::span<const double> a,
                       std::span<double> out);

}  // namespace recex::lmops
