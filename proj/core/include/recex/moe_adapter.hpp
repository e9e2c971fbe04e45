#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "recex/gradcheck.hpp"
#include "recex/matrix.hpp"
#include "recex/rng.hpp"

namespace recex {

enum class AdapterMode : uint8_t { inference = 0, training = 1 };

struct MoeConfig {
  uint32_t num_experts = 8;
  uint32_t d_in = 64;    // collaborative embedding dim
  uint32_t d_out = 128;  // language-model hidden dim
  double gate_noise = 0.01;  // std of Gaussian noise on pre-softmax logits
  double dropout = 0.2;      // per-coordinate expert-output dropout
};

// Mixture-of-experts map from the collaborative embedding space into the
// language-model hidden space. Experts are bias-free linear layers mixed by
// a learnable softmax gate. Training mode adds seeded Gaussian noise to the
// gate logits and applies inverted dropout to each expert output; inference
// mode is a pure function of (parameters, input).
struct MoeAdapter {
  MoeConfig cfg;
  AdapterMode mode = AdapterMode::inference;
  std::vector<DenseMatrix> experts;  // each d_out x d_in
  DenseMatrix gate;                  // num_experts x d_in

  // Experts init scaled-normal (std 1/sqrt(d_in)); gate starts at zero so
  // routing begins uniform.
  static MoeAdapter init(const MoeConfig& cfg, Rng& rng);

  std::size_t param_count() const;
  uint64_t param_hash() const;

  // Flat parameter view in a fixed order (experts 0..E-1, then gate);
  // used by the optimizer and the gradient checks.
  std::vector<double> flatten() const;
  void unflatten(std::span<const double> flat);
};

// Forward record; holds what the backward pass needs.
struct AdapterForward {
  std::vector<double> input;       // d_in
  std::vector<double> gate_w;      // post-softmax mixture weights
  DenseMatrix expert_out;          // E x d_out, after dropout
  DenseMatrix dropout_scale;       // E x d_out, 0 or 1/(1-p); ones in inference
  std::vector<double> output;      // d_out
};

// softmax(gate * x + noise); noise only in training mode.
std::vector<double> gate_weights(const MoeAdapter& a, std::span<const double> x, Rng& rng);

// Mixture output sum_e g_e * dropout(W_e x). Pass `rec` to capture the
// forward for a later backward.
std::vector<double> adapt(const MoeAdapter& a, std::span<const double> x, Rng& rng,
                          AdapterForward* rec = nullptr);

struct AdapterGrads {
  std::vector<DenseMatrix> d_experts;
  DenseMatrix d_gate;
  std::vector<double> d_input;

  void accumulate(const AdapterGrads& other);
  std::vector<double> flatten() const;  // same order as MoeAdapter::flatten
};

AdapterGrads adapter_backward(const MoeAdapter& a, const AdapterForward& fwd,
                              std::span<const double> d_output);

// Finite-difference verification helper for d(0.5*||adapt(x) - target||^2).
// Refuses to run on a training-mode adapter (the stochastic forward would
// make central differences meaningless).
GradCheckReport adapter_gradient_check(const MoeAdapter& a, std::span<const double> x,
                                       std::span<const double> target, double eps,
                                       double tol);

}  // namespace recex
