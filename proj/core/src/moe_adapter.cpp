#include "recex/moe_adapter.hpp"

#include <cmath>

#include "recex/errors.hpp"
#include "recex/numerics.hpp"

namespace recex {

MoeAdapter MoeAdapter::init(const MoeConfig& cfg, Rng& rng) {
  if (cfg.num_experts == 0) throw DataError("adapter: need at least one expert");
  MoeAdapter a;
  a.cfg = cfg;
  a.experts.reserve(cfg.num_experts);
  const double std = 1.0 / std::sqrt(static_cast<double>(cfg.d_in));
  for (uint32_t e = 0; e < cfg.num_experts; ++e) {
    DenseMatrix w(cfg.d_out, cfg.d_in);
    rng.fill_normal(w.v, 0.0, std);
    a.experts.push_back(std::move(w));
  }
  a.gate = DenseMatrix(cfg.num_experts, cfg.d_in);  // zeros: uniform routing
  return a;
}

std::size_t MoeAdapter::param_count() const {
  std::size_t n = gate.size();
  for (const auto& w : experts) n += w.size();
  return n;
}

uint64_t MoeAdapter::param_hash() const {
  uint64_t h = 0xcbf29ce484222325ull;
  for (const auto& w : experts) h = content_hash(w, h);
  return content_hash(gate, h);
}

std::vector<double> MoeAdapter::flatten() const {
  std::vector<double> flat;
  flat.reserve(param_count());
  for (const auto& w : experts) flat.insert(flat.end(), w.v.begin(), w.v.end());
  flat.insert(flat.end(), gate.v.begin(), gate.v.end());
  return flat;
}

void MoeAdapter::unflatten(std::span<const double> flat) {
  if (flat.size() != param_count()) throw NumericError("adapter: unflatten size mismatch");
  std::size_t off = 0;
  for (auto& w : experts) {
    std::copy(flat.begin() + off, flat.begin() + off + w.size(), w.v.begin());
    off += w.size();
  }
  std::copy(flat.begin() + off, flat.end(), gate.v.begin());
}

std::vector<double> gate_weights(const MoeAdapter& a, std::span<const double> x, Rng& rng) {
  if (x.size() != a.cfg.d_in) throw NumericError("gate_weights: dimension mismatch");
  std::vector<double> logits(a.cfg.num_experts);
  matvec(a.gate, x, logits);
  if (a.mode == AdapterMode::training && a.cfg.gate_noise > 0.0)
    for (double& l : logits) l += a.cfg.gate_noise * rng.normal();
  return softmax(logits);
}

std::vector<double> adapt(const MoeAdapter& a, std::span<const double> x, Rng& rng,
                          AdapterForward* rec) {
  if (x.size() != a.cfg.d_in) throw NumericError("adapt: dimension mismatch");
  const uint32_t E = a.cfg.num_experts;
  const uint32_t d_out = a.cfg.d_out;

  std::vector<double> g = gate_weights(a, x, rng);
  DenseMatrix expert_out(E, d_out);
  DenseMatrix drop(E, d_out, 1.0);
  const bool use_dropout = a.mode == AdapterMode::training && a.cfg.dropout > 0.0;
  const double keep = 1.0 - a.cfg.dropout;

  for (uint32_t e = 0; e < E; ++e) {
    matvec(a.experts[e], x, expert_out.row(e));
    if (use_dropout) {
      for (uint32_t c = 0; c < d_out; ++c) {
        const double scale = rng.uniform() < a.cfg.dropout ? 0.0 : 1.0 / keep;
        drop.at(e, c) = scale;
        expert_out.at(e, c) *= scale;
      }
    }
  }

  std::vector<double> out(d_out, 0.0);
  for (uint32_t e = 0; e < E; ++e) {
    const double ge = g[e];
    const double* row = expert_out.v.data() + std::size_t{e} * d_out;
    for (uint32_t c = 0; c < d_out; ++c) out[c] += ge * row[c];
  }
  if (!all_finite(out)) throw NumericError("adapt: non-finite output");

  if (rec) {
    rec->input.assign(x.begin(), x.end());
    rec->gate_w = g;
    rec->expert_out = std::move(expert_out);
    rec->dropout_scale = std::move(drop);
    rec->output = out;
  }
  return out;
}

void AdapterGrads::accumulate(const AdapterGrads& other) {
  for (std::size_t e = 0; e < d_experts.size(); ++e)
    add_inplace(d_experts[e], other.d_experts[e]);
  add_inplace(d_gate, other.d_gate);
}

std::vector<double> AdapterGrads::flatten() const {
  std::vector<double> flat;
  for (const auto& w : d_experts) flat.insert(flat.end(), w.v.begin(), w.v.end());
  flat.insert(flat.end(), d_gate.v.begin(), d_gate.v.end());
  return flat;
}

AdapterGrads adapter_backward(const MoeAdapter& a, const AdapterForward& fwd,
                              std::span<const double> d_output) {
  const uint32_t E = a.cfg.num_experts;
  const uint32_t d_in = a.cfg.d_in;
  const uint32_t d_out = a.cfg.d_out;
  if (d_output.size() != d_out) throw NumericError("adapter_backward: bad grad size");

  AdapterGrads g;
  g.d_experts.assign(E, DenseMatrix(d_out, d_in));
  g.d_gate = DenseMatrix(E, d_in);
  g.d_input.assign(d_in, 0.0);

  // out = sum_e g_e * (scale_e ⊙ (W_e x))
  std::vector<double> d_gate_w(E, 0.0);
  std::vector<double> masked(d_out);
  for (uint32_t e = 0; e < E; ++e) {
    d_gate_w[e] = dot(d_output, fwd.expert_out.row(e));

    const double ge = fwd.gate_w[e];
    for (uint32_t c = 0; c < d_out; ++c)
      masked[c] = ge * fwd.dropout_scale.at(e, c) * d_output[c];
    // dW_e = masked * x^T; dx += W_e^T masked
    DenseMatrix& dw = g.d_experts[e];
    for (uint32_t r = 0; r < d_out; ++r) {
      const double mr = masked[r];
      if (mr == 0.0) continue;
      double* dwr = dw.v.data() + std::size_t{r} * d_in;
      const double* wr = a.experts[e].v.data() + std::size_t{r} * d_in;
      for (uint32_t c = 0; c < d_in; ++c) {
        dwr[c] += mr * fwd.input[c];
        g.d_input[c] += mr * wr[c];
      }
    }
  }

  // Softmax backward for the gate: dl_e = g_e (dgw_e - sum_k g_k dgw_k).
  double mix = 0.0;
  for (uint32_t e = 0; e < E; ++e) mix += fwd.gate_w[e] * d_gate_w[e];
  for (uint32_t e = 0; e < E; ++e) {
    const double dl = fwd.gate_w[e] * (d_gate_w[e] - mix);
    double* row = g.d_gate.v.data() + std::size_t{e} * d_in;
    const double* gl = a.gate.v.data() + std::size_t{e} * d_in;
    for (uint32_t c = 0; c < d_in; ++c) {
      row[c] += dl * fwd.input[c];
      g.d_input[c] += dl * gl[c];
    }
  }
  return g;
}

GradCheckReport adapter_gradient_check(const MoeAdapter& a, std::span<const double> x,
                                       std::span<const double> target, double eps,
                                       double tol) {
  if (a.mode == AdapterMode::training)
    throw NumericError("stochastic forward; use inference mode");
  if (target.size() != a.cfg.d_out)
    throw NumericError("adapter_gradient_check: bad target size");

  Rng unused(0);
  AdapterForward fwd;
  std::vector<double> out = adapt(a, x, unused, &fwd);
  std::vector<double> d_out(out.size());
  double loss = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double d = out[i] - target[i];
    loss += 0.5 * d * d;
    d_out[i] = d;
  }
  (void)loss;
  const AdapterGrads grads = adapter_backward(a, fwd, d_out);
  const std::vector<double> analytic = grads.flatten();
  const std::vector<double> params = a.flatten();

  MoeAdapter probe_adapter = a;
  auto loss_fn = [&](std::span<const double> p) {
    probe_adapter.unflatten(p);
    Rng r(0);
    const std::vector<double> y = adapt(probe_adapter, x, r);
    double l = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double d = y[i] - target[i];
      l += 0.5 * d * d;
    }
    return l;
  };
  return finite_difference_check(loss_fn, params, analytic, eps, tol, 200);
}

}  // namespace recex
