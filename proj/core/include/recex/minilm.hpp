#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "recex/matrix.hpp"
#include "recex/prompt.hpp"
#include "recex/rng.hpp"
#include "recex/vocab.hpp"

namespace recex {

struct LmConfig {
  uint32_t vocab = Vocabulary::kSize;
  uint32_t hidden = 128;
  uint32_t layers = 4;
  uint32_t heads = 4;
  uint32_t ffn_mult = 4;
  uint32_t max_context = 512;
  double init_std = 0.02;

  uint32_t head_dim() const { return hidden / heads; }
  uint32_t ffn_dim() const { return ffn_mult * hidden; }
};

struct LmLayerParams {
  DenseMatrix wq, wk, wv, wo;          // hidden x hidden
  std::vector<double> bq, bk, bv, bo;  // hidden
  DenseMatrix w1;                      // ffn x hidden
  std::vector<double> b1;
  DenseMatrix w2;                      // hidden x ffn
  std::vector<double> b2;
  std::vector<double> ln1_g, ln1_b, ln2_g, ln2_b;
};

// Small decoder-only language model: learned token + position embeddings,
// pre-norm residual blocks with causal multi-head attention and a GELU MLP,
// final layernorm and an untied output head.
struct MiniLm {
  LmConfig cfg;
  bool frozen = false;

  DenseMatrix tok_emb;  // vocab x hidden
  DenseMatrix pos_emb;  // max_context x hidden
  std::vector<LmLayerParams> layers;
  std::vector<double> lnf_g, lnf_b;
  DenseMatrix w_out;  // vocab x hidden
  std::vector<double> b_out;

  static MiniLm init(const LmConfig& cfg, Rng& rng);

  // All trainable tensors as flat spans in a fixed, documented order.
  std::vector<std::span<double>> param_spans();
  std::vector<std::span<const double>> param_spans() const;
  std::size_t param_count() const;
  uint64_t param_hash() const;
  std::vector<double> flatten() const;
  void unflatten(std::span<const double> flat);
};

// Per-layer additive injection of the adapted collaborative embeddings into
// the query/key/value projections at the two reserved positions. The layer's
// own projection matrices are reused; no extra parameters exist.
struct InjectionSpec {
  bool enabled = false;
  std::size_t user_pos = 0;
  std::size_t item_pos = 0;
  std::vector<double> a_user;  // hidden
  std::vector<double> a_item;  // hidden
};

// Token + position embedding of the prompt; when a_user/a_item are given the
// rows at the reserved positions are replaced outright (no position term).
DenseMatrix embed_prompt(const MiniLm& lm, const PromptInstance& prompt,
                         std::span<const double> a_user,
                         std::span<const double> a_item);
// Plain embedding without replacement.
DenseMatrix embed_tokens(const MiniLm& lm, std::span<const int> tokens);

// Token + position embedding for a single token at a given position.
std::vector<double> embed_token_at(const MiniLm& lm, int token, std::size_t position);

// Everything the backward pass needs from one forward evaluation.
struct LmLayerCache {
  DenseMatrix x_in;             // residual stream entering the block
  DenseMatrix u1;               // ln1 output
  std::vector<double> ln1_mean, ln1_rstd;
  DenseMatrix q, k, v;          // post-injection projections
  std::vector<DenseMatrix> att;  // per head, seq x seq lower-triangular
  DenseMatrix ctx;              // merged attention output
  DenseMatrix x_mid;            // after attention residual
  DenseMatrix u2;               // ln2 output
  std::vector<double> ln2_mean, ln2_rstd;
  DenseMatrix z1;               // ffn pre-activation
  DenseMatrix h1;               // gelu(z1)
};

struct LmForwardCache {
  DenseMatrix embedded;  // the input E' actually used
  std::vector<LmLayerCache> layer;
  DenseMatrix x_final;   // residual stream before final norm
  DenseMatrix uf;        // final norm output
  std::vector<double> lnf_mean, lnf_rstd;
  InjectionSpec injection;  // copy of what was applied
};

// Causal decoder forward over the embedded prompt. Throws NumericError on
// context overflow. With injection disabled and no embedding replacement
// the result is bit-identical to the plain forward.
DenseMatrix forward_injected(const MiniLm& lm, const DenseMatrix& embedded,
                             const InjectionSpec& injection,
                             LmForwardCache* cache = nullptr);

// Sum of token-level negative log-likelihood over positions strictly after
// predict_from: position t scores the token at t+1 for t in
// [predict_from, len-2]. Throws DataError when that range is empty.
double nll_loss(const DenseMatrix& logits, std::span<const int> tokens,
                std::size_t predict_from);

// d nll / d logits; rows outside the scored range are zero.
DenseMatrix nll_backward(const DenseMatrix& logits, std::span<const int> tokens,
                         std::size_t predict_from);

struct LmGrads {
  DenseMatrix tok_emb, pos_emb;
  std::vector<LmLayerParams> layers;  // reused as gradient holders
  std::vector<double> lnf_g, lnf_b;
  DenseMatrix w_out;
  std::vector<double> b_out;

  DenseMatrix d_embedded;          // gradient at E'
  std::vector<double> d_a_user;    // summed over replacement + all layers
  std::vector<double> d_a_item;

  static LmGrads zeros_like(const MiniLm& lm);
  std::vector<std::span<double>> param_spans();
  void accumulate(const LmGrads& other);
};

// Full reverse pass. `tokens` drive the embedding-table scatter; pass
// replaced=true when the reserved rows were replaced by adapted embeddings
// (their gradient then flows to d_a_* instead of the embedding tables).
LmGrads lm_backward(const MiniLm& lm, const LmForwardCache& cache,
                    const DenseMatrix& d_logits, std::span<const int> tokens,
                    bool replaced);

}  // namespace recex
