#include "recex/generate.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "recex/errors.hpp"
#include "recex/lm_internal.hpp"
#include "recex/numerics.hpp"

namespace recex {

std::size_t word_count(const std::string& text) {
  std::size_t n = 0;
  bool in_word = false;
  for (unsigned char c : text) {
    const bool ws = std::isspace(c) != 0;
    if (!ws && !in_word) ++n;
    in_word = !ws;
  }
  return n;
}

std::string truncate_words(const std::string& text, std::size_t max_words) {
  std::size_t n = 0;
  bool in_word = false;
  std::size_t end = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const bool ws = std::isspace(static_cast<unsigned char>(text[i])) != 0;
    if (!ws) {
      if (!in_word) {
        ++n;
        if (n > max_words) break;
      }
      end = i + 1;
    }
    in_word = !ws;
  }
  return text.substr(0, end);
}

DecodeState DecodeState::make(const MiniLm& lm) {
  DecodeState s;
  s.k.assign(lm.cfg.layers, DenseMatrix(lm.cfg.max_context, lm.cfg.hidden));
  s.v.assign(lm.cfg.layers, DenseMatrix(lm.cfg.max_context, lm.cfg.hidden));
  return s;
}

std::vector<double> decode_step(const MiniLm& lm, DecodeState& state,
                                std::span<const double> embedded_row,
                                const double* inject_a) {
  const uint32_t h = lm.cfg.hidden;
  const uint32_t heads = lm.cfg.heads;
  const uint32_t dh = lm.cfg.head_dim();
  const uint32_t f = lm.cfg.ffn_dim();
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  const std::size_t t = state.length;
  if (t >= lm.cfg.max_context) throw NumericError("minilm: context overflow");

  std::vector<double> x(embedded_row.begin(), embedded_row.end());
  std::vector<double> u1(h), q(h), kq(h), vq(h), ctx(h), proj(h), u2(h);
  std::vector<double> z1(f), h1(f);
  double mean = 0.0, rstd = 0.0;
  std::vector<double> scores;

  for (uint32_t li = 0; li < lm.cfg.layers; ++li) {
    const LmLayerParams& p = lm.layers[li];
    lmops::layernorm_row(x, p.ln1_g, p.ln1_b, u1, mean, rstd);
    lmops::project_row(p.wq, p.bq, u1, q);
    lmops::project_row(p.wk, p.bk, u1, kq);
    lmops::project_row(p.wv, p.bv, u1, vq);
    if (inject_a) {
      lmops::add_injection_row(p.wq, {inject_a, h}, q);
      lmops::add_injection_row(p.wk, {inject_a, h}, kq);
      lmops::add_injection_row(p.wv, {inject_a, h}, vq);
    }
    std::copy(kq.begin(), kq.end(), state.k[li].row(t).begin());
    std::copy(vq.begin(), vq.end(), state.v[li].row(t).begin());

    std::fill(ctx.begin(), ctx.end(), 0.0);
    for (uint32_t hd = 0; hd < heads; ++hd) {
      const std::size_t off = std::size_t(hd) * dh;
      scores.assign(t + 1, 0.0);
      for (std::size_t j = 0; j <= t; ++j) {
        const double* kj = state.k[li].v.data() + j * h + off;
        double s = 0.0;
        for (uint32_t c = 0; c < dh; ++c) s += q[off + c] * kj[c];
        scores[j] = s * scale;
      }
      softmax_into(scores, scores);
      for (std::size_t j = 0; j <= t; ++j) {
        const double* vj = state.v[li].v.data() + j * h + off;
        for (uint32_t c = 0; c < dh; ++c) ctx[off + c] += scores[j] * vj[c];
      }
    }
    lmops::project_row(p.wo, p.bo, ctx, proj);
    for (uint32_t c = 0; c < h; ++c) x[c] += proj[c];

    lmops::layernorm_row(x, p.ln2_g, p.ln2_b, u2, mean, rstd);
    lmops::project_row(p.w1, p.b1, u2, z1);
    for (uint32_t c = 0; c < f; ++c) h1[c] = lmops::gelu(z1[c]);
    lmops::project_row(p.w2, p.b2, h1, proj);
    for (uint32_t c = 0; c < h; ++c) x[c] += proj[c];
  }

  std::vector<double> uf(h);
  lmops::layernorm_row(x, lm.lnf_g, lm.lnf_b, uf, mean, rstd);
  std::vector<double> logits(lm.cfg.vocab);
  lmops::project_row(lm.w_out, lm.b_out, uf, logits);
  ++state.length;
  return logits;
}

namespace {

int pick_token(std::span<const double> logits, const DecodeConfig& cfg, Rng& rng) {
  if (cfg.mode == DecodeConfig::Mode::greedy) {
    // argmax with lowest-id tie-break
    std::size_t best = 0;
    for (std::size_t i = 1; i < logits.size(); ++i)
      if (logits[i] > logits[best]) best = i;
    return static_cast<int>(best);
  }
  const double temp = cfg.temperature > 0.0 ? cfg.temperature : 1.0;
  std::vector<double> scaled(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) scaled[i] = logits[i] / temp;
  const std::vector<double> probs = softmax(scaled);
  const double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return static_cast<int>(i);
  }
  return static_cast<int>(probs.size() - 1);
}

}  // namespace

std::string generate(const MiniLm& lm, const PromptInstance& prompt,
                     std::span<const double> a_user, std::span<const double> a_item,
                     bool inject, const DecodeConfig& cfg) {
  if (prompt.target_len() != 0)
    throw DataError("generate: prompt already carries a target");
  if (prompt.tokens.empty()) throw DataError("generate: empty prompt");

  const DenseMatrix embedded = embed_prompt(lm, prompt, a_user, a_item);
  DecodeState state = DecodeState::make(lm);
  Rng rng(cfg.seed);

  std::vector<double> logits;
  for (std::size_t t = 0; t < embedded.rows; ++t) {
    const double* inj = nullptr;
    if (inject && t == prompt.user_pos) inj = a_user.data();
    if (inject && t == prompt.item_pos) inj = a_item.data();
    logits = decode_step(lm, state, embedded.row(t), inj);
  }

  std::vector<int> out_tokens;
  std::string text;
  const std::size_t budget = lm.cfg.max_context - embedded.rows;
  for (std::size_t step = 0; step < budget; ++step) {
    const int next = pick_token(logits, cfg, rng);
    if (next == Vocabulary::kEos) break;
    out_tokens.push_back(next);
    text = Vocabulary::decode(out_tokens);
    if (word_count(text) > static_cast<std::size_t>(cfg.max_words)) {
      text = truncate_words(text, cfg.max_words);
      break;
    }
    const std::vector<double> row = embed_token_at(lm, next, state.length);
    logits = decode_step(lm, state, row, nullptr);
  }
  return truncate_words(text, cfg.max_words);
}

}  // namespace recex
