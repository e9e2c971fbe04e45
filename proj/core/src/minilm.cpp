#include "recex/minilm.hpp"

#include <cmath>

#include "recex/errors.hpp"
#include "recex/lm_internal.hpp"
#include "recex/numerics.hpp"

namespace recex {

MiniLm MiniLm::init(const LmConfig& cfg, Rng& rng) {
  if (cfg.hidden % cfg.heads != 0)
    throw DataError("minilm: heads must divide hidden dim");
  MiniLm lm;
  lm.cfg = cfg;
  const auto h = cfg.hidden;
  const auto f = cfg.ffn_dim();

  auto normal_matrix = [&](std::size_t r, std::size_t c) {
    DenseMatrix m(r, c);
    rng.fill_normal(m.v, 0.0, cfg.init_std);
    return m;
  };

  lm.tok_emb = normal_matrix(cfg.vocab, h);
  lm.pos_emb = normal_matrix(cfg.max_context, h);
  lm.layers.resize(cfg.layers);
  for (auto& layer : lm.layers) {
    layer.wq = normal_matrix(h, h);
    layer.wk = normal_matrix(h, h);
    layer.wv = normal_matrix(h, h);
    layer.wo = normal_matrix(h, h);
    layer.bq.assign(h, 0.0);
    layer.bk.assign(h, 0.0);
    layer.bv.assign(h, 0.0);
    layer.bo.assign(h, 0.0);
    layer.w1 = normal_matrix(f, h);
    layer.b1.assign(f, 0.0);
    layer.w2 = normal_matrix(h, f);
    layer.b2.assign(h, 0.0);
    layer.ln1_g.assign(h, 1.0);
    layer.ln1_b.assign(h, 0.0);
    layer.ln2_g.assign(h, 1.0);
    layer.ln2_b.assign(h, 0.0);
  }
  lm.lnf_g.assign(h, 1.0);
  lm.lnf_b.assign(h, 0.0);
  lm.w_out = normal_matrix(cfg.vocab, h);
  lm.b_out.assign(cfg.vocab, 0.0);
  return lm;
}

namespace {

template <typename LmT, typename SpanT>
std::vector<SpanT> collect_spans(LmT& lm) {
  std::vector<SpanT> out;
  out.push_back(SpanT(lm.tok_emb.v));
  out.push_back(SpanT(lm.pos_emb.v));
  for (auto& layer : lm.layers) {
    out.push_back(SpanT(layer.wq.v));
    out.push_back(SpanT(layer.bq));
    out.push_back(SpanT(layer.wk.v));
    out.push_back(SpanT(layer.bk));
    out.push_back(SpanT(layer.wv.v));
    out.push_back(SpanT(layer.bv));
    out.push_back(SpanT(layer.wo.v));
    out.push_back(SpanT(layer.bo));
    out.push_back(SpanT(layer.w1.v));
    out.push_back(SpanT(layer.b1));
    out.push_back(SpanT(layer.w2.v));
    out.push_back(SpanT(layer.b2));
    out.push_back(SpanT(layer.ln1_g));
    out.push_back(SpanT(layer.ln1_b));
    out.push_back(SpanT(layer.ln2_g));
    out.push_back(SpanT(layer.ln2_b));
  }
  out.push_back(SpanT(lm.lnf_g));
  out.push_back(SpanT(lm.lnf_b));
  out.push_back(SpanT(lm.w_out.v));
  out.push_back(SpanT(lm.b_out));
  return out;
}

}  // namespace

std::vector<std::span<double>> MiniLm::param_spans() {
  return collect_spans<MiniLm, std::span<double>>(*this);
}
std::vector<std::span<const double>> MiniLm::param_spans() const {
  return collect_spans<const MiniLm, std::span<const double>>(*this);
}

std::size_t MiniLm::param_count() const {
  std::size_t n = 0;
  for (const auto& s : param_spans()) n += s.size();
  return n;
}

uint64_t MiniLm::param_hash() const {
  uint64_t h = 0xcbf29ce484222325ull;
  for (const auto& s : param_spans()) h = content_hash(s, h);
  return h;
}

std::vector<double> MiniLm::flatten() const {
  std::vector<double> flat;
  flat.reserve(param_count());
  for (const auto& s : param_spans()) flat.insert(flat.end(), s.begin(), s.end());
  return flat;
}

void MiniLm::unflatten(std::span<const double> flat) {
  std::size_t off = 0;
  for (auto s : param_spans()) {
    if (off + s.size() > flat.size()) throw NumericError("minilm: unflatten size mismatch");
    std::copy(flat.begin() + off, flat.begin() + off + s.size(), s.begin());
    off += s.size();
  }
  if (off != flat.size()) throw NumericError("minilm: unflatten size mismatch");
}

// ---------------------------------------------------------------------------
// row-level primitives shared by the batch forward and the incremental decoder
// (identical accumulation order keeps the two paths bit-identical)

namespace lmops {

void layernorm_row(std::span<const double> x, std::span<const double> gain,
                   std::span<const double> bias, std::span<double> out,
                   double& mean_out, double& rstd_out) {
  const std::size_t n = x.size();
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double v : x) {
    const double d = v - mean;
    var += d * d;
  }
  var /= static_cast<double>(n);
  const double rstd = 1.0 / std::sqrt(var + kLnEps);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = gain[i] * ((x[i] - mean) * rstd) + bias[i];
  mean_out = mean;
  rstd_out = rstd;
}

double gelu(double x) {
  const double u = kGeluScale * (x + kGeluCubic * x * x * x);
  return 0.5 * x * (1.0 + std::tanh(u));
}

double gelu_grad(double x) {
  const double u = kGeluScale * (x + kGeluCubic * x * x * x);
  const double t = std::tanh(u);
  const double du = kGeluScale * (1.0 + 3.0 * kGeluCubic * x * x);
  return 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * du;
}

void project_row(const DenseMatrix& w, std::span<const double> bias,
                 std::span<const double> x, std::span<double> out) {
  matvec(w, x, out);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bias[i];
}

void add_injection_row(const DenseMatrix& w, std::span<const double> a,
                       std::span<double> out) {
  std::vector<double> wa(out.size());
  matvec(w, a, wa);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += wa[i];
}

}  // namespace lmops

DenseMatrix embed_tokens(const MiniLm& lm, std::span<const int> tokens) {
  if (tokens.size() > lm.cfg.max_context)
    throw NumericError("minilm: context overflow (" + std::to_string(tokens.size()) +
                       " > " + std::to_string(lm.cfg.max_context) + ")");
  DenseMatrix e(tokens.size(), lm.cfg.hidden);
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    const int id = tokens[t];
    if (!Vocabulary::is_valid(id)) throw DataError("minilm: token id out of range");
    const double* tok = lm.tok_emb.v.data() + std::size_t(id) * lm.cfg.hidden;
    const double* pos = lm.pos_emb.v.data() + t * lm.cfg.hidden;
    double* row = e.v.data() + t * lm.cfg.hidden;
    for (uint32_t c = 0; c < lm.cfg.hidden; ++c) row[c] = tok[c] + pos[c];
  }
  return e;
}

std::vector<double> embed_token_at(const MiniLm& lm, int token, std::size_t position) {
  if (!Vocabulary::is_valid(token)) throw DataError("minilm: token id out of range");
  if (position >= lm.cfg.max_context) throw NumericError("minilm: context overflow");
  std::vector<double> row(lm.cfg.hidden);
  const double* tok = lm.tok_emb.v.data() + std::size_t(token) * lm.cfg.hidden;
  const double* pos = lm.pos_emb.v.data() + position * lm.cfg.hidden;
  for (uint32_t c = 0; c < lm.cfg.hidden; ++c) row[c] = tok[c] + pos[c];
  return row;
}

DenseMatrix embed_prompt(const MiniLm& lm, const PromptInstance& prompt,
                         std::span<const double> a_user,
                         std::span<const double> a_item) {
  if (a_user.size() != lm.cfg.hidden || a_item.size() != lm.cfg.hidden)
    throw NumericError("embed_prompt: adapted embedding dimension mismatch");
  DenseMatrix e = embed_tokens(lm, prompt.tokens);
  std::copy(a_user.begin(), a_user.end(), e.row(prompt.user_pos).begin());
  std::copy(a_item.begin(), a_item.end(), e.row(prompt.item_pos).begin());
  return e;
}

DenseMatrix forward_injected(const MiniLm& lm, const DenseMatrix& embedded,
                             const InjectionSpec& injection, LmForwardCache* cache) {
  const std::size_t len = embedded.rows;
  const uint32_t h = lm.cfg.hidden;
  const uint32_t heads = lm.cfg.heads;
  const uint32_t dh = lm.cfg.head_dim();
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  if (len == 0) throw DataError("forward: empty input");
  if (len > lm.cfg.max_context) throw NumericError("minilm: context overflow");
  if (embedded.cols != h) throw NumericError("forward: hidden dim mismatch");
  if (injection.enabled &&
      (injection.user_pos >= len || injection.item_pos >= len))
    throw NumericError("forward: injection position out of range");

  if (cache) {
    cache->embedded = embedded;
    cache->layer.assign(lm.cfg.layers, {});
    cache->injection = injection;
  }

  DenseMatrix x = embedded;
  for (uint32_t li = 0; li < lm.cfg.layers; ++li) {
    const LmLayerParams& p = lm.layers[li];
    LmLayerCache* lc = cache ? &cache->layer[li] : nullptr;
    if (lc) lc->x_in = x;

    // pre-norm attention
    DenseMatrix u1(len, h);
    std::vector<double> m1(len), r1(len);
    for (std::size_t t = 0; t < len; ++t)
      lmops::layernorm_row(x.row(t), p.ln1_g, p.ln1_b, u1.row(t), m1[t], r1[t]);

    DenseMatrix q(len, h), k(len, h), v(len, h);
    for (std::size_t t = 0; t < len; ++t) {
      lmops::project_row(p.wq, p.bq, u1.row(t), q.row(t));
      lmops::project_row(p.wk, p.bk, u1.row(t), k.row(t));
      lmops::project_row(p.wv, p.bv, u1.row(t), v.row(t));
    }
    if (injection.enabled) {
      lmops::add_injection_row(p.wq, injection.a_user, q.row(injection.user_pos));
      lmops::add_injection_row(p.wk, injection.a_user, k.row(injection.user_pos));
      lmops::add_injection_row(p.wv, injection.a_user, v.row(injection.user_pos));
      lmops::add_injection_row(p.wq, injection.a_item, q.row(injection.item_pos));
      lmops::add_injection_row(p.wk, injection.a_item, k.row(injection.item_pos));
      lmops::add_injection_row(p.wv, injection.a_item, v.row(injection.item_pos));
    }

    // causal attention, head by head; masked entries are never touched
    DenseMatrix ctx(len, h);
    std::vector<DenseMatrix> att;
    if (lc) att.assign(heads, DenseMatrix(len, len));
    std::vector<double> scores;
    for (uint32_t hd = 0; hd < heads; ++hd) {
      const std::size_t off = std::size_t(hd) * dh;
      for (std::size_t t = 0; t < len; ++t) {
        scores.assign(t + 1, 0.0);
        const double* qt = q.v.data() + t * h + off;
        for (std::size_t j = 0; j <= t; ++j) {
          const double* kj = k.v.data() + j * h + off;
          double s = 0.0;
          for (uint32_t c = 0; c < dh; ++c) s += qt[c] * kj[c];
          scores[j] = s * scale;
        }
        softmax_into(scores, scores);
        double* ct = ctx.v.data() + t * h + off;
        for (std::size_t j = 0; j <= t; ++j) {
          const double* vj = v.v.data() + j * h + off;
          for (uint32_t c = 0; c < dh; ++c) ct[c] += scores[j] * vj[c];
        }
        if (lc)
          for (std::size_t j = 0; j <= t; ++j) att[hd].at(t, j) = scores[j];
      }
    }

    DenseMatrix x_mid = x;
    std::vector<double> proj(h);
    for (std::size_t t = 0; t < len; ++t) {
      lmops::project_row(p.wo, p.bo, ctx.row(t), proj);
      double* row = x_mid.v.data() + t * h;
      for (uint32_t c = 0; c < h; ++c) row[c] += proj[c];
    }

    // pre-norm MLP
    DenseMatrix u2(len, h);
    std::vector<double> m2(len), r2(len);
    for (std::size_t t = 0; t < len; ++t)
      lmops::layernorm_row(x_mid.row(t), p.ln2_g, p.ln2_b, u2.row(t), m2[t], r2[t]);

    const uint32_t f = lm.cfg.ffn_dim();
    DenseMatrix z1(len, f), h1(len, f);
    DenseMatrix x_out = x_mid;
    std::vector<double> back(h);
    for (std::size_t t = 0; t < len; ++t) {
      lmops::project_row(p.w1, p.b1, u2.row(t), z1.row(t));
      for (uint32_t c = 0; c < f; ++c) h1.at(t, c) = lmops::gelu(z1.at(t, c));
      lmops::project_row(p.w2, p.b2, h1.row(t), back);
      double* row = x_out.v.data() + t * h;
      for (uint32_t c = 0; c < h; ++c) row[c] += back[c];
    }

    if (lc) {
      lc->u1 = std::move(u1);
      lc->ln1_mean = std::move(m1);
      lc->ln1_rstd = std::move(r1);
      lc->q = std::move(q);
      lc->k = std::move(k);
      lc->v = std::move(v);
      lc->att = std::move(att);
      lc->ctx = std::move(ctx);
      lc->x_mid = std::move(x_mid);
      lc->u2 = std::move(u2);
      lc->ln2_mean = std::move(m2);
      lc->ln2_rstd = std::move(r2);
      lc->z1 = std::move(z1);
      lc->h1 = std::move(h1);
    }
    x = std::move(x_out);
  }

  if (cache) cache->x_final = x;
  DenseMatrix uf(len, h);
  std::vector<double> mf(len), rf(len);
  for (std::size_t t = 0; t < len; ++t)
    lmops::layernorm_row(x.row(t), lm.lnf_g, lm.lnf_b, uf.row(t), mf[t], rf[t]);

  DenseMatrix logits(len, lm.cfg.vocab);
  for (std::size_t t = 0; t < len; ++t)
    lmops::project_row(lm.w_out, lm.b_out, uf.row(t), logits.row(t));

  if (cache) {
    cache->uf = std::move(uf);
    cache->lnf_mean = std::move(mf);
    cache->lnf_rstd = std::move(rf);
  }
  return logits;
}

double nll_loss(const DenseMatrix& logits, std::span<const int> tokens,
                std::size_t predict_from) {
  if (logits.rows != tokens.size()) throw NumericError("nll: logits/token length mismatch");
  if (tokens.size() < 2 || predict_from + 1 >= tokens.size())
    throw DataError("nll: empty target");
  std::vector<double> logp(logits.cols);
  double loss = 0.0;
  for (std::size_t t = predict_from; t + 1 < tokens.size(); ++t) {
    log_softmax_into(logits.row(t), logp);
    loss -= logp[static_cast<std::size_t>(tokens[t + 1])];
  }
  return loss;
}

DenseMatrix nll_backward(const DenseMatrix& logits, std::span<const int> tokens,
                         std::size_t predict_from) {
  if (logits.rows != tokens.size()) throw NumericError("nll: logits/token length mismatch");
  if (tokens.size() < 2 || predict_from + 1 >= tokens.size())
    throw DataError("nll: empty target");
  DenseMatrix d(logits.rows, logits.cols);
  for (std::size_t t = predict_from; t + 1 < tokens.size(); ++t) {
    softmax_into(logits.row(t), d.row(t));
    d.at(t, static_cast<std::size_t>(tokens[t + 1])) -= 1.0;
  }
  return d;
}

}  // namespace recex
