#include <cmath>

#include "recex/errors.hpp"
#include "recex/lm_internal.hpp"
#include "recex/minilm.hpp"

namespace recex {

namespace {

// d layernorm / d input for one row, given the cached mean and rstd.
void layernorm_backward_row(std::span<const double> x, double mean, double rstd,
                            std::span<const double> gain,
                            std::span<const double> d_out,
                            std::span<double> d_x_accum,
                            std::span<double> d_gain, std::span<double> d_bias) {
  const std::size_t n = x.size();
  double sum_dxhat = 0.0;
  double sum_dxhat_xhat = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double xhat = (x[i] - mean) * rstd;
    const double dxhat = d_out[i] * gain[i];
    d_gain[i] += d_out[i] * xhat;
    d_bias[i] += d_out[i];
    sum_dxhat += dxhat;
    sum_dxhat_xhat += dxhat * xhat;
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double xhat = (x[i] - mean) * rstd;
    const double dxhat = d_out[i] * gain[i];
    d_x_accum[i] += rstd * (dxhat - inv_n * sum_dxhat - xhat * inv_n * sum_dxhat_xhat);
  }
}

void add_col_sums(const DenseMatrix& m, std::span<double> out) {
  for (std::size_t r = 0; r < m.rows; ++r) {
    const double* row = m.v.data() + r * m.cols;
    for (std::size_t c = 0; c < m.cols; ++c) out[c] += row[c];
  }
}

// dW += d_row^T * a for a single injected row.
void add_outer_product(DenseMatrix& dw, std::span<const double> d_row,
                       std::span<const double> a) {
  for (std::size_t r = 0; r < dw.rows; ++r) {
    const double dr = d_row[r];
    if (dr == 0.0) continue;
    double* out = dw.v.data() + r * dw.cols;
    for (std::size_t c = 0; c < dw.cols; ++c) out[c] += dr * a[c];
  }
}

void add_matvec_t(const DenseMatrix& w, std::span<const double> x,
                  std::span<double> out) {
  std::vector<double> tmp(out.size());
  matvec_t(w, x, tmp);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += tmp[i];
}

}  // namespace

LmGrads LmGrads::zeros_like(const MiniLm& lm) {
  LmGrads g;
  g.tok_emb = DenseMatrix(lm.tok_emb.rows, lm.tok_emb.cols);
  g.pos_emb = DenseMatrix(lm.pos_emb.rows, lm.pos_emb.cols);
  g.layers.resize(lm.layers.size());
  for (std::size_t i = 0; i < lm.layers.size(); ++i) {
    const auto& p = lm.layers[i];
    auto& d = g.layers[i];
    d.wq = DenseMatrix(p.wq.rows, p.wq.cols);
    d.wk = DenseMatrix(p.wk.rows, p.wk.cols);
    d.wv = DenseMatrix(p.wv.rows, p.wv.cols);
    d.wo = DenseMatrix(p.wo.rows, p.wo.cols);
    d.bq.assign(p.bq.size(), 0.0);
    d.bk.assign(p.bk.size(), 0.0);
    d.bv.assign(p.bv.size(), 0.0);
    d.bo.assign(p.bo.size(), 0.0);
    d.w1 = DenseMatrix(p.w1.rows, p.w1.cols);
    d.b1.assign(p.b1.size(), 0.0);
    d.w2 = DenseMatrix(p.w2.rows, p.w2.cols);
    d.b2.assign(p.b2.size(), 0.0);
    d.ln1_g.assign(p.ln1_g.size(), 0.0);
    d.ln1_b.assign(p.ln1_b.size(), 0.0);
    d.ln2_g.assign(p.ln2_g.size(), 0.0);
    d.ln2_b.assign(p.ln2_b.size(), 0.0);
  }
  g.lnf_g.assign(lm.lnf_g.size(), 0.0);
  g.lnf_b.assign(lm.lnf_b.size(), 0.0);
  g.w_out = DenseMatrix(lm.w_out.rows, lm.w_out.cols);
  g.b_out.assign(lm.b_out.size(), 0.0);
  g.d_a_user.assign(lm.cfg.hidden, 0.0);
  g.d_a_item.assign(lm.cfg.hidden, 0.0);
  return g;
}

std::vector<std::span<double>> LmGrads::param_spans() {
  std::vector<std::span<double>> out;
  out.push_back(tok_emb.v);
  out.push_back(pos_emb.v);
  for (auto& d : layers) {
    out.push_back(d.wq.v);
    out.push_back(d.bq);
    out.push_back(d.wk.v);
    out.push_back(d.bk);
    out.push_back(d.wv.v);
    out.push_back(d.bv);
    out.push_back(d.wo.v);
    out.push_back(d.bo);
    out.push_back(d.w1.v);
    out.push_back(d.b1);
    out.push_back(d.w2.v);
    out.push_back(d.b2);
    out.push_back(d.ln1_g);
    out.push_back(d.ln1_b);
    out.push_back(d.ln2_g);
    out.push_back(d.ln2_b);
  }
  out.push_back(lnf_g);
  out.push_back(lnf_b);
  out.push_back(w_out.v);
  out.push_back(b_out);
  return out;
}

void LmGrads::accumulate(const LmGrads& other) {
  auto mine = param_spans();
  auto theirs = const_cast<LmGrads&>(other).param_spans();
  for (std::size_t i = 0; i < mine.size(); ++i)
    for (std::size_t j = 0; j < mine[i].size(); ++j) mine[i][j] += theirs[i][j];
  for (std::size_t j = 0; j < d_a_user.size(); ++j) {
    d_a_user[j] += other.d_a_user[j];
    d_a_item[j] += other.d_a_item[j];
  }
}

LmGrads lm_backward(const MiniLm& lm, const LmForwardCache& cache,
                    const DenseMatrix& d_logits, std::span<const int> tokens,
                    bool replaced) {
  const std::size_t len = cache.embedded.rows;
  const uint32_t h = lm.cfg.hidden;
  const uint32_t heads = lm.cfg.heads;
  const uint32_t dh = lm.cfg.head_dim();
  const uint32_t f = lm.cfg.ffn_dim();
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  const InjectionSpec& inj = cache.injection;
  if (d_logits.rows != len || tokens.size() != len)
    throw NumericError("lm_backward: shape mismatch");

  LmGrads g = LmGrads::zeros_like(lm);

  // output head
  DenseMatrix duf = matmul(d_logits, lm.w_out);
  {
    DenseMatrix dw = matmul_tn(d_logits, cache.uf);
    add_inplace(g.w_out, dw);
    add_col_sums(d_logits, g.b_out);
  }

  // final layernorm
  DenseMatrix dx(len, h);
  for (std::size_t t = 0; t < len; ++t)
    layernorm_backward_row(cache.x_final.row(t), cache.lnf_mean[t], cache.lnf_rstd[t],
                           lm.lnf_g, duf.row(t), dx.row(t), g.lnf_g, g.lnf_b);

  // transformer blocks in reverse
  for (std::size_t li = lm.layers.size(); li-- > 0;) {
    const LmLayerParams& p = lm.layers[li];
    const LmLayerCache& c = cache.layer[li];
    LmLayerParams& d = g.layers[li];

    // MLP: x_out = x_mid + w2 * gelu(w1 * u2 + b1) + b2
    DenseMatrix dh1 = matmul(dx, p.w2);
    {
      DenseMatrix dw2 = matmul_tn(dx, c.h1);
      add_inplace(d.w2, dw2);
      add_col_sums(dx, d.b2);
    }
    DenseMatrix dz1 = dh1;
    for (std::size_t t = 0; t < len; ++t)
      for (uint32_t cix = 0; cix < f; ++cix)
        dz1.at(t, cix) *= lmops::gelu_grad(c.z1.at(t, cix));
    DenseMatrix du2 = matmul(dz1, p.w1);
    {
      DenseMatrix dw1 = matmul_tn(dz1, c.u2);
      add_inplace(d.w1, dw1);
      add_col_sums(dz1, d.b1);
    }
    DenseMatrix dx_mid = dx;  // residual branch
    for (std::size_t t = 0; t < len; ++t)
      layernorm_backward_row(c.x_mid.row(t), c.ln2_mean[t], c.ln2_rstd[t], p.ln2_g,
                             du2.row(t), dx_mid.row(t), d.ln2_g, d.ln2_b);

    // attention: x_mid = x_in + wo * ctx + bo
    DenseMatrix dctx = matmul(dx_mid, p.wo);
    {
      DenseMatrix dwo = matmul_tn(dx_mid, c.ctx);
      add_inplace(d.wo, dwo);
      add_col_sums(dx_mid, d.bo);
    }

    DenseMatrix dq(len, h), dk(len, h), dv(len, h);
    std::vector<double> datt, dscore;
    for (uint32_t hd = 0; hd < heads; ++hd) {
      const std::size_t off = std::size_t(hd) * dh;
      const DenseMatrix& att = c.att[hd];
      for (std::size_t t = 0; t < len; ++t) {
        datt.assign(t + 1, 0.0);
        const double* dct = dctx.v.data() + t * h + off;
        for (std::size_t j = 0; j <= t; ++j) {
          const double* vj = c.v.v.data() + j * h + off;
          double s = 0.0;
          for (uint32_t cc = 0; cc < dh; ++cc) s += dct[cc] * vj[cc];
          datt[j] = s;
          const double a = att.at(t, j);
          double* dvj = dv.v.data() + j * h + off;
          for (uint32_t cc = 0; cc < dh; ++cc) dvj[cc] += a * dct[cc];
        }
        double mix = 0.0;
        for (std::size_t j = 0; j <= t; ++j) mix += att.at(t, j) * datt[j];
        dscore.assign(t + 1, 0.0);
        for (std::size_t j = 0; j <= t; ++j)
          dscore[j] = att.at(t, j) * (datt[j] - mix);
        double* dqt = dq.v.data() + t * h + off;
        const double* qt = c.q.v.data() + t * h + off;
        for (std::size_t j = 0; j <= t; ++j) {
          const double ds = dscore[j] * scale;
          const double* kj = c.k.v.data() + j * h + off;
          double* dkj = dk.v.data() + j * h + off;
          for (uint32_t cc = 0; cc < dh; ++cc) {
            dqt[cc] += ds * kj[cc];
            dkj[cc] += ds * qt[cc];
          }
        }
      }
    }

    // injected rows contribute to the adapted-embedding gradients and to the
    // (frozen during adapter training) projection weights
    if (inj.enabled) {
      add_matvec_t(p.wq, dq.row(inj.user_pos), g.d_a_user);
      add_matvec_t(p.wk, dk.row(inj.user_pos), g.d_a_user);
      add_matvec_t(p.wv, dv.row(inj.user_pos), g.d_a_user);
      add_matvec_t(p.wq, dq.row(inj.item_pos), g.d_a_item);
      add_matvec_t(p.wk, dk.row(inj.item_pos), g.d_a_item);
      add_matvec_t(p.wv, dv.row(inj.item_pos), g.d_a_item);
      add_outer_product(d.wq, dq.row(inj.user_pos), inj.a_user);
      add_outer_product(d.wk, dk.row(inj.user_pos), inj.a_user);
      add_outer_product(d.wv, dv.row(inj.user_pos), inj.a_user);
      add_outer_product(d.wq, dq.row(inj.item_pos), inj.a_item);
      add_outer_product(d.wk, dk.row(inj.item_pos), inj.a_item);
      add_outer_product(d.wv, dv.row(inj.item_pos), inj.a_item);
    }

    // projections back to the normalized stream
    DenseMatrix du1 = matmul(dq, p.wq);
    {
      DenseMatrix tmp = matmul(dk, p.wk);
      add_inplace(du1, tmp);
      tmp = matmul(dv, p.wv);
      add_inplace(du1, tmp);
      DenseMatrix dwq = matmul_tn(dq, c.u1);
      add_inplace(d.wq, dwq);
      DenseMatrix dwk = matmul_tn(dk, c.u1);
      add_inplace(d.wk, dwk);
      DenseMatrix dwv = matmul_tn(dv, c.u1);
      add_inplace(d.wv, dwv);
      add_col_sums(dq, d.bq);
      add_col_sums(dk, d.bk);
      add_col_sums(dv, d.bv);
    }

    DenseMatrix dx_in = dx_mid;  // residual branch
    for (std::size_t t = 0; t < len; ++t)
      layernorm_backward_row(c.x_in.row(t), c.ln1_mean[t], c.ln1_rstd[t], p.ln1_g,
                             du1.row(t), dx_in.row(t), d.ln1_g, d.ln1_b);
    dx = std::move(dx_in);
  }

  // embedding scatter; replaced rows route to the adapted embeddings
  g.d_embedded = dx;
  for (std::size_t t = 0; t < len; ++t) {
    if (replaced && inj.user_pos == t) {
      for (uint32_t cc = 0; cc < h; ++cc) g.d_a_user[cc] += dx.at(t, cc);
      continue;
    }
    if (replaced && inj.item_pos == t) {
      for (uint32_t cc = 0; cc < h; ++cc) g.d_a_item[cc] += dx.at(t, cc);
      continue;
    }
    const auto id = static_cast<std::size_t>(tokens[t]);
    double* dtok = g.tok_emb.v.data() + id * h;
    double* dpos = g.pos_emb.v.data() + t * h;
    const double* src = dx.v.data() + t * h;
    for (uint32_t cc = 0; cc < h; ++cc) {
      dtok[cc] += src[cc];
      dpos[cc] += src[cc];
    }
  }
  return g;
}

}  // namespace recex
