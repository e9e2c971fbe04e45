#include "recex/lm_train.hpp"

#include <cmath>
#include <string>

#include "recex/adam.hpp"
#include "recex/errors.hpp"

namespace recex {

namespace {

template <typename T>
void seeded_shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::size_t j = rng.uniform_int(i);
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace

std::vector<StepLog> pretrain_lm(MiniLm& lm,
                                 const std::vector<std::vector<int>>& sequences,
                                 const PretrainConfig& cfg) {
  if (lm.frozen) throw DataError("pretrain_lm: model is frozen");
  if (sequences.empty()) throw DataError("pretrain_lm: empty corpus");

  Rng rng(cfg.seed);
  std::vector<std::size_t> order(sequences.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  seeded_shuffle(order, rng);

  auto params = lm.param_spans();
  std::vector<Adam> opts(params.size(), Adam{.lr = cfg.lr});

  std::vector<StepLog> log;
  std::size_t cursor = 0;
  for (uint32_t step = 0; step < cfg.steps; ++step) {
    LmGrads grads = LmGrads::zeros_like(lm);
    double batch_loss = 0.0;
    for (uint32_t b = 0; b < cfg.batch_size; ++b) {
      if (cursor == order.size()) {
        cursor = 0;
        seeded_shuffle(order, rng);
      }
      const auto& seq = sequences[order[cursor++]];
      LmForwardCache cache;
      const DenseMatrix embedded = embed_tokens(lm, seq);
      const DenseMatrix logits = forward_injected(lm, embedded, {}, &cache);
      batch_loss += nll_loss(logits, seq, 0);
      DenseMatrix d_logits = nll_backward(logits, seq, 0);
      scale_inplace(d_logits, 1.0 / cfg.batch_size);
      LmGrads g = lm_backward(lm, cache, d_logits, seq, false);
      grads.accumulate(g);
    }
    batch_loss /= cfg.batch_size;
    if (!std::isfinite(batch_loss))
      throw NumericError("pretrain_lm: non-finite loss at step " + std::to_string(step));

    auto gspans = grads.param_spans();
    for (std::size_t i = 0; i < params.size(); ++i)
      opts[i].step(params[i], gspans[i]);
    log.push_back({step, batch_loss});
  }
  return log;
}

namespace {

struct AdapterOptimizer {
  Adam opt;
  explicit AdapterOptimizer(double lr) : opt{.lr = lr} {}

  void apply(MoeAdapter& adapter, const AdapterGrads& grads) {
    std::vector<double> flat_p = adapter.flatten();
    const std::vector<double> flat_g = grads.flatten();
    opt.step(flat_p, flat_g);
    adapter.unflatten(flat_p);
  }
};

AdapterGrads zero_adapter_grads(const MoeAdapter& a) {
  AdapterGrads g;
  g.d_experts.assign(a.cfg.num_experts, DenseMatrix(a.cfg.d_out, a.cfg.d_in));
  g.d_gate = DenseMatrix(a.cfg.num_experts, a.cfg.d_in);
  g.d_input.assign(a.cfg.d_in, 0.0);
  return g;
}

}  // namespace

std::vector<StepLog> train_adapter(const MiniLm& lm, MoeAdapter& adapter_user,
                                   MoeAdapter* adapter_item,
                                   const DenseMatrix& final_user,
                                   const DenseMatrix& final_item,
                                   const std::vector<AdapterExample>& examples,
                                   const AdapterTrainConfig& cfg) {
  if (!lm.frozen) throw DataError("train_adapter: language model must be frozen");
  if (examples.empty()) throw DataError("train_adapter: no examples");
  for (const auto& ex : examples)
    if (ex.prompt.target_len() == 0)
      throw DataError("train_adapter: example without target");

  const bool shared = adapter_item == nullptr;
  MoeAdapter& item_adapter = shared ? adapter_user : *adapter_item;
  adapter_user.mode = AdapterMode::training;
  item_adapter.mode = AdapterMode::training;

  Rng rng(cfg.seed);
  std::vector<std::size_t> order(examples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  seeded_shuffle(order, rng);

  AdapterOptimizer opt_user(cfg.lr);
  AdapterOptimizer opt_item(cfg.lr);

  std::vector<StepLog> log;
  std::size_t cursor = 0;
  for (uint32_t step = 0; step < cfg.steps; ++step) {
    AdapterGrads gu = zero_adapter_grads(adapter_user);
    AdapterGrads gi = zero_adapter_grads(item_adapter);
    double batch_loss = 0.0;

    for (uint32_t b = 0; b < cfg.batch_size; ++b) {
      if (cursor == order.size()) {
        cursor = 0;
        seeded_shuffle(order, rng);
      }
      const AdapterExample& ex = examples[order[cursor++]];

      AdapterForward rec_u, rec_i;
      const std::vector<double> a_u =
          adapt(adapter_user, final_user.row(ex.user_index), rng, &rec_u);
      const std::vector<double> a_i =
          adapt(item_adapter, final_item.row(ex.item_index), rng, &rec_i);

      InjectionSpec inj;
      inj.enabled = cfg.inject;
      inj.user_pos = ex.prompt.user_pos;
      inj.item_pos = ex.prompt.item_pos;
      inj.a_user = a_u;
      inj.a_item = a_i;

      const DenseMatrix embedded = embed_prompt(lm, ex.prompt, a_u, a_i);
      LmForwardCache cache;
      const DenseMatrix logits = forward_injected(lm, embedded, inj, &cache);
      batch_loss += nll_loss(logits, ex.prompt.tokens, ex.prompt.explain_pos);

      DenseMatrix d_logits = nll_backward(logits, ex.prompt.tokens, ex.prompt.explain_pos);
      scale_inplace(d_logits, 1.0 / cfg.batch_size);
      const LmGrads lmg = lm_backward(lm, cache, d_logits, ex.prompt.tokens, true);

      gu.accumulate(adapter_backward(adapter_user, rec_u, lmg.d_a_user));
      if (shared)
        gu.accumulate(adapter_backward(adapter_user, rec_i, lmg.d_a_item));
      else
        gi.accumulate(adapter_backward(item_adapter, rec_i, lmg.d_a_item));
    }

    batch_loss /= cfg.batch_size;
    if (!std::isfinite(batch_loss))
      throw NumericError("train_adapter: non-finite loss at step " + std::to_string(step));

    opt_user.apply(adapter_user, gu);
    if (!shared) opt_item.apply(item_adapter, gi);
    log.push_back({step, batch_loss});
  }

  adapter_user.mode = AdapterMode::inference;
  item_adapter.mode = AdapterMode::inference;
  return log;
}

double evaluate_nll(const MiniLm& lm, const MoeAdapter& adapter_user,
                    const MoeAdapter* adapter_item, const DenseMatrix& final_user,
                    const DenseMatrix& final_item,
                    const std::vector<AdapterExample>& examples, bool inject) {
  if (examples.empty()) throw DataError("evaluate_nll: no examples");
  MoeAdapter u = adapter_user;
  u.mode = AdapterMode::inference;
  MoeAdapter it = adapter_item ? *adapter_item : adapter_user;
  it.mode = AdapterMode::inference;

  Rng rng(0);  // unused in inference mode
  double total = 0.0;
  for (const auto& ex : examples) {
    const std::vector<double> a_u = adapt(u, final_user.row(ex.user_index), rng);
    const std::vector<double> a_i = adapt(it, final_item.row(ex.item_index), rng);
    InjectionSpec inj;
    inj.enabled = inject;
    inj.user_pos = ex.prompt.user_pos;
    inj.item_pos = ex.prompt.item_pos;
    inj.a_user = a_u;
    inj.a_item = a_i;
    const DenseMatrix embedded = embed_prompt(lm, ex.prompt, a_u, a_i);
    const DenseMatrix logits = forward_injected(lm, embedded, inj);
    total += nll_loss(logits, ex.prompt.tokens, ex.prompt.explain_pos);
  }
  return total / static_cast<double>(examples.size());
}

}  // namespace recex
