#include "recex/gnn_train.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "recex/adam.hpp"
#include "recex/errors.hpp"

namespace recex {

void refresh_finals(const InteractionGraph& g, EmbeddingTable& table) {
  const auto layers = propagate(g, table.user0, table.item0, table.num_layers);
  auto finals = final_embeddings(layers);
  table.final_user = std::move(finals.users);
  table.final_item = std::move(finals.items);
}

GnnTrainResult train_tokenizer(const InteractionGraph& g, const GnnTrainConfig& cfg) {
  bool has_validation = false;
  for (auto s : g.edge_split)
    if (s == Split::validation) has_validation = true;
  if (!has_validation)
    throw DataError("train_tokenizer: graph has no validation split");

  Rng rng(cfg.seed);
  EmbeddingTable table =
      EmbeddingTable::init(g.num_users, g.num_items, cfg.dim, cfg.num_layers,
                           cfg.init_std, rng);

  // Positive pool: all train edges. Each epoch shuffles it and pairs every
  // positive with one fresh uniform negative.
  std::vector<Interaction> positives;
  for (std::size_t e = 0; e < g.edges.size(); ++e)
    if (g.edge_split[e] == Split::train) positives.push_back(g.edges[e]);

  Adam opt_user{.lr = cfg.lr}, opt_item{.lr = cfg.lr};

  GnnTrainResult result;
  EmbeddingTable best = table;
  uint32_t since_best = 0;

  for (uint32_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    for (std::size_t i = positives.size(); i > 1; --i) {
      const std::size_t j = rng.uniform_int(i);
      std::swap(positives[i - 1], positives[j]);
    }

    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < positives.size(); start += cfg.batch_size) {
      const std::size_t stop = std::min(start + cfg.batch_size, positives.size());
      BprBatch batch;
      batch.triples.reserve(stop - start);
      for (std::size_t e = start; e < stop; ++e)
        batch.triples.push_back({positives[e].user, positives[e].item,
                                 sample_negative(g, positives[e].user, rng)});

      const auto layers = propagate(g, table.user0, table.item0, cfg.num_layers);
      const BprGradients grads = bpr_gradients(g, table, layers, batch, cfg.lambda);
      const double step_loss = grads.loss + grads.reg;
      if (!std::isfinite(step_loss))
        throw NumericError("train_tokenizer: non-finite loss at epoch " +
                           std::to_string(epoch) + ", step " +
                           std::to_string(start / cfg.batch_size));
      epoch_loss += step_loss;

      opt_user.step(table.user0.v, grads.grad_user0.v);
      opt_item.step(table.item0.v, grads.grad_item0.v);
    }

    refresh_finals(g, table);
    const double recall =
        recall_at_k(table.final_user, table.final_item, g, cfg.eval_k, Split::validation);
    result.log.push_back({epoch, epoch_loss, recall});

    if (recall > result.best_recall || result.log.size() == 1) {
      result.best_recall = recall;
      result.best_epoch = epoch;
      best = table;
      since_best = 0;
    } else if (++since_best >= cfg.patience) {
      break;
    }
  }

  result.table = std::move(best);
  if (result.table.final_user.rows == 0) refresh_finals(g, result.table);
  result.rng_state = rng.state();
  return result;
}

}  // namespace recex
