#include "recex/lightgcn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "recex/errors.hpp"
#include "recex/numerics.hpp"

namespace recex {

EmbeddingTable EmbeddingTable::init(uint32_t num_users, uint32_t num_items,
                                    uint32_t dim, uint32_t num_layers,
                                    double init_std, Rng& rng) {
  EmbeddingTable t;
  t.dim = dim;
  t.num_layers = num_layers;
  t.user0 = DenseMatrix(num_users, dim);
  t.item0 = DenseMatrix(num_items, dim);
  rng.fill_normal(t.user0.v, 0.0, init_std);
  rng.fill_normal(t.item0.v, 0.0, init_std);
  return t;
}

namespace {

void check_no_isolated(const InteractionGraph& g) {
  for (uint32_t u = 0; u < g.num_users; ++u) {
    if (!g.user_neighbors[u].empty()) continue;
    bool excluded = std::find(g.users_excluded_from_train.begin(),
                              g.users_excluded_from_train.end(),
                              u) != g.users_excluded_from_train.end();
    if (!excluded)
      throw NumericError("propagate: isolated user " + std::to_string(u));
  }
  for (uint32_t i = 0; i < g.num_items; ++i)
    if (g.item_neighbors[i].empty())
      throw NumericError("propagate: isolated item " + std::to_string(i));
}

}  // namespace

LayerEmbeddings propagate_step(const InteractionGraph& g, const DenseMatrix& users,
                               const DenseMatrix& items) {
  const std::size_t d = users.cols;
  LayerEmbeddings next{DenseMatrix(g.num_users, d), DenseMatrix(g.num_items, d)};
  for (uint32_t u = 0; u < g.num_users; ++u) {
    const auto& nbrs = g.user_neighbors[u];
    if (nbrs.empty()) continue;
    const double du = std::sqrt(static_cast<double>(nbrs.size()));
    double* out = next.users.v.data() + std::size_t{u} * d;
    for (uint32_t i : nbrs) {
      const double w = 1.0 / (du * std::sqrt(static_cast<double>(g.item_neighbors[i].size())));
      const double* src = items.v.data() + std::size_t{i} * d;
      for (std::size_t c = 0; c < d; ++c) out[c] += w * src[c];
    }
  }
  for (uint32_t i = 0; i < g.num_items; ++i) {
    const auto& nbrs = g.item_neighbors[i];
    if (nbrs.empty()) continue;
    const double di = std::sqrt(static_cast<double>(nbrs.size()));
    double* out = next.items.v.data() + std::size_t{i} * d;
    for (uint32_t u : nbrs) {
      const double w = 1.0 / (di * std::sqrt(static_cast<double>(g.user_neighbors[u].size())));
      const double* src = users.v.data() + std::size_t{u} * d;
      for (std::size_t c = 0; c < d; ++c) out[c] += w * src[c];
    }
  }
  return next;
}

std::vector<LayerEmbeddings> propagate(const InteractionGraph& g,
                                       const DenseMatrix& user0,
                                       const DenseMatrix& item0, uint32_t L) {
  if (user0.rows != g.num_users || item0.rows != g.num_items || user0.cols != item0.cols)
    throw NumericError("propagate: embedding shape does not match graph");
  if (L >= 1) check_no_isolated(g);

  std::vector<LayerEmbeddings> layers;
  layers.reserve(L + 1);
  layers.push_back({user0, item0});
  for (uint32_t l = 0; l < L; ++l)
    layers.push_back(propagate_step(g, layers.back().users, layers.back().items));
  for (const auto& layer : layers)
    if (!all_finite(layer.users) || !all_finite(layer.items))
      throw NumericError("propagate: non-finite embedding produced");
  return layers;
}

LayerEmbeddings final_embeddings(std::span<const LayerEmbeddings> layers) {
  if (layers.empty()) throw NumericError("final_embeddings: no layers");
  for (const auto& l : layers)
    if (!l.users.same_shape(layers[0].users) || !l.items.same_shape(layers[0].items))
      throw NumericError("final_embeddings: layer shape mismatch");

  LayerEmbeddings out{DenseMatrix(layers[0].users.rows, layers[0].users.cols),
                      DenseMatrix(layers[0].items.rows, layers[0].items.cols)};
  const double w = 1.0 / static_cast<double>(layers.size());
  // Fixed summation order: layer 0 upward, then one final scale.
  for (const auto& l : layers) {
    add_inplace(out.users, l.users);
    add_inplace(out.items, l.items);
  }
  scale_inplace(out.users, w);
  scale_inplace(out.items, w);
  return out;
}

double score(std::span<const double> user_emb, std::span<const double> item_emb) {
  if (user_emb.size() != item_emb.size())
    throw NumericError("score: dimension mismatch");
  return dot(user_emb, item_emb);
}

void BprBatch::validate(const InteractionGraph& g) const {
  for (const auto& t : triples) {
    if (t.user >= g.num_users || t.pos_item >= g.num_items || t.neg_item >= g.num_items)
      throw DataError("bpr batch: id out of range");
    const auto& pos = g.user_neighbors[t.user];
    if (!std::binary_search(pos.begin(), pos.end(), t.pos_item))
      throw DataError("bpr batch: positive item is not a train edge");
    const auto& all = g.user_items_all[t.user];
    if (std::binary_search(all.begin(), all.end(), t.neg_item))
      throw DataError("bpr batch: negative item is an edge of the user");
  }
}

double bpr_loss(const BprBatch& batch, const DenseMatrix& final_user,
                const DenseMatrix& final_item) {
  double loss = 0.0;
  for (const auto& t : batch.triples) {
    const double y_pos = dot(final_user.row(t.user), final_item.row(t.pos_item));
    const double y_neg = dot(final_user.row(t.user), final_item.row(t.neg_item));
    loss -= log_sigmoid(y_pos - y_neg);
  }
  return loss;
}

double reg_loss_nodes(const DenseMatrix& user0, const DenseMatrix& item0,
                      std::span<const uint32_t> users, std::span<const uint32_t> items,
                      double lambda) {
  if (lambda < 0.0) throw NumericError("reg_loss: lambda must be >= 0");
  double s = 0.0;
  for (uint32_t u : users) {
    auto r = user0.row(u);
    s += dot(r, r);
  }
  for (uint32_t i : items) {
    auto r = item0.row(i);
    s += dot(r, r);
  }
  return lambda * s;
}

double reg_loss(const DenseMatrix& user0, const DenseMatrix& item0,
                const BprBatch& batch, double lambda) {
  std::vector<uint32_t> users, items;
  users.reserve(batch.triples.size());
  items.reserve(2 * batch.triples.size());
  for (const auto& t : batch.triples) {
    users.push_back(t.user);
    items.push_back(t.pos_item);
    items.push_back(t.neg_item);
  }
  return reg_loss_nodes(user0, item0, users, items, lambda);
}

BprGradients bpr_gradients(const InteractionGraph& g, const EmbeddingTable& table,
                           std::span<const LayerEmbeddings> layers,
                           const BprBatch& batch, double lambda) {
  const LayerEmbeddings finals = final_embeddings(layers);
  const std::size_t d = finals.users.cols;

  BprGradients out;
  out.grad_user0 = DenseMatrix(finals.users.rows, d);
  out.grad_item0 = DenseMatrix(finals.items.rows, d);

  // d(bpr)/d(finals)
  DenseMatrix g_user(finals.users.rows, d), g_item(finals.items.rows, d);
  for (const auto& t : batch.triples) {
    const double* eu = finals.users.v.data() + std::size_t{t.user} * d;
    const double* ei = finals.items.v.data() + std::size_t{t.pos_item} * d;
    const double* ej = finals.items.v.data() + std::size_t{t.neg_item} * d;
    const double x = dot({eu, d}, {ei, d}) - dot({eu, d}, {ej, d});
    out.loss -= log_sigmoid(x);
    // d/dx of -ln sigmoid(x) is -sigmoid(-x)
    const double c = -sigmoid(-x);
    double* gu = g_user.v.data() + std::size_t{t.user} * d;
    double* gi = g_item.v.data() + std::size_t{t.pos_item} * d;
    double* gj = g_item.v.data() + std::size_t{t.neg_item} * d;
    for (std::size_t k = 0; k < d; ++k) {
      gu[k] += c * (ei[k] - ej[k]);
      gi[k] += c * eu[k];
      gj[k] -= c * eu[k];
    }
  }

  // Finals are the mean of layers 0..L of A^l * e0, so
  // d e0 = sum_l A^l (dF / (L+1)) with the symmetric operator A.
  const uint32_t L = table.num_layers;
  const double w = 1.0 / static_cast<double>(L + 1);
  scale_inplace(g_user, w);
  scale_inplace(g_item, w);
  LayerEmbeddings acc{g_user, g_item};
  add_inplace(out.grad_user0, acc.users);
  add_inplace(out.grad_item0, acc.items);
  for (uint32_t l = 0; l < L; ++l) {
    acc = propagate_step(g, acc.users, acc.items);
    add_inplace(out.grad_user0, acc.users);
    add_inplace(out.grad_item0, acc.items);
  }

  // Regularization acts directly on layer 0.
  out.reg = reg_loss(table.user0, table.item0, batch, lambda);
  for (const auto& t : batch.triples) {
    double* gu = out.grad_user0.v.data() + std::size_t{t.user} * d;
    const double* eu = table.user0.v.data() + std::size_t{t.user} * d;
    for (std::size_t k = 0; k < d; ++k) gu[k] += 2.0 * lambda * eu[k];
    for (uint32_t item : {t.pos_item, t.neg_item}) {
      double* gi = out.grad_item0.v.data() + std::size_t{item} * d;
      const double* ei = table.item0.v.data() + std::size_t{item} * d;
      for (std::size_t k = 0; k < d; ++k) gi[k] += 2.0 * lambda * ei[k];
    }
  }
  return out;
}

uint32_t sample_negative(const InteractionGraph& g, uint32_t u, Rng& rng) {
  const auto& excluded = g.user_items_all[u];  // sorted
  if (excluded.size() >= g.num_items)
    throw DataError("sample_negative: user " + std::to_string(u) +
                    " interacted with every item");
  // Draw an index into the complement and shift it past excluded ids.
  uint64_t k = rng.uniform_int(g.num_items - excluded.size());
  for (uint32_t ex : excluded) {
    if (ex <= k)
      ++k;
    else
      break;
  }
  return static_cast<uint32_t>(k);
}

double recall_at_k(const DenseMatrix& final_user, const DenseMatrix& final_item,
                   const InteractionGraph& g, uint32_t k, Split eval_split) {
  if (k == 0) throw DataError("recall_at_k: K must be >= 1");

  // Held-out items per user for the chosen split.
  std::vector<std::vector<uint32_t>> held(g.num_users);
  for (std::size_t e = 0; e < g.edges.size(); ++e)
    if (g.edge_split[e] == eval_split) held[g.edges[e].user].push_back(g.edges[e].item);

  double total = 0.0;
  std::size_t evaluated = 0;
  std::vector<uint32_t> candidates;
  std::vector<uint32_t> top;
  for (uint32_t u = 0; u < g.num_users; ++u) {
    if (held[u].empty()) continue;
    const auto& train_items = g.user_neighbors[u];
    candidates.clear();
    candidates.reserve(g.num_items - train_items.size());
    for (uint32_t i = 0; i < g.num_items; ++i)
      if (!std::binary_search(train_items.begin(), train_items.end(), i))
        candidates.push_back(i);
    if (candidates.size() < k)
      throw DataError("recall_at_k: K exceeds candidate items for user " +
                      std::to_string(u));

    std::vector<double> scores(candidates.size());
    for (std::size_t c = 0; c < candidates.size(); ++c)
      scores[c] = dot(final_user.row(u), final_item.row(candidates[c]));

    std::vector<std::size_t> order(candidates.size());
    std::iota(order.begin(), order.end(), 0);
    auto better = [&](std::size_t a, std::size_t b) {
      if (scores[a] != scores[b]) return scores[a] > scores[b];
      return candidates[a] < candidates[b];  // deterministic tie-break: ascending id
    };
    std::partial_sort(order.begin(), order.begin() + k, order.end(), better);
    top.clear();
    for (std::size_t c = 0; c < k; ++c) top.push_back(candidates[order[c]]);
    std::sort(top.begin(), top.end());

    std::size_t hit = 0;
    for (uint32_t h : held[u])
      if (std::binary_search(top.begin(), top.end(), h)) ++hit;
    total += static_cast<double>(hit) / static_cast<double>(held[u].size());
    ++evaluated;
  }
  if (evaluated == 0) throw DataError("recall_at_k: no users with held-out edges");
  return total / static_cast<double>(evaluated);
}

std::vector<double> zero_shot_user_embedding(const InteractionGraph& g,
                                             const DenseMatrix& final_item,
                                             std::span<const uint32_t> test_items) {
  if (test_items.empty())
    throw DataError("zero_shot_user_embedding: no test-time items");
  const std::size_t d = final_item.cols;
  std::vector<double> out(d, 0.0);
  const double du = std::sqrt(static_cast<double>(test_items.size()));
  for (uint32_t i : test_items) {
    if (i >= final_item.rows)
      throw DataError("zero_shot_user_embedding: item id out of range");
    const double deg = std::max<std::size_t>(g.train_degree_item(i), 1);
    const double w = 1.0 / (du * std::sqrt(static_cast<double>(deg)));
    const double* row = final_item.v.data() + std::size_t{i} * d;
    for (std::size_t c = 0; c < d; ++c) out[c] += w * row[c];
  }
  return out;
}

}  // namespace recex
