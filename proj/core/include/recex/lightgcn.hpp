#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "recex/graph.hpp"
#include "recex/matrix.hpp"
#include "recex/rng.hpp"

namespace recex {

// Trainable layer-0 user/item embeddings plus the propagated finals.
struct EmbeddingTable {
  uint32_t dim = 64;
  uint32_t num_layers = 3;  // propagation depth
  DenseMatrix user0;        // m x dim
  DenseMatrix item0;        // n x dim
  DenseMatrix final_user;   // m x dim, mean of layers 0..num_layers
  DenseMatrix final_item;   // n x dim

  static EmbeddingTable init(uint32_t num_users, uint32_t num_items, uint32_t dim,
                             uint32_t num_layers, double init_std, Rng& rng);
};

struct LayerEmbeddings {
  DenseMatrix users;
  DenseMatrix items;
};

// Symmetric-normalized message passing over train edges. Returns L+1 layers
// including layer 0. With L >= 1 every user and item must have train degree
// >= 1; an isolated node raises NumericError naming it.
std::vector<LayerEmbeddings> propagate(const InteractionGraph& g,
                                       const DenseMatrix& user0,
                                       const DenseMatrix& item0, uint32_t L);

// One reverse propagation step: out = A^T * in = A * in (the normalized
// bipartite operator is symmetric). Exposed for the gradient path.
LayerEmbeddings propagate_step(const InteractionGraph& g, const DenseMatrix& users,
                               const DenseMatrix& items);

// Elementwise mean over layers; throws NumericError on shape mismatch.
LayerEmbeddings final_embeddings(std::span<const LayerEmbeddings> layers);

// Inner-product preference score.
double score(std::span<const double> user_emb, std::span<const double> item_emb);

struct BprTriple {
  uint32_t user = 0;
  uint32_t pos_item = 0;
  uint32_t neg_item = 0;
};

struct BprBatch {
  std::vector<BprTriple> triples;

  // Checks the contract: pos is a train edge of user, neg is no edge of user
  // in any split.
  void validate(const InteractionGraph& g) const;
};

struct BprGradients {
  double loss = 0.0;           // pairwise ranking part only
  double reg = 0.0;            // regularization part
  DenseMatrix grad_user0;      // d(loss + reg) / d layer-0 user embeddings
  DenseMatrix grad_item0;
};

// -sum ln sigmoid(y_pos - y_neg) over the batch, on the given finals.
double bpr_loss(const BprBatch& batch, const DenseMatrix& final_user,
                const DenseMatrix& final_item);

// lambda * sum of squared layer-0 norms over the listed node occurrences.
double reg_loss_nodes(const DenseMatrix& user0, const DenseMatrix& item0,
                      std::span<const uint32_t> users, std::span<const uint32_t> items,
                      double lambda);

// Batch regularization: each triple contributes its user, positive item and
// negative item (occurrences counted, not deduplicated).
double reg_loss(const DenseMatrix& user0, const DenseMatrix& item0,
                const BprBatch& batch, double lambda);

// Joint loss + analytic gradients w.r.t. layer 0, with the chain running
// through propagation and layer averaging.
BprGradients bpr_gradients(const InteractionGraph& g, const EmbeddingTable& table,
                           std::span<const LayerEmbeddings> layers,
                           const BprBatch& batch, double lambda);

// Uniform negative item for u over items with no edge to u in any split.
// Throws DataError when every item is interacted with.
uint32_t sample_negative(const InteractionGraph& g, uint32_t u, Rng& rng);

// Mean Recall@K over users with at least one held-out edge in eval_split.
// Candidate items per user exclude that user's train items; ties are broken
// by ascending item id. Throws DataError if K exceeds a user's candidates.
double recall_at_k(const DenseMatrix& final_user, const DenseMatrix& final_item,
                   const InteractionGraph& g, uint32_t k, Split eval_split);

// Inference-time embedding for a user unseen during training: one
// normalized propagation step over the final embeddings of the items the
// user interacted with at test time,
//   e_u = sum_i e_i / sqrt(|S| * max(train_degree(i), 1)).
// Throws DataError when the item list is empty.
std::vector<double> zero_shot_user_embedding(const InteractionGraph& g,
                                             const DenseMatrix& final_item,
                                             std::span<const uint32_t> test_items);

}  // namespace recex
