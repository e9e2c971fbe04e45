#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "recex/graph.hpp"
#include "recex/lightgcn.hpp"

namespace recex {

struct GnnTrainConfig {
  uint32_t dim = 64;
  uint32_t num_layers = 3;
  double lambda = 1e-4;
  double lr = 1e-3;
  uint32_t batch_size = 1024;
  uint32_t patience = 10;   // evaluations (one per epoch) without improvement
  uint32_t eval_k = 20;     // Recall@K on the validation split
  uint32_t max_epochs = 200;
  double init_std = 0.1;
  uint64_t seed = 1;
};

struct GnnEpochLog {
  uint32_t epoch = 0;
  double loss = 0.0;    // summed bpr+reg over the epoch's batches
  double recall = 0.0;  // validation Recall@K after the epoch
};

struct GnnTrainResult {
  EmbeddingTable table;  // best checkpoint, finals filled in
  std::vector<GnnEpochLog> log;
  uint32_t best_epoch = 0;
  double best_recall = 0.0;
  uint64_t rng_state = 0;  // stream position at the stop point
};

// BPR + norm-regularization training of the layer-0 embeddings with early
// stopping on validation Recall@K. Deterministic for a fixed seed. Throws
// NumericError with the failing epoch/step if the loss turns non-finite.
GnnTrainResult train_tokenizer(const InteractionGraph& g, const GnnTrainConfig& cfg);

// Recomputes finals (propagate + layer mean) for a table on a graph.
void refresh_finals(const InteractionGraph& g, EmbeddingTable& table);

}  // namespace recex
