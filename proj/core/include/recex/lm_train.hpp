#pragma once

#include <cstdint>
#include <vector>

#include "recex/minilm.hpp"
#include "recex/moe_adapter.hpp"

namespace recex {

struct PretrainConfig {
  uint32_t steps = 200;
  uint32_t batch_size = 8;
  double lr = 1e-3;
  uint64_t seed = 11;
};

struct StepLog {
  uint32_t step = 0;
  double loss = 0.0;  // batch-mean sequence NLL
};

// Next-token training of every LM parameter on raw token sequences (loss over
// all positions). Throws DataError if the model is frozen and NumericError
// with the step index if the loss diverges.
std::vector<StepLog> pretrain_lm(MiniLm& lm,
                                 const std::vector<std::vector<int>>& sequences,
                                 const PretrainConfig& cfg);

// One training example for the adapter stage: a prompt with its target
// attached plus the dense graph indices of the pair.
struct AdapterExample {
  uint32_t user_index = 0;
  uint32_t item_index = 0;
  PromptInstance prompt;
};

struct AdapterTrainConfig {
  uint32_t steps = 300;
  uint32_t batch_size = 8;
  double lr = 1e-3;
  uint64_t seed = 13;
  bool inject = true;  // per-layer additive terms (off: w/o-injection ablation)
};

// Adapter-only optimization of the explanation NLL with the LM frozen. The
// same adapter serves users and items unless a distinct item adapter is
// passed. LM parameters and the collaborative embeddings are never written;
// callers can verify via param_hash / content_hash.
std::vector<StepLog> train_adapter(const MiniLm& lm, MoeAdapter& adapter_user,
                                   MoeAdapter* adapter_item,
                                   const DenseMatrix& final_user,
                                   const DenseMatrix& final_item,
                                   const std::vector<AdapterExample>& examples,
                                   const AdapterTrainConfig& cfg);

// Deterministic inference-mode NLL (mean per sequence) of a set of examples;
// used for held-out evaluation and the improvement criteria.
double evaluate_nll(const MiniLm& lm, const MoeAdapter& adapter_user,
                    const MoeAdapter* adapter_item, const DenseMatrix& final_user,
                    const DenseMatrix& final_item,
                    const std::vector<AdapterExample>& examples, bool inject);

}  // namespace recex
