#pragma once

#include <optional>
#include <string>

#include "recex/minilm.hpp"
#include "recex/moe_adapter.hpp"

namespace recex {

// Unified model container, binary format "RXUC" version 1. Holds the
// vocabulary pins, the LM with its frozen flag, the adapter(s), a reference
// hash of the collaborative finals the adapter was trained against, and the
// resolved run configuration as a JSON string. All doubles round-trip bit
// for bit.
struct UnifiedCheckpoint {
  MiniLm lm;
  MoeAdapter adapter_user;
  std::optional<MoeAdapter> adapter_item;  // present when adapters are split
  uint64_t gnn_finals_hash = 0;
  std::string config_json;
};

// Hash binding a checkpoint to the exact collaborative embeddings.
uint64_t finals_hash(const DenseMatrix& final_user, const DenseMatrix& final_item);

void save_unified_checkpoint(const std::string& path, const UnifiedCheckpoint& ckpt);
UnifiedCheckpoint load_unified_checkpoint(const std::string& path);

// Throws DataError when the stored reference hash does not match the finals.
void require_matching_finals(const UnifiedCheckpoint& ckpt,
                             const DenseMatrix& final_user,
                             const DenseMatrix& final_item);

// Plain LM checkpoint ("RXLM" version 1) for the pretraining stage.
void save_lm_checkpoint(const std::string& path, const MiniLm& lm);
MiniLm load_lm_checkpoint(const std::string& path);

}  // namespace recex
