#pragma once

#include <cstdint>
#include <string>

#include "recex/lightgcn.hpp"

namespace recex {

// Tokenizer checkpoint, binary format "RXGC" version 1:
//
//   magic   4 bytes  "RXGC"
//   version u32
//   dim, num_layers, num_users, num_items   u32 each
//   epoch   u32
//   rng_state u64
//   user0   num_users*dim doubles, row-major, raw little-endian IEEE-754
//   item0   num_items*dim doubles
//
// Doubles are written as their exact bit patterns, so save/load round-trips
// bit for bit. Little-endian hosts are assumed (checked at load).
struct GnnCheckpoint {
  uint32_t epoch = 0;
  uint64_t rng_state = 0;
  EmbeddingTable table;  // finals are not stored; recompute via refresh_finals
};

void save_gnn_checkpoint(const std::string& path, const GnnCheckpoint& ckpt);
GnnCheckpoint load_gnn_checkpoint(const std::string& path);

}  // namespace recex
