#pragma once

#include <cstdint>
#include <string>

#include "recex/minilm.hpp"
#include "recex/moe_adapter.hpp"

namespace recex {

struct DecodeConfig {
  enum class Mode { greedy, sampled };
  Mode mode = Mode::greedy;
  double temperature = 1.0;
  uint64_t seed = 0;
  int max_words = 50;
};

// Counts maximal runs of non-whitespace (ASCII) characters.
std::size_t word_count(const std::string& text);

// Keeps at most max_words whitespace-delimited words, preserving the
// original spacing up to the cut and trimming trailing whitespace.
std::string truncate_words(const std::string& text, std::size_t max_words);

// Autoregressive decode anchored after EXPLAIN_POS. The prompt must not have
// a target attached. Replacement always applies; `inject` toggles the
// per-layer terms. Stops at EOS or at the word cap; greedy mode is fully
// deterministic, sampled mode is deterministic under the seed.
std::string generate(const MiniLm& lm, const PromptInstance& prompt,
                     std::span<const double> a_user, std::span<const double> a_item,
                     bool inject, const DecodeConfig& cfg);

// Incremental decoder state (per-layer key/value cache). Exposed so tests
// can verify cached decoding matches the batched forward bit for bit.
struct DecodeState {
  std::vector<DenseMatrix> k;  // per layer, max_context x hidden
  std::vector<DenseMatrix> v;
  std::size_t length = 0;

  static DecodeState make(const MiniLm& lm);
};

// Feeds one embedded row (position state.length) through the model and
// returns its logits row. `inject_a` may carry an adapted embedding to add
// through the layer projections at this position (nullptr otherwise).
std::vector<double> decode_step(const MiniLm& lm, DecodeState& state,
                                std::span<const double> embedded_row,
                                const double* inject_a);

}  // namespace recex
