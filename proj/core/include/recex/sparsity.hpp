#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "recex/corpus.hpp"
#include "recex/graph.hpp"

namespace recex {

struct SparsityConfig {
  int bins = 5;
  double zero_shot_fraction = 0.1;
  uint64_t seed = 7;
};

// Result of bucketing test users by train frequency plus carving out a
// zero-shot user set. Record indices refer to dataset.records. Zero-shot
// users do not appear in train_records or val_records at all; their every
// interaction lands in zero_shot_records.
struct SparsitySplits {
  std::vector<std::vector<std::string>> bin_users;  // tst1 (rarest) .. tstB
  std::vector<std::string> zero_shot_users;

  std::vector<std::size_t> train_records;
  std::vector<std::size_t> val_records;
  std::vector<std::vector<std::size_t>> bin_test_records;
  std::vector<std::size_t> zero_shot_records;

  int effective_bins = 0;
  bool merged_warning = false;  // fewer distinct frequencies than bins
};

// Splits edges via build_graph(spec), samples zero-shot users from the test
// users (seeded), and buckets the remaining test users into equal-count
// frequency bins (ties resolved toward the lower bin by ascending user id).
SparsitySplits sparsity_split(const Dataset& ds, const SplitSpec& spec,
                              const SparsityConfig& cfg);

}  // namespace recex
