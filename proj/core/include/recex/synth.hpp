#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "recex/corpus.hpp"

namespace recex {

// Planted block-structured dataset generator. Users and items belong to
// groups; users interact mostly within their group, reviews name the item's
// two aspect words and the user's group flavor word, so downstream
// explanations are a deterministic function of (user group, item aspects).
struct SynthConfig {
  uint64_t seed = 1;
  uint32_t num_users = 200;
  uint32_t num_items = 200;
  uint32_t groups = 2;
  uint32_t edges_per_user = 20;
  double cross_group_prob = 0.0;
  std::vector<std::string> aspects;     // defaults provided when empty
  std::vector<std::string> adjectives;  // one flavor word per group
};

struct SynthResult {
  std::vector<DatasetRecord> records;
  std::vector<uint32_t> user_group;  // indexed by user number (id "u%04u")
  std::vector<uint32_t> item_group;
  std::vector<std::array<uint32_t, 2>> item_aspects;  // indices into aspects
  std::vector<std::string> aspects;
  std::vector<std::string> adjectives;
  std::string description;
};

SynthResult synthesize_dataset(const SynthConfig& cfg);

}  // namespace recex
