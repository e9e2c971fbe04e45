#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "recex/vocab.hpp"

namespace recex {

// Structured prompt template. Must contain each of the placeholders
// <USER_EMBED>, <ITEM_EMBED>, <EXPLAIN_POS> exactly once and in that order.
// {user_profile} / {item_profile} mark where profile text goes; they expand
// to nothing when profiles are disabled.
struct PromptTemplate {
  std::string text;
  static PromptTemplate standard();
};

struct ProfilePair {
  std::string user_text;
  std::string item_text;
};

struct PromptInstance {
  std::string user_id;
  std::string item_id;
  std::vector<int> tokens;  // BOS + prompt body; training instances append
                            // target + EOS via attach_target
  std::size_t user_pos = 0;
  std::size_t item_pos = 0;
  std::size_t explain_pos = 0;
  std::size_t target_begin = 0;  // == tokens.size() until a target is attached
  bool include_profiles = true;

  std::size_t target_len() const { return tokens.size() - target_begin; }
};

// Tokenizes the template with profiles substituted (or omitted) and records
// the reserved positions. Throws DataError if the template is missing or
// duplicating a placeholder, or if the order is wrong.
PromptInstance build_prompt(const std::string& user_id, const std::string& item_id,
                            const std::optional<ProfilePair>& profiles,
                            const PromptTemplate& tmpl);

// Appends the ground-truth explanation tokens plus EOS; the loss is computed
// on positions strictly after explain_pos.
void attach_target(PromptInstance& prompt, const std::string& explanation);

}  // namespace recex
