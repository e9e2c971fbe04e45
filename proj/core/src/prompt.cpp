#include "recex/prompt.hpp"

#include <algorithm>

#include "recex/errors.hpp"

namespace recex {

PromptTemplate PromptTemplate::standard() {
  return {
      "A user<USER_EMBED>{user_profile} interacted with an "
      "item<ITEM_EMBED>{item_profile}. Explain why the user would enjoy this "
      "item: <EXPLAIN_POS>"};
}

namespace {

std::size_t find_unique(const std::string& text, const std::string& needle) {
  const std::size_t first = text.find(needle);
  if (first == std::string::npos)
    throw DataError("prompt template: missing placeholder " + needle);
  if (text.find(needle, first + needle.size()) != std::string::npos)
    throw DataError("prompt template: duplicated placeholder " + needle);
  return first;
}

void replace_all(std::string& text, const std::string& from, const std::string& to) {
  std::size_t pos = 0;
  while ((pos = text.find(from, pos)) != std::string::npos) {
    text.replace(pos, from.size(), to);
    pos += to.size();
  }
}

}  // namespace

PromptInstance build_prompt(const std::string& user_id, const std::string& item_id,
                            const std::optional<ProfilePair>& profiles,
                            const PromptTemplate& tmpl) {
  std::string text = tmpl.text;
  const std::size_t p_user = find_unique(text, "<USER_EMBED>");
  const std::size_t p_item = find_unique(text, "<ITEM_EMBED>");
  const std::size_t p_explain = find_unique(text, "<EXPLAIN_POS>");
  if (!(p_user < p_item && p_item < p_explain))
    throw DataError("prompt template: placeholders out of order");

  if (profiles.has_value()) {
    replace_all(text, "{user_profile}", " (" + profiles->user_text + ")");
    replace_all(text, "{item_profile}", " (" + profiles->item_text + ")");
  } else {
    replace_all(text, "{user_profile}", "");
    replace_all(text, "{item_profile}", "");
  }

  PromptInstance out;
  out.user_id = user_id;
  out.item_id = item_id;
  out.include_profiles = profiles.has_value();
  out.tokens.push_back(Vocabulary::kBos);

  std::size_t cursor = 0;
  auto emit_until = [&](std::size_t stop) {
    const auto bytes = Vocabulary::encode({text.data() + cursor, stop - cursor});
    out.tokens.insert(out.tokens.end(), bytes.begin(), bytes.end());
    cursor = stop;
  };

  struct Marker {
    const char* name;
    int token;
    std::size_t* pos;
  };
  Marker markers[] = {{"<USER_EMBED>", Vocabulary::kUserEmbed, &out.user_pos},
                      {"<ITEM_EMBED>", Vocabulary::kItemEmbed, &out.item_pos},
                      {"<EXPLAIN_POS>", Vocabulary::kExplainPos, &out.explain_pos}};
  for (const auto& m : markers) {
    const std::size_t at = text.find(m.name, cursor);
    emit_until(at);
    *m.pos = out.tokens.size();
    out.tokens.push_back(m.token);
    cursor = at + std::string(m.name).size();
  }
  emit_until(text.size());

  out.target_begin = out.tokens.size();
  return out;
}

void attach_target(PromptInstance& prompt, const std::string& explanation) {
  if (explanation.empty()) throw DataError("attach_target: empty target");
  prompt.target_begin = prompt.tokens.size();
  const auto bytes = Vocabulary::encode(explanation);
  prompt.tokens.insert(prompt.tokens.end(), bytes.begin(), bytes.end());
  prompt.tokens.push_back(Vocabulary::kEos);
}

}  // namespace recex
