#include "recex/vocab.hpp"

namespace recex {

const char* Vocabulary::special_name(int id) {
  switch (id) {
    case kPad: return "<PAD>";
    case kBos: return "<BOS>";
    case kEos: return "<EOS>";
    case kUserEmbed: return "<USER_EMBED>";
    case kItemEmbed: return "<ITEM_EMBED>";
    case kExplainPos: return "<EXPLAIN_POS>";
    default: return "";
  }
}

std::vector<int> Vocabulary::encode(std::string_view text) {
  std::vector<int> ids;
  ids.reserve(text.size());
  for (unsigned char c : text) ids.push_back(static_cast<int>(c));
  return ids;
}

std::string Vocabulary::decode(std::span<const int> ids) {
  std::string out;
  out.reserve(ids.size());
  for (int id : ids)
    if (id >= 0 && id < 256) out.push_back(static_cast<char>(id));
  return out;
}

}  // namespace recex
