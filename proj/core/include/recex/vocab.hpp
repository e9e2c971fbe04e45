#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace recex {

// Byte-level vocabulary. Ids 0..255 are the raw byte values, so encode and
// decode are exactly inverse on arbitrary text. The reserved special ids
// follow the byte range and are pinned:
//
//   256 PAD, 257 BOS, 258 EOS, 259 USER_EMBED, 260 ITEM_EMBED, 261 EXPLAIN_POS
//
// Checkpoints store these ids and loading verifies they match.
struct Vocabulary {
  static constexpr int kPad = 256;
  static constexpr int kBos = 257;
  static constexpr int kEos = 258;
  static constexpr int kUserEmbed = 259;
  static constexpr int kItemEmbed = 260;
  static constexpr int kExplainPos = 261;
  static constexpr int kSize = 262;

  static bool is_special(int id) { return id >= 256 && id < kSize; }
  static bool is_valid(int id) { return id >= 0 && id < kSize; }
  static const char* special_name(int id);

  static std::vector<int> encode(std::string_view text);
  // Specials are skipped; byte ids map back to their bytes.
  static std::string decode(std::span<const int> ids);
};

}  // namespace recex
