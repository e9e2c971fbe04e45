#include "recex/synth.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

#include "recex/errors.hpp"
#include "recex/rng.hpp"

namespace recex {

namespace {

std::vector<std::string> default_aspects() {
  return {"aroma",   "texture",  "pacing",   "artwork",  "binding",  "flavor",
          "detail",  "warmth",   "clarity",  "balance",  "finish",   "rhythm",
          "depth",   "contrast", "lightness", "crunch",  "polish",   "scent",
          "framing", "melody",   "grain",    "sharpness", "comfort", "shine"};
}

std::vector<std::string> default_adjectives() {
  return {"rustic", "modern", "vintage", "minimal", "ornate", "playful",
          "somber", "bold"};
}

std::string format_id(char prefix, uint32_t n) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%c%04u", prefix, n);
  return buf;
}

}  // namespace

SynthResult synthesize_dataset(const SynthConfig& cfg) {
  if (cfg.groups < 1) throw DataError("synth: groups must be >= 1");
  if (cfg.groups > cfg.num_users || cfg.groups > cfg.num_items)
    throw DataError("synth: more groups than users or items");
  if (cfg.num_users == 0 || cfg.num_items == 0)
    throw DataError("synth: need at least one user and one item");

  SynthResult out;
  out.aspects = cfg.aspects.empty() ? default_aspects() : cfg.aspects;
  out.adjectives = cfg.adjectives.empty() ? default_adjectives() : cfg.adjectives;
  if (out.aspects.size() < 2) throw DataError("synth: need at least two aspects");
  if (out.adjectives.size() < cfg.groups)
    throw DataError("synth: need one adjective per group");

  Rng rng(cfg.seed);

  out.user_group.resize(cfg.num_users);
  for (uint32_t u = 0; u < cfg.num_users; ++u) out.user_group[u] = u % cfg.groups;
  out.item_group.resize(cfg.num_items);
  for (uint32_t i = 0; i < cfg.num_items; ++i) out.item_group[i] = i % cfg.groups;

  // Unique aspect pairs while they last: a seeded shuffle of all C(n,2)
  // pairs, cycled if there are more items than pairs.
  std::vector<std::array<uint32_t, 2>> pairs;
  for (uint32_t a = 0; a < out.aspects.size(); ++a)
    for (uint32_t b = a + 1; b < out.aspects.size(); ++b)
      pairs.push_back({a, b});
  for (std::size_t i = pairs.size(); i > 1; --i) {
    const std::size_t j = rng.uniform_int(i);
    std::swap(pairs[i - 1], pairs[j]);
  }
  out.item_aspects.resize(cfg.num_items);
  for (uint32_t i = 0; i < cfg.num_items; ++i)
    out.item_aspects[i] = pairs[i % pairs.size()];

  // Group membership lists for edge sampling.
  std::vector<std::vector<uint32_t>> items_of_group(cfg.groups);
  for (uint32_t i = 0; i < cfg.num_items; ++i)
    items_of_group[out.item_group[i]].push_back(i);

  std::set<std::pair<uint32_t, uint32_t>> edges;
  auto sample_item = [&](uint32_t user_group) -> uint32_t {
    const bool cross =
        cfg.groups > 1 && cfg.cross_group_prob > 0.0 && rng.uniform() < cfg.cross_group_prob;
    if (!cross) {
      const auto& pool = items_of_group[user_group];
      return pool[rng.uniform_int(pool.size())];
    }
    // uniform over items of the other groups
    uint32_t pick;
    do {
      pick = static_cast<uint32_t>(rng.uniform_int(cfg.num_items));
    } while (out.item_group[pick] == user_group);
    return pick;
  };

  for (uint32_t u = 0; u < cfg.num_users; ++u) {
    uint32_t added = 0, attempts = 0;
    const uint32_t want = std::max<uint32_t>(1, cfg.edges_per_user);
    while (added < want && attempts < want * 20) {
      ++attempts;
      const uint32_t i = sample_item(out.user_group[u]);
      if (edges.emplace(u, i).second) ++added;
    }
  }
  // No item may end up isolated; give stragglers one in-group edge.
  std::vector<uint32_t> item_degree(cfg.num_items, 0);
  for (const auto& [u, i] : edges) ++item_degree[i];
  for (uint32_t i = 0; i < cfg.num_items; ++i) {
    if (item_degree[i] > 0) continue;
    for (uint32_t tries = 0; tries < cfg.num_users * 4; ++tries) {
      const uint32_t u = static_cast<uint32_t>(rng.uniform_int(cfg.num_users));
      if (cfg.groups > 1 && out.user_group[u] != out.item_group[i] &&
          cfg.cross_group_prob == 0.0)
        continue;
      if (edges.emplace(u, i).second) break;
    }
  }

  for (const auto& [u, i] : edges) {
    DatasetRecord r;
    r.user_id = format_id('u', u);
    r.item_id = format_id('i', i);
    const std::string& a1 = out.aspects[out.item_aspects[i][0]];
    const std::string& a2 = out.aspects[out.item_aspects[i][1]];
    const std::string& adj = out.adjectives[out.user_group[u]];
    r.review = "I loved the " + a1 + " and the " + a2 + " here. Exactly my " +
               adj + " style of thing.";
    r.rating = 4.0 + static_cast<double>(rng.uniform_int(2));
    r.meta["title"] = "Item " + std::to_string(i);
    r.meta["category"] = out.adjectives[out.item_group[i]] + " goods";
    out.records.push_back(std::move(r));
  }
  std::sort(out.records.begin(), out.records.end(),
            [](const DatasetRecord& a, const DatasetRecord& b) {
              return a.user_id < b.user_id ||
                     (a.user_id == b.user_id && a.item_id < b.item_id);
            });

  out.description = "planted block structure: " + std::to_string(cfg.groups) +
                    " groups, " + std::to_string(cfg.num_users) + " users, " +
                    std::to_string(cfg.num_items) + " items, " +
                    std::to_string(out.records.size()) + " interactions, " +
                    "cross-group probability " + std::to_string(cfg.cross_group_prob);
  return out;
}

}  // namespace recex
