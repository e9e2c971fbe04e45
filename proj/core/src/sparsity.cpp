#include "recex/sparsity.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "recex/errors.hpp"
#include "recex/rng.hpp"

namespace recex {

SparsitySplits sparsity_split(const Dataset& ds, const SplitSpec& spec,
                              const SparsityConfig& cfg) {
  if (cfg.bins < 1) throw DataError("sparsity_split: bins must be >= 1");
  if (cfg.zero_shot_fraction < 0.0 || cfg.zero_shot_fraction >= 1.0)
    throw DataError("sparsity_split: zero_shot_fraction must be in [0, 1)");

  const auto interactions = ds.interactions();
  const InteractionGraph g = build_graph(
      interactions, static_cast<uint32_t>(ds.users.size()),
      static_cast<uint32_t>(ds.items.size()), spec);

  // Per-record split via edge lookup (records and edges are both unique pairs).
  std::map<std::pair<uint32_t, uint32_t>, Split> split_of;
  for (std::size_t e = 0; e < g.edges.size(); ++e)
    split_of[{g.edges[e].user, g.edges[e].item}] = g.edge_split[e];

  std::vector<uint32_t> test_users;
  {
    std::set<uint32_t> uniq;
    for (std::size_t e = 0; e < g.edges.size(); ++e)
      if (g.edge_split[e] == Split::test) uniq.insert(g.edges[e].user);
    test_users.assign(uniq.begin(), uniq.end());
  }

  // Seeded zero-shot sample from the test users.
  SparsitySplits out;
  std::vector<uint32_t> pool = test_users;
  const std::size_t zs_count = static_cast<std::size_t>(
      std::llround(cfg.zero_shot_fraction * static_cast<double>(pool.size())));
  Rng rng(cfg.seed);
  std::set<uint32_t> zero_shot;
  for (std::size_t i = 0; i < zs_count; ++i) {
    const std::size_t j = i + rng.uniform_int(pool.size() - i);
    std::swap(pool[i], pool[j]);
    zero_shot.insert(pool[i]);
  }
  for (uint32_t u : zero_shot) out.zero_shot_users.push_back(ds.users[u]);
  std::sort(out.zero_shot_users.begin(), out.zero_shot_users.end());

  // Partition records: zero-shot users contribute everything to the
  // zero-shot set; everyone else follows the edge split.
  std::vector<std::vector<std::size_t>> test_records_of_user(ds.users.size());
  for (std::size_t r = 0; r < ds.records.size(); ++r) {
    const uint32_t u = ds.user_index(ds.records[r].user_id);
    const uint32_t i = ds.item_index(ds.records[r].item_id);
    if (zero_shot.count(u)) {
      out.zero_shot_records.push_back(r);
      continue;
    }
    switch (split_of.at({u, i})) {
      case Split::train: out.train_records.push_back(r); break;
      case Split::validation: out.val_records.push_back(r); break;
      case Split::test: test_records_of_user[u].push_back(r); break;
    }
  }

  // Remaining test users, bucketed by train frequency.
  std::vector<uint32_t> remaining;
  for (uint32_t u : test_users)
    if (!zero_shot.count(u)) remaining.push_back(u);

  std::sort(remaining.begin(), remaining.end(), [&](uint32_t a, uint32_t b) {
    const auto da = g.train_degree_user(a), db = g.train_degree_user(b);
    if (da != db) return da < db;
    return a < b;  // ties toward the lower bin by ascending user id
  });

  std::set<std::size_t> distinct;
  for (uint32_t u : remaining) distinct.insert(g.train_degree_user(u));

  const int bins = cfg.bins;
  if (!remaining.empty() && distinct.size() < static_cast<std::size_t>(bins)) {
    // Merge: one bin per distinct frequency, ascending.
    out.merged_warning = true;
    out.effective_bins = static_cast<int>(distinct.size());
    out.bin_users.assign(out.effective_bins, {});
    out.bin_test_records.assign(out.effective_bins, {});
    std::map<std::size_t, int> bin_of_degree;
    int next = 0;
    for (std::size_t d : distinct) bin_of_degree[d] = next++;
    for (uint32_t u : remaining) {
      const int b = bin_of_degree[g.train_degree_user(u)];
      out.bin_users[b].push_back(ds.users[u]);
      for (std::size_t r : test_records_of_user[u]) out.bin_test_records[b].push_back(r);
    }
  } else {
    // Equal-count quantile chunks: earlier bins take the remainder.
    out.effective_bins = bins;
    out.bin_users.assign(bins, {});
    out.bin_test_records.assign(bins, {});
    const std::size_t n = remaining.size();
    std::size_t cursor = 0;
    for (int b = 0; b < bins; ++b) {
      std::size_t take = n / bins + (static_cast<std::size_t>(b) < n % bins ? 1 : 0);
      for (std::size_t i = 0; i < take; ++i, ++cursor) {
        const uint32_t u = remaining[cursor];
        out.bin_users[b].push_back(ds.users[u]);
        for (std::size_t r : test_records_of_user[u])
          out.bin_test_records[b].push_back(r);
      }
    }
  }
  for (auto& b : out.bin_users) std::sort(b.begin(), b.end());
  for (auto& b : out.bin_test_records) std::sort(b.begin(), b.end());
  std::sort(out.zero_shot_records.begin(), out.zero_shot_records.end());
  std::sort(out.train_records.begin(), out.train_records.end());
  std::sort(out.val_records.begin(), out.val_records.end());
  return out;
}

}  // namespace recex
