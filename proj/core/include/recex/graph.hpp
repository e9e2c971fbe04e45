#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace recex {

enum class Split : uint8_t { train = 0, validation = 1, test = 2 };

struct Interaction {
  uint32_t user = 0;
  uint32_t item = 0;
  bool operator==(const Interaction&) const = default;
};

struct SplitSpec {
  double train = 0.8;
  double validation = 0.1;
  double test = 0.1;
  uint64_t seed = 1;
};

// Bipartite user-item interaction graph with a train/validation/test edge
// partition. Adjacency lists cover train edges only; held-out edges never
// participate in propagation or ranking-loss batches.
struct InteractionGraph {
  uint32_t num_users = 0;
  uint32_t num_items = 0;

  // All edges sorted by (user, item), with a parallel split label array.
  std::vector<Interaction> edges;
  std::vector<Split> edge_split;

  // Train-edge adjacency, each list sorted ascending.
  std::vector<std::vector<uint32_t>> user_neighbors;
  std::vector<std::vector<uint32_t>> item_neighbors;

  // Per-user sorted list of items interacted with in *any* split; negative
  // samples must avoid all of these.
  std::vector<std::vector<uint32_t>> user_items_all;

  // Users allowed to have zero train edges (set by the zero-shot splitter).
  std::vector<uint32_t> users_excluded_from_train;

  std::size_t train_degree_user(uint32_t u) const { return user_neighbors[u].size(); }
  std::size_t train_degree_item(uint32_t i) const { return item_neighbors[i].size(); }

  std::vector<Interaction> edges_in(Split s) const;

  // Enforces the structural invariants; throws DataError on violation.
  void validate() const;
};

// Builds the graph from dense-id interactions and splits edges per user with
// the given fractions. The shuffle is seeded, so equal inputs and seeds give
// identical splits. Throws DataError if a user ends up with zero train edges
// (the error names the user) or if the input contains duplicate pairs.
InteractionGraph build_graph(std::span<const Interaction> interactions,
                             uint32_t num_users, uint32_t num_items,
                             const SplitSpec& spec);

// Convenience overload inferring num_users/num_items as max id + 1.
InteractionGraph build_graph(std::span<const Interaction> interactions,
                             const SplitSpec& spec);

// Assembles a graph from pre-labeled edges (used when re-loading split
// manifests). excluded_users may legitimately have no train edges.
struct LabeledEdge {
  Interaction edge;
  Split split = Split::train;
};
InteractionGraph assemble_graph(std::span<const LabeledEdge> edges,
                                uint32_t num_users, uint32_t num_items,
                                std::vector<uint32_t> excluded_users);

}  // namespace recex
