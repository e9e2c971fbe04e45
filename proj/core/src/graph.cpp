#include "recex/graph.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "recex/errors.hpp"
#include "recex/rng.hpp"

namespace recex {

std::vector<Interaction> InteractionGraph::edges_in(Split s) const {
  std::vector<Interaction> out;
  for (std::size_t e = 0; e < edges.size(); ++e)
    if (edge_split[e] == s) out.push_back(edges[e]);
  return out;
}

void InteractionGraph::validate() const {
  if (edges.size() != edge_split.size())
    throw DataError("graph: edge/split arrays out of sync");
  for (std::size_t e = 0; e < edges.size(); ++e) {
    if (edges[e].user >= num_users || edges[e].item >= num_items)
      throw DataError("graph: edge id out of range");
    if (e > 0 && !(edges[e - 1].user < edges[e].user ||
                   (edges[e - 1].user == edges[e].user &&
                    edges[e - 1].item < edges[e].item)))
      throw DataError("graph: edges not strictly sorted (duplicate?)");
  }

  // Adjacency must be exactly the train-edge incidence.
  std::vector<std::vector<uint32_t>> expect_u(num_users), expect_i(num_items);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    if (edge_split[e] != Split::train) continue;
    expect_u[edges[e].user].push_back(edges[e].item);
    expect_i[edges[e].item].push_back(edges[e].user);
  }
  if (expect_u != user_neighbors || expect_i != item_neighbors)
    throw DataError("graph: adjacency does not match train edges");

  std::vector<bool> excluded(num_users, false);
  for (uint32_t u : users_excluded_from_train) excluded[u] = true;
  std::vector<bool> seen(num_users, false);
  for (const auto& e : edges) seen[e.user] = true;
  for (uint32_t u = 0; u < num_users; ++u)
    if (seen[u] && !excluded[u] && user_neighbors[u].empty())
      throw DataError("graph: user " + std::to_string(u) + " has no train edges");
}

InteractionGraph build_graph(std::span<const Interaction> interactions,
                             uint32_t num_users, uint32_t num_items,
                             const SplitSpec& spec) {
  std::vector<Interaction> sorted(interactions.begin(), interactions.end());
  std::sort(sorted.begin(), sorted.end(), [](const Interaction& a, const Interaction& b) {
    return a.user < b.user || (a.user == b.user && a.item < b.item);
  });
  for (std::size_t e = 1; e < sorted.size(); ++e)
    if (sorted[e] == sorted[e - 1])
      throw DataError("build_graph: duplicate interaction (" +
                      std::to_string(sorted[e].user) + ", " +
                      std::to_string(sorted[e].item) + ")");
  for (const auto& e : sorted)
    if (e.user >= num_users || e.item >= num_items)
      throw DataError("build_graph: id out of range");

  InteractionGraph g;
  g.num_users = num_users;
  g.num_items = num_items;
  g.edges = std::move(sorted);
  g.edge_split.assign(g.edges.size(), Split::train);
  g.user_neighbors.resize(num_users);
  g.item_neighbors.resize(num_items);
  g.user_items_all.resize(num_users);

  // Per-user split: shuffle the user's edge indices with one shared seeded
  // stream (users processed in ascending id, so the outcome is deterministic),
  // then hand out train/validation/test counts by rounded fractions.
  Rng rng(spec.seed);
  std::vector<std::vector<std::size_t>> by_user(num_users);
  for (std::size_t e = 0; e < g.edges.size(); ++e) by_user[g.edges[e].user].push_back(e);

  for (uint32_t u = 0; u < num_users; ++u) {
    auto& idx = by_user[u];
    if (idx.empty()) continue;
    for (std::size_t i = idx.size(); i > 1; --i) {
      const std::size_t j = rng.uniform_int(i);
      std::swap(idx[i - 1], idx[j]);
    }
    const auto deg = static_cast<double>(idx.size());
    std::size_t n_train = static_cast<std::size_t>(std::llround(spec.train * deg));
    n_train = std::min(n_train, idx.size());
    std::size_t n_val = static_cast<std::size_t>(std::llround(spec.validation * deg));
    n_val = std::min(n_val, idx.size() - n_train);
    if (n_train == 0)
      throw DataError("build_graph: user " + std::to_string(u) +
                      " has no train edges after split");
    for (std::size_t i = 0; i < idx.size(); ++i) {
      Split s = Split::test;
      if (i < n_train)
        s = Split::train;
      else if (i < n_train + n_val)
        s = Split::validation;
      g.edge_split[idx[i]] = s;
    }
  }

  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    const auto& edge = g.edges[e];
    g.user_items_all[edge.user].push_back(edge.item);
    if (g.edge_split[e] == Split::train) {
      g.user_neighbors[edge.user].push_back(edge.item);
      g.item_neighbors[edge.item].push_back(edge.user);
    }
  }
  // edges are sorted by (user, item) so user-side lists are already ascending;
  // item-side lists need it done explicitly.
  for (auto& lst : g.item_neighbors) std::sort(lst.begin(), lst.end());

  g.validate();
  return g;
}

InteractionGraph build_graph(std::span<const Interaction> interactions,
                             const SplitSpec& spec) {
  uint32_t mu = 0, mi = 0;
  for (const auto& e : interactions) {
    mu = std::max(mu, e.user + 1);
    mi = std::max(mi, e.item + 1);
  }
  return build_graph(interactions, mu, mi, spec);
}

InteractionGraph assemble_graph(std::span<const LabeledEdge> edges,
                                uint32_t num_users, uint32_t num_items,
                                std::vector<uint32_t> excluded_users) {
  std::vector<LabeledEdge> sorted(edges.begin(), edges.end());
  std::sort(sorted.begin(), sorted.end(), [](const LabeledEdge& a, const LabeledEdge& b) {
    return a.edge.user < b.edge.user ||
           (a.edge.user == b.edge.user && a.edge.item < b.edge.item);
  });
  for (std::size_t e = 1; e < sorted.size(); ++e)
    if (sorted[e].edge == sorted[e - 1].edge)
      throw DataError("assemble_graph: duplicate edge");

  InteractionGraph g;
  g.num_users = num_users;
  g.num_items = num_items;
  g.users_excluded_from_train = std::move(excluded_users);
  g.user_neighbors.resize(num_users);
  g.item_neighbors.resize(num_items);
  g.user_items_all.resize(num_users);
  for (const auto& le : sorted) {
    if (le.edge.user >= num_users || le.edge.item >= num_items)
      throw DataError("assemble_graph: id out of range");
    g.edges.push_back(le.edge);
    g.edge_split.push_back(le.split);
    g.user_items_all[le.edge.user].push_back(le.edge.item);
    if (le.split == Split::train) {
      g.user_neighbors[le.edge.user].push_back(le.edge.item);
      g.item_neighbors[le.edge.item].push_back(le.edge.user);
    }
  }
  for (auto& lst : g.item_neighbors) std::sort(lst.begin(), lst.end());
  g.validate();
  return g;
}

}  // namespace recex
