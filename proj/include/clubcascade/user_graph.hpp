#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

namespace clubcascade {

class DisjointSet {
 public:
  explicit DisjointSet(std::size_t n);

  std::size_t find(std::size_t x);
  void unite(std::size_t a, std::size_t b);

 private:
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> size_;
};

/// Undirected graph over users. Edges are only ever removed after
/// construction; connected components are recomputed lazily with a
/// union-find pass the first time they are queried after a deletion.
class UserGraph {
 public:
  static UserGraph complete(std::size_t users);
  static UserGraph empty(std::size_t users);
  static UserGraph erdos_renyi(std::size_t users, double p, std::uint64_t seed);
  static UserGraph from_edges(std::size_t users,
                              const std::vector<std::pair<std::size_t, std::size_t>>& edges);

  std::size_t users() const noexcept { return adjacency_.size(); }
  std::size_t edge_count() const noexcept { return edge_count_; }
  bool has_edge(std::size_t a, std::size_t b) const;
  // Sorted ascending.
  const std::vector<std::size_t>& neighbors(std::size_t user) const { return adjacency_[user]; }
  // Each edge once as (smaller, larger), lexicographically sorted.
  std::vector<std::pair<std::size_t, std::size_t>> edges() const;

  bool remove_edge(std::size_t a, std::size_t b);

  std::size_t component_of(std::size_t user) const;
  const std::vector<std::size_t>& component_members(std::size_t user) const;
  std::size_t component_count() const;
  // Component ids are numbered by smallest member, so the labelling is canonical.
  std::vector<std::size_t> component_labels() const;

 private:
  explicit UserGraph(std::size_t users);
  void add_edge(std::size_t a, std::size_t b);
  void refresh() const;

  std::vector<std::vector<std::size_t>> adjacency_;
  std::size_t edge_count_ = 0;

  mutable bool dirty_ = true;
  mutable std::vector<std::size_t> label_;
  mutable std::vector<std::vector<std::size_t>> members_;
};

}  // namespace clubcascade
