#include "clubcascade/user_graph.hpp"

#include "clubcascade/error.hpp"
#include "clubcascade/rng.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace clubcascade {

DisjointSet::DisjointSet(std::size_t n) : parent_(n), size_(n, 1) {
  std::iota(parent_.begin(), parent_.end(), std::size_t{0});
}

std::size_t DisjointSet::find(std::size_t x) {
  std::size_t root = x;
  while (parent_[root] != root) root = parent_[root];
  while (parent_[x] != root) {
    const std::size_t next = parent_[x];
    parent_[x] = root;
    x = next;
  }
  return root;
}

void DisjointSet::unite(std::size_t a, std::size_t b) {
  a = find(a);
  b = find(b);
  if (a == b) return;
  if (size_[a] < size_[b]) std::swap(a, b);
  parent_[b] = a;
  size_[a] += size_[b];
}

UserGraph::UserGraph(std::size_t users) : adjacency_(users) {
  if (users < 1) throw Error(Errc::invalid_config, "user graph needs at least one user");
}

UserGraph UserGraph::complete(std::size_t users) {
  UserGraph g(users);
  for (std::size_t a = 0; a < users; ++a) {
    g.adjacency_[a].reserve(users - 1);
    for (std::size_t b = 0; b < users; ++b) {
      if (a != b) g.adjacency_[a].push_back(b);
    }
  }
  g.edge_count_ = users * (users - 1) / 2;
  return g;
}

UserGraph UserGraph::empty(std::size_t users) { return UserGraph(users); }

UserGraph UserGraph::erdos_renyi(std::size_t users, double p, std::uint64_t seed) {
  if (!(p >= 0.0 && p <= 1.0)) throw Error(Errc::invalid_config, "edge probability outside [0,1]");
  UserGraph g(users);
  rng::Engine gen = rng::stream(seed, rng::Purpose::graph);
  for (std::size_t a = 0; a < users; ++a) {
    for (std::size_t b = a + 1; b < users; ++b) {
      if (rng::bernoulli(gen, p)) g.add_edge(a, b);
    }
  }
  return g;
}

UserGraph UserGraph::from_edges(std::size_t users,
                                const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
  UserGraph g(users);
  for (auto [a, b] : edges) {
    if (a >= users || b >= users || a == b) {
      throw Error(Errc::invalid_config,
                  "bad edge (" + std::to_string(a) + ", " + std::to_string(b) + ")");
    }
    if (!g.has_edge(a, b)) g.add_edge(a, b);
  }
  return g;
}

void UserGraph::add_edge(std::size_t a, std::size_t b) {
  auto insert_sorted = [](std::vector<std::size_t>& v, std::size_t x) {
    v.insert(std::lower_bound(v.begin(), v.end(), x), x);
  };
  insert_sorted(adjacency_[a], b);
  insert_sorted(adjacency_[b], a);
  ++edge_count_;
  dirty_ = true;
}

bool UserGraph::has_edge(std::size_t a, std::size_t b) const {
  const auto& n = adjacency_[a];
  return std::binary_search(n.begin(), n.end(), b);
}

std::vector<std::pair<std::size_t, std::size_t>> UserGraph::edges() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  out.reserve(edge_count_);
  for (std::size_t a = 0; a < users(); ++a) {
    for (std::size_t b : adjacency_[a]) {
      if (a < b) out.emplace_back(a, b);
    }
  }
  return out;
}

bool UserGraph::remove_edge(std::size_t a, std::size_t b) {
  auto erase_sorted = [](std::vector<std::size_t>& v, std::size_t x) {
    auto it = std::lower_bound(v.begin(), v.end(), x);
    if (it == v.end() || *it != x) return false;
    v.erase(it);
    return true;
  };
  if (!erase_sorted(adjacency_[a], b)) return false;
  erase_sorted(adjacency_[b], a);
  --edge_count_;
  dirty_ = true;
  return true;
}

void UserGraph::refresh() const {
  if (!dirty_) return;
  const std::size_t n = users();
  DisjointSet sets(n);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b : adjacency_[a]) {
      if (a < b) sets.unite(a, b);
    }
  }
  std::vector<std::size_t> root_label(n, n);
  label_.assign(n, 0);
  members_.clear();
  for (std::size_t user = 0; user < n; ++user) {
    const std::size_t root = sets.find(user);
    if (root_label[root] == n) {
      root_label[root] = members_.size();
      members_.emplace_back();
    }
    label_[user] = root_label[root];
    members_[label_[user]].push_back(user);
  }
  dirty_ = false;
}

std::size_t UserGraph::component_of(std::size_t user) const {
  refresh();
  return label_[user];
}

const std::vector<std::size_t>& UserGraph::component_members(std::size_t user) const {
  refresh();
  return members_[label_[user]];
}

std::size_t UserGraph::component_count() const {
  refresh();
  return members_.size();
}

std::vector<std::size_t> UserGraph::component_labels() const {
  refresh();
  return label_;
}

}  // namespace clubcascade
