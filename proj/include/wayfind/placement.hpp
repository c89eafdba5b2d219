#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "wayfind/graph.hpp"

namespace wayfind {

// A directional entry: at `node`, the way to `destination` is toward
// `next_node` (adjacent to `node`).
struct Sign {
  NodeIndex node = 0;
  NodeIndex destination = 0;
  NodeIndex next_node = 0;

  friend bool operator==(const Sign&, const Sign&) = default;
};

// Set of sign entries, at most one per (node, destination). Entries sharing a
// node form one physical board.
class SignPlacement {
 public:
  using Key = std::pair<NodeIndex, NodeIndex>;  // (node, destination)

  bool insert(const Sign& s) { return entries_.emplace(Key{s.node, s.destination}, s.next_node).second; }
  bool erase(NodeIndex node, NodeIndex destination) { return entries_.erase(Key{node, destination}) > 0; }
  bool contains(NodeIndex node, NodeIndex destination) const {
    return entries_.count(Key{node, destination}) > 0;
  }
  std::optional<NodeIndex> arrow(NodeIndex node, NodeIndex destination) const {
    auto it = entries_.find(Key{node, destination});
    if (it == entries_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }

  // Entries ordered by (node, destination).
  std::vector<Sign> entries() const;
  // Number of distinct sign-bearing nodes.
  std::size_t board_count() const;

  // Throws Validation unless every entry's nodes exist and next_node is
  // adjacent to node.
  void validate(const LayoutGraph& g) const;

  friend bool operator==(const SignPlacement&, const SignPlacement&) = default;

 private:
  std::map<Key, NodeIndex> entries_;
};

}  // namespace wayfind
