#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include "wayfind/graph.hpp"

namespace wayfind {

struct Path {
  std::vector<NodeIndex> nodes;
  double length = 0.0;

  friend bool operator==(const Path&, const Path&) = default;
};

// Total order used for every ranking: length first, then node sequence.
bool path_less(const Path& x, const Path& y) noexcept;

// Shortest path with ties broken by the lexicographically smallest node
// sequence. Throws Unreachable.
Path shortest_path(const LayoutGraph& g, NodeIndex source, NodeIndex destination);

// Yen's loopless k-shortest paths, ordered by path_less. Returns fewer than k
// paths when the graph has fewer simple paths. Throws Unreachable.
std::vector<Path> yen_k_shortest(const LayoutGraph& g, NodeIndex source, NodeIndex destination,
                                 std::size_t k);

// Lazy Yen enumeration; next() yields paths in path_less order.
class KShortestEnumerator {
 public:
  KShortestEnumerator(const LayoutGraph& g, NodeIndex source, NodeIndex destination);

  std::optional<Path> next();

 private:
  const LayoutGraph* graph_;
  NodeIndex source_;
  NodeIndex destination_;
  std::vector<Path> accepted_;
  std::set<Path, bool (*)(const Path&, const Path&) noexcept> candidates_{&path_less};
  bool started_ = false;
};

struct CandidateSet {
  std::vector<Path> paths;
  bool capped = false;  // more paths fell inside the band than `k_cap`
};

constexpr double kDefaultStretch = 0.16;
constexpr std::size_t kDefaultCandidateCap = 50;

// All loopless paths no longer than (1 + stretch) x shortest, at most k_cap
// of them. Throws InvalidArgument on bad stretch / k_cap and Unreachable.
CandidateSet adaptive_candidates(const LayoutGraph& g, NodeIndex source, NodeIndex destination,
                                 double stretch = kDefaultStretch,
                                 std::size_t k_cap = kDefaultCandidateCap);

}  // namespace wayfind
