#include "wayfind/kshortest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "wayfind/error.hpp"

namespace wayfind {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Restriction {
  std::vector<char> node_blocked;
  std::vector<char> edge_blocked;
};

// Distances to `target` over the unblocked part of the graph.
std::vector<double> distances_to(const LayoutGraph& g, NodeIndex target, const Restriction* r) {
  std::vector<double> dist(g.node_count(), kInf);
  using Item = std::pair<double, NodeIndex>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  dist[target] = 0.0;
  queue.emplace(0.0, target);
  while (!queue.empty()) {
    auto [du, u] = queue.top();
    queue.pop();
    if (du > dist[u]) continue;
    for (const auto& adj : g.neighbors(u)) {
      if (r && (r->node_blocked[adj.node] || r->edge_blocked[adj.edge])) continue;
      const double candidate = du + g.edge(adj.edge).length;
      if (candidate < dist[adj.node]) {
        dist[adj.node] = candidate;
        queue.emplace(candidate, adj.node);
      }
    }
  }
  return dist;
}

// Walks greedily from `source` through the smallest-index neighbour that
// stays on a shortest route; this yields the lexicographically smallest
// shortest node sequence.
std::optional<Path> restricted_shortest(const LayoutGraph& g, NodeIndex source,
                                        NodeIndex destination, const Restriction* r) {
  const auto dist = distances_to(g, destination, r);
  if (dist[source] == kInf) return std::nullopt;
  Path p;
  p.nodes.push_back(source);
  NodeIndex u = source;
  while (u != destination) {
    NodeIndex next = u;
    for (const auto& adj : g.neighbors(u)) {
      if (r && (r->node_blocked[adj.node] || r->edge_blocked[adj.edge])) continue;
      if (dist[adj.node] + g.edge(adj.edge).length == dist[u]) {
        next = adj.node;
        break;
      }
    }
    if (next == u) return std::nullopt;  // unreachable in exact arithmetic
    p.nodes.push_back(next);
    u = next;
  }
  p.length = walk_length(g, p.nodes);
  return p;
}

void check_node(const LayoutGraph& g, NodeIndex n) {
  if (n >= g.node_count())
    throw Error(ErrorCode::InvalidArgument, "node index " + std::to_string(n) + " out of range");
}

[[noreturn]] void throw_unreachable(const LayoutGraph& g, NodeIndex s, NodeIndex d) {
  throw Error(ErrorCode::Unreachable, "unreachable: no path from '" + g.node(s).id + "' to '" +
                                          g.node(d).id + "'");
}

}  // namespace

bool path_less(const Path& x, const Path& y) noexcept {
  if (x.length != y.length) return x.length < y.length;
  return x.nodes < y.nodes;
}

Path shortest_path(const LayoutGraph& g, NodeIndex source, NodeIndex destination) {
  check_node(g, source);
  check_node(g, destination);
  auto p = restricted_shortest(g, source, destination, nullptr);
  if (!p) throw_unreachable(g, source, destination);
  return *std::move(p);
}

KShortestEnumerator::KShortestEnumerator(const LayoutGraph& g, NodeIndex source,
                                         NodeIndex destination)
    : graph_(&g), source_(source), destination_(destination) {
  check_node(g, source);
  check_node(g, destination);
}

std::optional<Path> KShortestEnumerator::next() {
  const LayoutGraph& g = *graph_;
  if (!started_) {
    started_ = true;
    auto first = restricted_shortest(g, source_, destination_, nullptr);
    if (!first) throw_unreachable(g, source_, destination_);
    accepted_.push_back(*first);
    return first;
  }
  if (accepted_.empty()) return std::nullopt;

  const Path& last = accepted_.back();
  Restriction r;
  for (std::size_t i = 0; i + 1 < last.nodes.size(); ++i) {
    r.node_blocked.assign(g.node_count(), 0);
    r.edge_blocked.assign(g.edge_count(), 0);
    const NodeIndex spur = last.nodes[i];
    for (const auto& p : accepted_) {
      if (p.nodes.size() > i + 1 && std::equal(p.nodes.begin(), p.nodes.begin() + i + 1,
                                               last.nodes.begin())) {
        if (auto e = g.edge_between(p.nodes[i], p.nodes[i + 1])) r.edge_blocked[*e] = 1;
      }
    }
    for (std::size_t j = 0; j < i; ++j) r.node_blocked[last.nodes[j]] = 1;

    auto spur_path = restricted_shortest(g, spur, destination_, &r);
    if (!spur_path) continue;
    Path total;
    total.nodes.assign(last.nodes.begin(), last.nodes.begin() + i);
    total.nodes.insert(total.nodes.end(), spur_path->nodes.begin(), spur_path->nodes.end());
    total.length = walk_length(g, total.nodes);
    const bool known = std::any_of(accepted_.begin(), accepted_.end(),
                                   [&](const Path& p) { return p.nodes == total.nodes; });
    if (!known) candidates_.insert(std::move(total));
  }

  if (candidates_.empty()) return std::nullopt;
  auto best = candidates_.extract(candidates_.begin()).value();
  accepted_.push_back(best);
  return best;
}

std::vector<Path> yen_k_shortest(const LayoutGraph& g, NodeIndex source, NodeIndex destination,
                                 std::size_t k) {
  if (k == 0) throw Error(ErrorCode::InvalidArgument, "k must be at least 1");
  KShortestEnumerator paths(g, source, destination);
  std::vector<Path> out;
  while (out.size() < k) {
    auto p = paths.next();
    if (!p) break;
    out.push_back(*std::move(p));
  }
  return out;
}

CandidateSet adaptive_candidates(const LayoutGraph& g, NodeIndex source, NodeIndex destination,
                                 double stretch, std::size_t k_cap) {
  if (!(stretch >= 0.0) || !std::isfinite(stretch))
    throw Error(ErrorCode::InvalidArgument, "stretch must be non-negative");
  if (k_cap == 0) throw Error(ErrorCode::InvalidArgument, "candidate cap must be at least 1");

  KShortestEnumerator paths(g, source, destination);
  CandidateSet out;
  auto first = paths.next();
  out.paths.push_back(*first);
  // Inclusive band; the slack absorbs rounding in (1 + stretch) * length.
  const double cutoff = (1.0 + stretch) * first->length * (1.0 + 1e-12);
  while (auto p = paths.next()) {
    if (p->length > cutoff) break;
    if (out.paths.size() == k_cap) {
      out.capped = true;
      break;
    }
    out.paths.push_back(*std::move(p));
  }
  return out;
}

}  // namespace wayfind
