#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <initializer_list>
#include <string>
#include <tuple>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "json.hpp"
#include "wayfind/agent_sim.hpp"
#include "wayfind/error.hpp"
#include "wayfind/io.hpp"
#include "wayfind/kshortest.hpp"
#include "wayfind/rng.hpp"
#include "wayfind/scheme.hpp"

namespace testing {

using namespace wayfind;

inline std::string fixture_path(const std::string& name) { return std::string(WAYFIND_FIXTURES) + "/" + name; }

inline io::Layout fixture(const std::string& name) { return io::parse_layout(io::read_file(fixture_path(name))); }

struct N {
  std::string id;
  double x;
  double y;
  NodeKind kind = NodeKind::Intersection;
};

struct E {
  std::string a;
  std::string b;
  double length = 0.0;  // 0 means Euclidean
};

inline LayoutGraph graph(std::initializer_list<N> nodes, std::initializer_list<E> edges) {
  std::vector<Node> ns;
  for (const auto& n : nodes) ns.push_back(Node{n.id, Point{n.x, n.y}, n.kind, ""});
  std::vector<EdgeSpec> es;
  for (const auto& e : edges)
    es.push_back(EdgeSpec{e.a, e.b, e.length > 0.0 ? std::optional<double>(e.length) : std::nullopt});
  return build_graph(std::move(ns), es);
}

inline std::vector<NodeIndex> indices(const LayoutGraph& g, std::initializer_list<const char*> ids) {
  std::vector<NodeIndex> out;
  for (const char* id : ids) out.push_back(g.index_of(id));
  return out;
}

inline Path path(const LayoutGraph& g, std::initializer_list<const char*> ids) {
  Path p;
  p.nodes = indices(g, ids);
  p.length = walk_length(g, p.nodes);
  return p;
}

inline std::vector<std::string> ids(const LayoutGraph& g, const std::vector<NodeIndex>& nodes) {
  std::vector<std::string> out;
  for (NodeIndex n : nodes) out.push_back(g.node(n).id);
  return out;
}

// Connected random graph on n nodes: a random spanning tree plus extra edges,
// integer lengths so that ties are common.
inline LayoutGraph random_graph(Rng& rng, std::size_t n, std::size_t max_edges) {
  std::vector<Node> nodes;
  for (std::size_t i = 0; i < n; ++i) {
    nodes.push_back(Node{"v" + std::to_string(i), Point{static_cast<double>(rng.below(10)), static_cast<double>(rng.below(10))},
                         NodeKind::Intersection, ""});
  }
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  auto has = [&](std::size_t a, std::size_t b) {
    return std::find_if(pairs.begin(), pairs.end(), [&](auto& p) {
             return (p.first == a && p.second == b) || (p.first == b && p.second == a);
           }) != pairs.end();
  };
  for (std::size_t i = 1; i < n; ++i) pairs.emplace_back(i, rng.below(i));
  const std::size_t target = std::min(max_edges, n * (n - 1) / 2);
  for (std::size_t tries = 0; pairs.size() < target && tries < 200; ++tries) {
    const std::size_t a = rng.below(n), b = rng.below(n);
    if (a != b && !has(a, b)) pairs.emplace_back(a, b);
  }
  std::vector<EdgeSpec> edges;
  for (auto [a, b] : pairs) {
    const double euclid = distance(nodes[a].position, nodes[b].position);
    const double len = std::ceil(euclid) + static_cast<double>(rng.below(4));
    edges.push_back(EdgeSpec{nodes[a].id, nodes[b].id, std::max(1.0, len)});
  }
  return build_graph(std::move(nodes), edges);
}

// Every simple path from s to d, sorted by (length, node sequence).
inline std::vector<Path> all_simple_paths(const LayoutGraph& g, NodeIndex s, NodeIndex d) {
  std::vector<Path> out;
  std::vector<NodeIndex> stack{s};
  std::vector<bool> on(g.node_count(), false);
  on[s] = true;
  std::function<void()> dfs = [&] {
    const NodeIndex u = stack.back();
    if (u == d) {
      Path p;
      p.nodes = stack;
      p.length = walk_length(g, p.nodes);
      out.push_back(std::move(p));
      return;
    }
    for (const auto& adj : g.neighbors(u)) {
      if (on[adj.node]) continue;
      on[adj.node] = true;
      stack.push_back(adj.node);
      dfs();
      stack.pop_back();
      on[adj.node] = false;
    }
  };
  dfs();
  std::sort(out.begin(), out.end(), [](const Path& x, const Path& y) {
    if (x.length != y.length) return x.length < y.length;
    return x.nodes < y.nodes;
  });
  return out;
}

// Upper-tail probability of Pearson's statistic for observed counts against
// expected probabilities.
inline double chi_square_p(const std::vector<double>& observed, const std::vector<double>& probs) {
  double total = 0.0;
  for (double o : observed) total += o;
  double stat = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double e = total * probs[i];
    stat += (observed[i] - e) * (observed[i] - e) / e;
  }
  boost::math::chi_squared dist(static_cast<double>(observed.size() - 1));
  return boost::math::cdf(boost::math::complement(dist, stat));
}

// Exhaustive minimum of the scheme cost over the candidate product space.
inline std::pair<double, std::vector<std::size_t>> exhaustive_optimum(const LayoutGraph& g, WayfindingScheme scheme,
                                                                      const SchemeWeights& w) {
  const std::size_t n = scheme.size();
  std::vector<std::size_t> choice(n, 0);
  double best = INFINITY;
  std::vector<std::size_t> arg;
  for (;;) {
    scheme.choice = choice;
    const double c = total_scheme_cost(g, scheme, w);
    if (c < best) {
      best = c;
      arg = choice;
    }
    std::size_t i = 0;
    while (i < n && ++choice[i] == scheme.candidates[i].size()) choice[i++] = 0;
    if (i == n) break;
  }
  return {best, arg};
}

// Scheme over adaptive candidate sets with every scenario on its shortest path.
inline WayfindingScheme candidate_scheme(const LayoutGraph& g, const std::vector<NavScenario>& scenarios,
                                         double stretch = kDefaultStretch, std::size_t cap = kDefaultCandidateCap) {
  WayfindingScheme s;
  s.scenarios = scenarios;
  for (const auto& z : scenarios) {
    s.candidates.push_back(adaptive_candidates(g, g.index_of(z.source), g.index_of(z.destination), stretch, cap).paths);
    s.choice.push_back(0);
  }
  return s;
}

// A layout prepared for the sign stage.
struct Staged {
  io::Layout layout;
  Subdivision sub;
  WayfindingScheme scheme;
  std::vector<RoutedScenario> routed;
};

inline Staged stage(io::Layout layout, WayfindingScheme scheme, double max_segment = 50.0) {
  Staged s{std::move(layout), {}, std::move(scheme), {}};
  s.sub = subdivide(s.layout.graph, max_segment);
  s.routed = route_scheme(s.layout.graph, s.sub, s.scheme);
  return s;
}

// Fixture with every scenario on its shortest path.
inline Staged stage_shortest(const std::string& name, double max_segment = 50.0) {
  auto layout = fixture(name);
  const LayoutGraph& g = layout.graph;
  std::vector<Path> paths;
  for (const auto& z : layout.scenarios) paths.push_back(shortest_path(g, g.index_of(z.source), g.index_of(z.destination)));
  auto scheme = WayfindingScheme::from_paths(layout.scenarios, std::move(paths));
  return stage(std::move(layout), std::move(scheme), max_segment);
}

}  // namespace testing
