#include "wayfind/agent_sim.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <tuple>

#include "wayfind/error.hpp"

namespace wayfind {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double cross(Point o, Point a, Point b) { return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x); }

bool segments_cross(Point p1, Point p2, Point q1, Point q2) {
  const double d1 = cross(q1, q2, p1);
  const double d2 = cross(q1, q2, p2);
  const double d3 = cross(p1, p2, q1);
  const double d4 = cross(p1, p2, q2);
  return ((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0));
}

bool inside(const Obstacle& poly, Point p) {
  bool in = false;
  const auto& v = poly.vertices;
  for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
    if ((v[i].y > p.y) != (v[j].y > p.y) &&
        p.x < (v[j].x - v[i].x) * (p.y - v[i].y) / (v[j].y - v[i].y) + v[i].x) {
      in = !in;
    }
  }
  return in;
}

}  // namespace

void AgentParams::validate() const {
  if (!(visibility >= 0.0)) throw Error(ErrorCode::InvalidArgument, "visibility must be non-negative");
  if (!(miss_prob >= 0.0 && miss_prob <= 1.0))
    throw Error(ErrorCode::InvalidArgument, "miss_prob must lie in [0, 1]");
  if (!(stretch_factor >= 1.0) || !std::isfinite(stretch_factor))
    throw Error(ErrorCode::InvalidArgument, "stretch_factor must be at least 1");
  if (agents_per_scenario < 1)
    throw Error(ErrorCode::InvalidArgument, "agents_per_scenario must be at least 1");
}

RoutedScenario make_routed(const LayoutGraph& g, std::vector<NodeIndex> path, double importance) {
  if (path.empty()) throw Error(ErrorCode::InvalidArgument, "empty path");
  RoutedScenario r;
  r.source = path.front();
  r.destination = path.back();
  r.importance = importance;
  r.offsets.push_back(0.0);
  for (std::size_t k = 1; k < path.size(); ++k) {
    r.offsets.push_back(r.offsets.back() + walk_length(g, std::span(path).subspan(k - 1, 2)));
  }
  r.baseline = r.offsets.back();
  r.path = std::move(path);
  return r;
}

std::vector<RoutedScenario> route_scheme(const LayoutGraph& original, const Subdivision& sub,
                                         const WayfindingScheme& scheme) {
  std::vector<RoutedScenario> out;
  out.reserve(scheme.size());
  for (std::size_t i = 0; i < scheme.size(); ++i) {
    std::vector<std::string> ids;
    for (NodeIndex n : scheme.path(i).nodes) ids.push_back(original.node(n).id);
    std::vector<NodeIndex> path;
    for (const auto& id : sub.expand(ids)) path.push_back(sub.graph.index_of(id));
    if (path.front() != sub.graph.index_of(scheme.scenarios[i].source) ||
        path.back() != sub.graph.index_of(scheme.scenarios[i].destination))
      throw Error(ErrorCode::Validation, "scheme path does not join its scenario endpoints");
    out.push_back(make_routed(sub.graph, std::move(path), scheme.scenarios[i].importance));
  }
  return out;
}

double baseline_distance(const WayfindingScheme& scheme, std::size_t scenario) {
  if (scenario >= scheme.size())
    throw Error(ErrorCode::NotFound, "scenario " + std::to_string(scenario) + " is not assigned");
  return scheme.path(scenario).length;
}

double ScenarioOutcome::success_rate() const noexcept {
  return agents == 0 ? 0.0 : static_cast<double>(successes) / static_cast<double>(agents);
}

double ScenarioOutcome::mean_success_distance() const noexcept {
  double total = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < distances.size(); ++i) {
    if (succeeded[i]) {
      total += distances[i];
      ++n;
    }
  }
  return n == 0 ? 0.0 : total / static_cast<double>(n);
}

double ScenarioOutcome::sd_success_distance() const noexcept {
  const double mean = mean_success_distance();
  double sq = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < distances.size(); ++i) {
    if (succeeded[i]) {
      sq += (distances[i] - mean) * (distances[i] - mean);
      ++n;
    }
  }
  return n == 0 ? 0.0 : std::sqrt(sq / static_cast<double>(n));
}

bool sight_line_clear(const LayoutGraph& g, Point a, Point b) {
  for (const auto& poly : g.obstacles()) {
    const auto& v = poly.vertices;
    if (v.size() < 3) continue;
    for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
      if (segments_cross(a, b, v[j], v[i])) return false;
    }
    if (inside(poly, Point{(a.x + b.x) / 2.0, (a.y + b.y) / 2.0})) return false;
  }
  return true;
}

Simulator::Simulator(const LayoutGraph& g, const AgentParams& params)
    : graph_(&g), params_(params) {
  params_.validate();
  const std::size_t n = g.node_count();

  visible_.resize(n);
  for (NodeIndex u = 0; u < n; ++u) {
    std::vector<std::tuple<double, bool, NodeIndex>> seen;
    const Point pu = g.node(u).position;
    for (NodeIndex v = 0; v < n; ++v) {
      const double d = distance(pu, g.node(v).position);
      if (d > params_.visibility) continue;
      if (v != u && !sight_line_clear(g, pu, g.node(v).position)) continue;
      seen.emplace_back(d, v != u, v);
    }
    std::sort(seen.begin(), seen.end());
    for (const auto& [d, other, v] : seen) visible_[u].push_back(v);
  }

  next_hop_.assign(n, std::vector<NodeIndex>(n, kNone));
  for (NodeIndex t = 0; t < n; ++t) {
    const auto dist = distances_to(t);
    for (NodeIndex u = 0; u < n; ++u) {
      if (u == t || dist[u] == kInf) continue;
      for (const auto& adj : g.neighbors(u)) {
        if (dist[adj.node] + g.edge(adj.edge).length == dist[u]) {
          next_hop_[u][t] = adj.node;
          break;
        }
      }
    }
  }
}

std::vector<double> Simulator::distances_to(NodeIndex target) const {
  const LayoutGraph& g = *graph_;
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
      const double candidate = du + g.edge(adj.edge).length;
      if (candidate < dist[adj.node]) {
        dist[adj.node] = candidate;
        queue.emplace(candidate, adj.node);
      }
    }
  }
  return dist;
}

std::vector<NodeIndex> Simulator::arrows(const SignPlacement& signs, NodeIndex destination) const {
  std::vector<NodeIndex> out(graph_->node_count(), kNone);
  for (const auto& s : signs.entries()) {
    if (s.destination == destination) out[s.node] = s.next_node;
  }
  return out;
}

Trajectory Simulator::walk(std::span<const NodeIndex> arrows, NodeIndex source,
                           NodeIndex destination, double budget, Rng& rng) const {
  const LayoutGraph& g = *graph_;
  const double miss = params_.miss_prob;
  Trajectory t;
  t.nodes.push_back(source);

  NodeIndex u = source;
  std::optional<EdgeIndex> came_by;
  NodeIndex target = kNone;          // distant sign being approached
  std::vector<NodeIndex> followed;   // signs already acted on from afar

  auto sees = [&] { return !rng.bernoulli(miss); };
  std::vector<Adjacent> options;

  while (u != destination) {
    NodeIndex next = kNone;
    if (arrows[u] != kNone && sees()) {
      next = arrows[u];
      target = kNone;
      if (std::find(followed.begin(), followed.end(), u) == followed.end()) followed.push_back(u);
    } else if (target != kNone && target != u) {
      next = next_hop_[u][target];
    } else {
      target = kNone;
      // Signs that would make the agent turn around are not approached.
      const NodeIndex behind = came_by ? g.edge(*came_by).other(u) : kNone;
      for (NodeIndex v : visible_[u]) {
        if (v == u || arrows[v] == kNone) continue;
        if (std::find(followed.begin(), followed.end(), v) != followed.end()) continue;
        if (next_hop_[u][v] == kNone || next_hop_[u][v] == behind) continue;
        if (sees()) {
          target = v;
          next = next_hop_[u][v];
          break;
        }
      }
    }

    EdgeIndex via;
    if (next == kNone) {
      // No usable sign: pick a road at random, not the one just walked
      // unless it is the only one.
      options.clear();
      for (const auto& adj : g.neighbors(u)) {
        if (!came_by || adj.edge != *came_by) options.push_back(adj);
      }
      if (options.empty()) options.assign(g.neighbors(u).begin(), g.neighbors(u).end());
      if (options.empty()) break;  // isolated node
      const auto& pick = options[rng.below(options.size())];
      next = pick.node;
      via = pick.edge;
    } else {
      auto e = g.edge_between(u, next);
      if (!e) throw Error(ErrorCode::Validation, "sign at '" + g.node(u).id + "' points to a non-adjacent node");
      via = *e;
    }

    t.distance += g.edge(via).length;
    t.nodes.push_back(next);
    came_by = via;
    u = next;
    if (t.distance > budget) {
      t.outcome = Outcome::Failure;
      return t;
    }
  }
  t.outcome = u == destination ? Outcome::Success : Outcome::Failure;
  return t;
}

Trajectory simulate_agent(const Simulator& sim, const SignPlacement& signs,
                          const RoutedScenario& scenario, Rng& rng) {
  const auto arrows = sim.arrows(signs, scenario.destination);
  return sim.walk(arrows, scenario.source, scenario.destination,
                  sim.params().stretch_factor * scenario.baseline, rng);
}

SimOutcome evaluate_placement(const Simulator& sim, const SignPlacement& signs,
                              std::span<const RoutedScenario> scenarios, std::uint64_t seed,
                              bool keep_trajectories) {
  SimOutcome out;
  std::size_t failures = 0;
  std::size_t total = 0;
  const std::size_t agents = sim.params().agents_per_scenario;
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    const auto& z = scenarios[i];
    const auto arrows = sim.arrows(signs, z.destination);
    const double budget = sim.params().stretch_factor * z.baseline;
    ScenarioOutcome so;
    so.agents = agents;
    so.distances.reserve(agents);
    for (std::size_t j = 0; j < agents; ++j) {
      Rng rng(derive_seed(seed, i, j));
      auto t = sim.walk(arrows, z.source, z.destination, budget, rng);
      const bool ok = t.outcome == Outcome::Success;
      if (ok) {
        ++so.successes;
      } else {
        ++failures;
      }
      so.distances.push_back(t.distance);
      so.succeeded.push_back(ok);
      if (keep_trajectories) out.trajectories.push_back({j, i, std::move(t)});
    }
    total += agents;
    out.scenarios.push_back(std::move(so));
  }
  out.failure_rate = total == 0 ? 0.0 : static_cast<double>(failures) / static_cast<double>(total);
  return out;
}

}  // namespace wayfind
