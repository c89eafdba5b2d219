#include "wayfind/accessibility.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "wayfind/error.hpp"
#include "wayfind/kshortest.hpp"

namespace wayfind {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Box {
  double x0 = kInf, y0 = kInf, x1 = -kInf, y1 = -kInf;

  void add(Point p) {
    x0 = std::min(x0, p.x);
    y0 = std::min(y0, p.y);
    x1 = std::max(x1, p.x);
    y1 = std::max(y1, p.y);
  }
  double slack() const { return 1e-9 * std::max(1.0, std::hypot(x1 - x0, y1 - y0)); }
  bool contains(Point p) const {
    const double e = slack();
    return p.x >= x0 - e && p.x <= x1 + e && p.y >= y0 - e && p.y <= y1 + e;
  }
};

}  // namespace

FieldSummary summarize(const AccessibilityField& field, double blind_threshold) {
  FieldSummary s;
  if (field.samples.empty()) return s;
  s.min = kInf;
  s.max = -kInf;
  double total = 0.0;
  for (const auto& sample : field.samples) {
    s.min = std::min(s.min, sample.rate);
    s.max = std::max(s.max, sample.rate);
    total += sample.rate;
    if (sample.rate < blind_threshold) ++s.blind;
  }
  s.mean = total / static_cast<double>(field.samples.size());
  return s;
}

AccessibilityAnalyzer::AccessibilityAnalyzer(const LayoutGraph& placement_graph,
                                             const AgentParams& params, double interval)
    : placement_graph_(&placement_graph),
      interval_(interval),
      sub_(std::make_unique<Subdivision>(subdivide(placement_graph, interval))),
      sim_(std::make_unique<Simulator>(sub_->graph, params)) {}

std::vector<NodeIndex> AccessibilityAnalyzer::sampled_arrows(const SignPlacement& signs,
                                                             NodeIndex destination) const {
  const LayoutGraph& g = *placement_graph_;
  const LayoutGraph& sampled = sub_->graph;
  std::vector<NodeIndex> arrows(sampled.node_count(), Simulator::kNone);
  for (const auto& s : signs.entries()) {
    if (s.destination != destination) continue;
    const std::string& from = g.node(s.node).id;
    const std::string& to = g.node(s.next_node).id;
    const bool forward = from < to;
    auto it = sub_->chains.find(forward ? std::pair{from, to} : std::pair{to, from});
    if (it == sub_->chains.end())
      throw Error(ErrorCode::Validation, "sign at '" + from + "' points to a non-adjacent node");
    const auto& chain = it->second;
    const std::string& step = forward ? chain[1] : chain[chain.size() - 2];
    arrows[sampled.index_of(from)] = sampled.index_of(step);
  }
  return arrows;
}

double AccessibilityAnalyzer::sample_rate(std::span<const NodeIndex> arrows, NodeIndex sample,
                                          NodeIndex destination, std::span<const double> dist,
                                          std::uint64_t seed) const {
  if (sample == destination) return 1.0;
  if (dist[sample] == kInf) return 0.0;
  const double budget = sim_->params().stretch_factor * dist[sample];
  const std::size_t agents = sim_->params().agents_per_scenario;
  std::size_t successes = 0;
  for (std::size_t j = 0; j < agents; ++j) {
    Rng rng(derive_seed(seed, sample, j));
    if (sim_->walk(arrows, sample, destination, budget, rng).outcome == Outcome::Success) ++successes;
  }
  return static_cast<double>(successes) / static_cast<double>(agents);
}

AccessibilityField AccessibilityAnalyzer::skeleton(NodeIndex destination) const {
  const LayoutGraph& sampled = sub_->graph;
  AccessibilityField field;
  field.destination = placement_graph_->node(destination).id;
  field.interval = interval_;
  for (const auto& n : sampled.nodes()) field.samples.push_back({n.position, n.id, 0.0});
  for (const auto& e : sampled.edges()) field.segments.emplace_back(e.a, e.b);
  return field;
}

AccessibilityField AccessibilityAnalyzer::compute(const SignPlacement& signs, NodeIndex destination,
                                                  std::uint64_t seed) const {
  const NodeIndex dest = sub_->graph.index_of(placement_graph_->node(destination).id);
  const auto arrows = sampled_arrows(signs, destination);
  const auto dist = sim_->distances_to(dest);
  AccessibilityField field = skeleton(destination);
  for (NodeIndex i = 0; i < field.samples.size(); ++i) {
    field.samples[i].rate = sample_rate(arrows, i, dest, dist, seed);
  }
  return field;
}

AccessibilityField AccessibilityAnalyzer::update(const AccessibilityField& field,
                                                 const SignPlacement& signs, NodeIndex destination,
                                                 std::span<const NodeIndex> changed,
                                                 std::uint64_t seed,
                                                 std::vector<std::size_t>* recomputed) const {
  const LayoutGraph& sampled = sub_->graph;
  if (field.samples.size() != sampled.node_count())
    throw Error(ErrorCode::InvalidArgument, "field was sampled on a different graph");
  const NodeIndex dest = sampled.index_of(placement_graph_->node(destination).id);
  const auto arrows = sampled_arrows(signs, destination);
  const auto dist = sim_->distances_to(dest);
  const double sight = sim_->params().visibility;
  const double stretch = sim_->params().stretch_factor;

  std::vector<Point> sites;
  for (NodeIndex n : changed) sites.push_back(placement_graph_->node(n).position);

  AccessibilityField out = field;
  for (NodeIndex i = 0; i < out.samples.size(); ++i) {
    if (i == dest || dist[i] == kInf) continue;
    // An agent never gets further than its budget from the sample, so a sign
    // more than budget + sight away (straight line) is never perceived.
    const double reach = stretch * dist[i] + sight;
    const Point p = sampled.node(i).position;
    const bool affected = std::any_of(sites.begin(), sites.end(),
                                      [&](Point s) { return distance(p, s) <= reach * (1.0 + 1e-12); });
    if (!affected) continue;
    out.samples[i].rate = sample_rate(arrows, i, dest, dist, seed);
    if (recomputed) recomputed->push_back(i);
  }
  return out;
}

AccessibilityField compute_field(const LayoutGraph& placement_graph, const SignPlacement& signs,
                                 NodeIndex destination, const AgentParams& params, double interval,
                                 std::uint64_t seed) {
  return AccessibilityAnalyzer(placement_graph, params, interval).compute(signs, destination, seed);
}

double interpolate(const AccessibilityField& field, Point point) {
  if (field.samples.empty()) throw Error(ErrorCode::InvalidArgument, "empty field");
  Box box;
  for (const auto& s : field.samples) box.add(s.position);
  if (!box.contains(point)) throw Error(ErrorCode::InvalidArgument, "point outside the layout");

  const double on_edge = box.slack() * 1e3;
  double best = kInf;
  double value = 0.0;
  for (const auto& [ia, ib] : field.segments) {
    const Point a = field.samples[ia].position;
    const Point b = field.samples[ib].position;
    const double dx = b.x - a.x, dy = b.y - a.y;
    const double len2 = dx * dx + dy * dy;
    double t = len2 == 0.0 ? 0.0 : ((point.x - a.x) * dx + (point.y - a.y) * dy) / len2;
    t = std::clamp(t, 0.0, 1.0);
    const double d = distance(point, Point{a.x + t * dx, a.y + t * dy});
    if (d <= on_edge && d < best) {
      best = d;
      value = field.samples[ia].rate + t * (field.samples[ib].rate - field.samples[ia].rate);
    }
  }
  if (best < kInf) return value;

  std::size_t nearest = 0;
  double nearest_d = kInf;
  for (std::size_t i = 0; i < field.samples.size(); ++i) {
    const double d = distance(point, field.samples[i].position);
    if (d < nearest_d) {
      nearest_d = d;
      nearest = i;
    }
  }
  return field.samples[nearest].rate;
}

BlindZoneFix fix_blind_zone(const LayoutGraph& g, const SignPlacement& signs, NodeIndex destination,
                            Point point, std::span<const RoutedScenario> scenarios) {
  std::vector<const RoutedScenario*> leading;
  for (const auto& z : scenarios) {
    if (z.destination == destination) leading.push_back(&z);
  }
  if (leading.empty()) {
    throw Error(ErrorCode::NotFound,
                "destination '" + g.node(destination).id + "' has no scheme path");
  }
  Box box;
  for (const auto& n : g.nodes()) box.add(n.position);
  if (!box.contains(point)) throw Error(ErrorCode::InvalidArgument, "point outside the layout");

  BlindZoneFix fix;
  fix.placement = signs;
  double nearest = kInf;
  for (NodeIndex n = 0; n < g.node_count(); ++n) {
    const double d = distance(point, g.node(n).position);
    if (d < nearest) {
      nearest = d;
      fix.snapped = n;
    }
  }
  const NodeIndex start = fix.snapped;
  if (start == destination) return fix;

  // Successor along the first scheme path through `n`, if any.
  auto path_successor = [&](NodeIndex n) -> std::optional<NodeIndex> {
    for (const auto* z : leading) {
      for (std::size_t k = 0; k + 1 < z->path.size(); ++k) {
        if (z->path[k] == n) return z->path[k + 1];
      }
    }
    return std::nullopt;
  };
  auto add = [&](NodeIndex at, NodeIndex next) {
    Sign s{at, destination, next};
    if (fix.placement.insert(s)) fix.added.push_back(s);
  };

  // Nearest path node by graph distance; ties to the lower index.
  std::vector<char> on_path(g.node_count(), 0);
  for (const auto* z : leading) {
    for (NodeIndex n : z->path) on_path[n] = 1;
  }
  NodeIndex join = start;
  if (!on_path[start]) {
    double best = kInf;
    for (NodeIndex n = 0; n < g.node_count(); ++n) {
      if (!on_path[n]) continue;
      Path p;
      try {
        p = shortest_path(g, start, n);
      } catch (const Error&) {
        continue;
      }
      if (p.length < best) {
        best = p.length;
        join = n;
      }
    }
    if (best == kInf) {
      throw Error(ErrorCode::Unreachable,
                  "no route from '" + g.node(start).id + "' to a path toward the destination");
    }
    const Path connector = shortest_path(g, start, join);
    for (std::size_t k = 0; k + 1 < connector.nodes.size(); ++k) {
      const NodeIndex n = connector.nodes[k];
      if (k == 0 || g.degree(n) >= 3) add(n, connector.nodes[k + 1]);
    }
  }
  if (join != destination && (join == start || g.degree(join) >= 3)) {
    if (auto next = path_successor(join)) add(join, *next);
  }
  return fix;
}

}  // namespace wayfind
