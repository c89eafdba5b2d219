#include "wayfind/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "wayfind/error.hpp"

namespace wayfind {

namespace {

std::string edge_name(const EdgeSpec& e) { return "(" + e.a + ", " + e.b + ")"; }

}  // namespace

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid_argument";
    case ErrorCode::Parse: return "parse_error";
    case ErrorCode::Validation: return "validation_error";
    case ErrorCode::Unreachable: return "unreachable";
    case ErrorCode::Infeasible: return "infeasible";
    case ErrorCode::NotFound: return "not_found";
    case ErrorCode::Io: return "io_error";
  }
  return "unknown";
}

double distance(Point a, Point b) noexcept { return std::hypot(a.x - b.x, a.y - b.y); }

const char* to_string(NodeKind kind) noexcept {
  switch (kind) {
    case NodeKind::Intersection: return "intersection";
    case NodeKind::Entrance: return "entrance";
    case NodeKind::Poi: return "poi";
    case NodeKind::Auxiliary: return "auxiliary";
  }
  return "intersection";
}

std::optional<NodeKind> parse_node_kind(std::string_view text) noexcept {
  if (text == "intersection") return NodeKind::Intersection;
  if (text == "entrance") return NodeKind::Entrance;
  if (text == "poi") return NodeKind::Poi;
  if (text == "auxiliary") return NodeKind::Auxiliary;
  return std::nullopt;
}

std::optional<NodeIndex> LayoutGraph::find(std::string_view id) const noexcept {
  auto it = std::lower_bound(nodes_.begin(), nodes_.end(), id,
                             [](const Node& n, std::string_view key) { return n.id < key; });
  if (it == nodes_.end() || it->id != id) return std::nullopt;
  return static_cast<NodeIndex>(it - nodes_.begin());
}

NodeIndex LayoutGraph::index_of(std::string_view id) const {
  if (auto n = find(id)) return *n;
  throw Error(ErrorCode::NotFound, "unknown node id '" + std::string(id) + "'");
}

std::optional<EdgeIndex> LayoutGraph::edge_between(NodeIndex a, NodeIndex b) const noexcept {
  if (a >= adjacency_.size()) return std::nullopt;
  for (const auto& adj : adjacency_[a]) {
    if (adj.node == b) return adj.edge;
  }
  return std::nullopt;
}

std::size_t LayoutGraph::original_node_count() const noexcept {
  return static_cast<std::size_t>(std::count_if(
      nodes_.begin(), nodes_.end(), [](const Node& n) { return n.kind != NodeKind::Auxiliary; }));
}

LayoutGraph LayoutGraph::with_obstacles(std::vector<Obstacle> obstacles) const {
  LayoutGraph copy = *this;
  copy.obstacles_ = std::move(obstacles);
  return copy;
}

LayoutGraph build_graph(std::vector<Node> nodes, std::span<const EdgeSpec> edges) {
  if (nodes.empty()) throw Error(ErrorCode::Validation, "layout has no nodes");

  std::sort(nodes.begin(), nodes.end(), [](const Node& x, const Node& y) { return x.id < y.id; });
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].id.empty()) throw Error(ErrorCode::Validation, "node with empty id");
    if (i > 0 && nodes[i].id == nodes[i - 1].id)
      throw Error(ErrorCode::Validation, "duplicate node id '" + nodes[i].id + "'");
    if (!std::isfinite(nodes[i].position.x) || !std::isfinite(nodes[i].position.y))
      throw Error(ErrorCode::Validation, "node '" + nodes[i].id + "' has a non-finite position");
  }

  LayoutGraph g;
  g.nodes_ = std::move(nodes);
  g.adjacency_.resize(g.nodes_.size());

  std::set<std::pair<NodeIndex, NodeIndex>> seen;
  g.edges_.reserve(edges.size());
  for (const auto& spec : edges) {
    auto a = g.find(spec.a);
    auto b = g.find(spec.b);
    if (!a || !b) {
      throw Error(ErrorCode::Validation, "dangling endpoint: edge " + edge_name(spec) +
                                             " references unknown node '" +
                                             (!a ? spec.a : spec.b) + "'");
    }
    if (*a == *b) throw Error(ErrorCode::Validation, "self-loop on node '" + spec.a + "'");
    if (*a > *b) std::swap(a, b);
    if (!seen.emplace(*a, *b).second)
      throw Error(ErrorCode::Validation, "duplicate edge " + edge_name(spec));

    const double euclid = distance(g.nodes_[*a].position, g.nodes_[*b].position);
    double length = spec.length.value_or(euclid);
    if (!std::isfinite(length) || length <= 0.0)
      throw Error(ErrorCode::Validation, "edge " + edge_name(spec) + " has non-positive length");
    // Authored lengths may round slightly below the coordinate distance.
    if (spec.length && length < euclid * (1.0 - 1e-9))
      throw Error(ErrorCode::Validation,
                  "edge " + edge_name(spec) + " is shorter than the distance between its endpoints");

    const auto index = static_cast<EdgeIndex>(g.edges_.size());
    g.edges_.push_back(Edge{*a, *b, length});
    g.adjacency_[*a].push_back({*b, index});
    g.adjacency_[*b].push_back({*a, index});
  }
  for (auto& list : g.adjacency_) {
    std::sort(list.begin(), list.end(),
              [](const Adjacent& x, const Adjacent& y) { return x.node < y.node; });
  }
  return g;
}

double total_edge_length(const LayoutGraph& g) noexcept {
  double total = 0.0;
  for (const auto& e : g.edges()) total += e.length;
  return total;
}

double walk_length(const LayoutGraph& g, std::span<const NodeIndex> nodes) {
  double total = 0.0;
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    auto e = g.edge_between(nodes[i - 1], nodes[i]);
    if (!e) {
      throw Error(ErrorCode::Validation, "nodes '" + g.node(nodes[i - 1]).id + "' and '" +
                                             g.node(nodes[i]).id + "' are not adjacent");
    }
    total += g.edge(*e).length;
  }
  return total;
}

std::vector<NavScenario> default_scenarios(const LayoutGraph& g) {
  std::vector<NavScenario> out;
  for (const auto& s : g.nodes()) {
    if (s.kind != NodeKind::Entrance) continue;
    for (const auto& d : g.nodes()) {
      if (d.kind == NodeKind::Poi) out.push_back({s.id, d.id, 0.0});
    }
  }
  for (auto& z : out) z.importance = 1.0 / static_cast<double>(out.size());
  return out;
}

std::vector<std::uint32_t> components(const LayoutGraph& g) {
  constexpr auto unset = static_cast<std::uint32_t>(-1);
  std::vector<std::uint32_t> label(g.node_count(), unset);
  std::uint32_t next = 0;
  std::vector<NodeIndex> stack;
  for (NodeIndex root = 0; root < g.node_count(); ++root) {
    if (label[root] != unset) continue;
    label[root] = next;
    stack.push_back(root);
    while (!stack.empty()) {
      const NodeIndex u = stack.back();
      stack.pop_back();
      for (const auto& adj : g.neighbors(u)) {
        if (label[adj.node] == unset) {
          label[adj.node] = next;
          stack.push_back(adj.node);
        }
      }
    }
    ++next;
  }
  return label;
}

void validate_scenarios(const LayoutGraph& g, std::span<const NavScenario> scenarios) {
  const auto label = components(g);
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    const auto& z = scenarios[i];
    const std::string name = "scenario " + std::to_string(i) + " (" + z.source + " -> " +
                             z.destination + ")";
    auto s = g.find(z.source);
    auto d = g.find(z.destination);
    if (!s || !d) {
      throw Error(ErrorCode::Validation, name + ": unknown node id '" +
                                             (!s ? z.source : z.destination) + "'");
    }
    if (*s == *d) throw Error(ErrorCode::Validation, name + ": source equals destination");
    if (!(z.importance >= 0.0 && z.importance <= 1.0))
      throw Error(ErrorCode::Validation, name + ": importance outside [0, 1]");
    if (label[*s] != label[*d])
      throw Error(ErrorCode::Unreachable, name + ": destination unreachable from source");
  }
}

std::vector<std::string> Subdivision::expand(std::span<const std::string> walk) const {
  std::vector<std::string> out;
  if (walk.empty()) return out;
  out.push_back(walk.front());
  for (std::size_t i = 1; i < walk.size(); ++i) {
    const auto& a = walk[i - 1];
    const auto& b = walk[i];
    const bool forward = a < b;
    auto it = chains.find(forward ? std::pair{a, b} : std::pair{b, a});
    if (it == chains.end())
      throw Error(ErrorCode::Validation, "no edge between '" + a + "' and '" + b + "'");
    const auto& chain = it->second;
    if (forward) {
      out.insert(out.end(), chain.begin() + 1, chain.end());
    } else {
      out.insert(out.end(), chain.rbegin() + 1, chain.rend());
    }
  }
  return out;
}

Subdivision subdivide(const LayoutGraph& g, double max_segment) {
  if (!(max_segment > 0.0) || !std::isfinite(max_segment))
    throw Error(ErrorCode::InvalidArgument, "subdivision distance must be positive");

  std::vector<Node> nodes(g.nodes().begin(), g.nodes().end());
  std::vector<EdgeSpec> edges;
  Subdivision out;

  for (const auto& e : g.edges()) {
    const Node& a = g.node(e.a);
    const Node& b = g.node(e.b);
    std::vector<std::string> chain{a.id};
    if (e.length > max_segment) {
      const auto pieces = static_cast<std::size_t>(std::ceil(e.length / max_segment));
      const double piece = e.length / static_cast<double>(pieces);
      std::string prev = a.id;
      for (std::size_t k = 1; k < pieces; ++k) {
        const double t = static_cast<double>(k) / static_cast<double>(pieces);
        Node aux;
        aux.id = a.id + "~" + b.id + "#" + std::to_string(k);
        aux.position = {a.position.x + t * (b.position.x - a.position.x),
                        a.position.y + t * (b.position.y - a.position.y)};
        aux.kind = NodeKind::Auxiliary;
        edges.push_back({prev, aux.id, piece});
        prev = aux.id;
        chain.push_back(aux.id);
        nodes.push_back(std::move(aux));
      }
      edges.push_back({prev, b.id, piece});
    } else {
      edges.push_back({a.id, b.id, e.length});
    }
    chain.push_back(b.id);
    out.chains.emplace(std::pair{a.id, b.id}, std::move(chain));
  }

  std::vector<Obstacle> obstacles(g.obstacles().begin(), g.obstacles().end());
  out.graph = build_graph(std::move(nodes), edges).with_obstacles(std::move(obstacles));
  return out;
}

LayoutGraph subdivide_edges(const LayoutGraph& g, double max_segment) {
  return subdivide(g, max_segment).graph;
}

}  // namespace wayfind
