#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace wayfind {

using NodeIndex = std::uint32_t;
using EdgeIndex = std::uint32_t;

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

double distance(Point a, Point b) noexcept;

enum class NodeKind { Intersection, Entrance, Poi, Auxiliary };

const char* to_string(NodeKind kind) noexcept;
std::optional<NodeKind> parse_node_kind(std::string_view text) noexcept;

struct Node {
  std::string id;
  Point position;
  NodeKind kind = NodeKind::Intersection;
  std::string label;

  friend bool operator==(const Node&, const Node&) = default;
};

// Edge as authored: endpoints by id, length optional (Euclidean if absent).
struct EdgeSpec {
  std::string a;
  std::string b;
  std::optional<double> length;
};

// Validated edge. Endpoints are node indices with a < b.
struct Edge {
  NodeIndex a = 0;
  NodeIndex b = 0;
  double length = 0.0;

  NodeIndex other(NodeIndex n) const noexcept { return n == a ? b : a; }

  friend bool operator==(const Edge&, const Edge&) = default;
};

struct Adjacent {
  NodeIndex node;
  EdgeIndex edge;
};

// Simple polygon, used only for optional sight-line occlusion.
struct Obstacle {
  std::vector<Point> vertices;

  friend bool operator==(const Obstacle&, const Obstacle&) = default;
};

// Undirected, immutable layout graph. Nodes are stored sorted by id, so index
// order equals id order and lexicographic comparison of index sequences is
// lexicographic comparison of id sequences.
class LayoutGraph {
 public:
  LayoutGraph() = default;

  std::span<const Node> nodes() const noexcept { return nodes_; }
  std::span<const Edge> edges() const noexcept { return edges_; }
  std::span<const Obstacle> obstacles() const noexcept { return obstacles_; }
  std::span<const Adjacent> neighbors(NodeIndex n) const noexcept { return adjacency_[n]; }

  std::size_t node_count() const noexcept { return nodes_.size(); }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  const Node& node(NodeIndex n) const { return nodes_.at(n); }
  const Edge& edge(EdgeIndex e) const { return edges_.at(e); }
  std::size_t degree(NodeIndex n) const { return adjacency_.at(n).size(); }

  std::optional<NodeIndex> find(std::string_view id) const noexcept;
  // Throws NotFound naming the id.
  NodeIndex index_of(std::string_view id) const;
  std::optional<EdgeIndex> edge_between(NodeIndex a, NodeIndex b) const noexcept;

  // Number of non-auxiliary nodes.
  std::size_t original_node_count() const noexcept;

  LayoutGraph with_obstacles(std::vector<Obstacle> obstacles) const;

  friend bool operator==(const LayoutGraph& x, const LayoutGraph& y) {
    return x.nodes_ == y.nodes_ && x.edges_ == y.edges_ && x.obstacles_ == y.obstacles_;
  }

 private:
  friend LayoutGraph build_graph(std::vector<Node> nodes, std::span<const EdgeSpec> edges);

  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
  std::vector<std::vector<Adjacent>> adjacency_;
  std::vector<Obstacle> obstacles_;
};

// Validates and assembles a graph. Throws Error{Validation} on duplicate ids,
// dangling endpoints, self-loops, parallel edges, non-finite positions and
// lengths that are non-positive or shorter than the straight-line distance.
LayoutGraph build_graph(std::vector<Node> nodes, std::span<const EdgeSpec> edges);

double total_edge_length(const LayoutGraph& g) noexcept;

// Sum of edge lengths along a node sequence. Throws if two consecutive nodes
// are not adjacent.
double walk_length(const LayoutGraph& g, std::span<const NodeIndex> nodes);

struct NavScenario {
  std::string source;
  std::string destination;
  double importance = 1.0;

  friend bool operator==(const NavScenario&, const NavScenario&) = default;
};

// One scenario per (Entrance, Poi) pair, ordered by (source id, destination
// id), each with importance 1/count.
std::vector<NavScenario> default_scenarios(const LayoutGraph& g);

// Checks ids, importance range and mutual reachability. Throws Validation
// (bad ids, importance) or Unreachable.
void validate_scenarios(const LayoutGraph& g, std::span<const NavScenario> scenarios);

// Connected-component label per node.
std::vector<std::uint32_t> components(const LayoutGraph& g);

// Result of splitting long edges. `chains` maps every edge of the input graph,
// keyed by its (smaller id, larger id) endpoints, to the node-id sequence that
// replaces it in `graph` (both endpoints included).
struct Subdivision {
  LayoutGraph graph;
  std::map<std::pair<std::string, std::string>, std::vector<std::string>> chains;

  // Expands a node-id walk on the input graph into the subdivided graph.
  std::vector<std::string> expand(std::span<const std::string> walk) const;
};

// Splits every edge strictly longer than `max_segment` into ceil(len/max)
// equal segments using Auxiliary nodes. Throws InvalidArgument if
// max_segment <= 0.
Subdivision subdivide(const LayoutGraph& g, double max_segment);
LayoutGraph subdivide_edges(const LayoutGraph& g, double max_segment);

}  // namespace wayfind
