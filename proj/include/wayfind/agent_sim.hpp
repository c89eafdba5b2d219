#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "wayfind/graph.hpp"
#include "wayfind/placement.hpp"
#include "wayfind/rng.hpp"
#include "wayfind/scheme.hpp"

namespace wayfind {

struct AgentParams {
  double visibility = 125.0;     // metres
  double miss_prob = 0.0;        // chance of missing a sign in sight
  double stretch_factor = 1.5;   // success budget = stretch_factor x baseline
  std::size_t agents_per_scenario = 100;

  void validate() const;
};

// A scheme path expressed on the subdivided graph.
struct RoutedScenario {
  NodeIndex source = 0;
  NodeIndex destination = 0;
  double importance = 1.0;
  std::vector<NodeIndex> path;
  std::vector<double> offsets;  // distance from the source to each path node
  double baseline = 0.0;  // length of `path`; what a zero-miss agent walks under full placement
};

// Builds a routed scenario from a walk on `g` (first node source, last node
// destination).
RoutedScenario make_routed(const LayoutGraph& g, std::vector<NodeIndex> path, double importance = 1.0);

// Maps every scenario of `scheme` (built on `original`) onto the subdivided graph.
std::vector<RoutedScenario> route_scheme(const LayoutGraph& original, const Subdivision& sub,
                                         const WayfindingScheme& scheme);

// Length of the scenario's chosen path. Throws NotFound for an unknown index.
double baseline_distance(const WayfindingScheme& scheme, std::size_t scenario);

enum class Outcome { Success, Failure };

struct Trajectory {
  std::vector<NodeIndex> nodes;
  double distance = 0.0;
  Outcome outcome = Outcome::Failure;
};

struct ScenarioOutcome {
  std::size_t agents = 0;
  std::size_t successes = 0;
  std::vector<double> distances;  // walked distance per agent, in agent order
  std::vector<bool> succeeded;    // outcome per agent

  double success_rate() const noexcept;
  // Statistics over successful agents only.
  double mean_success_distance() const noexcept;
  double sd_success_distance() const noexcept;
};

struct AgentRecord {
  std::size_t agent = 0;
  std::size_t scenario = 0;
  Trajectory trajectory;
};

struct SimOutcome {
  std::vector<ScenarioOutcome> scenarios;
  double failure_rate = 0.0;
  std::vector<AgentRecord> trajectories;  // filled only when requested
};

// Precomputed sight lines and next-hop routes for one graph and parameter
// set. Immutable after construction.
class Simulator {
 public:
  static constexpr NodeIndex kNone = std::numeric_limits<NodeIndex>::max();

  Simulator(const LayoutGraph& g, const AgentParams& params);

  const LayoutGraph& graph() const noexcept { return *graph_; }
  const AgentParams& params() const noexcept { return params_; }

  // Arrow per node toward `destination` (kNone where unsigned).
  std::vector<NodeIndex> arrows(const SignPlacement& signs, NodeIndex destination) const;

  // Walks one agent until it reaches `destination` (Success) or its walked
  // distance exceeds `budget` (Failure).
  Trajectory walk(std::span<const NodeIndex> arrows, NodeIndex source, NodeIndex destination,
                  double budget, Rng& rng) const;

  // Shortest-path distances from every node to `target`.
  std::vector<double> distances_to(NodeIndex target) const;

  // Nodes whose signs are readable from `from`, nearest first (including `from`).
  std::span<const NodeIndex> visible_from(NodeIndex from) const { return visible_[from]; }

 private:
  const LayoutGraph* graph_;
  AgentParams params_;
  std::vector<std::vector<NodeIndex>> visible_;
  std::vector<std::vector<NodeIndex>> next_hop_;  // [from][to]
};

bool sight_line_clear(const LayoutGraph& g, Point a, Point b);

Trajectory simulate_agent(const Simulator& sim, const SignPlacement& signs,
                          const RoutedScenario& scenario, Rng& rng);

// Runs agents_per_scenario agents per scenario; agent j of scenario i draws
// from its own stream derive_seed(seed, i, j), so results do not depend on
// evaluation order.
SimOutcome evaluate_placement(const Simulator& sim, const SignPlacement& signs,
                              std::span<const RoutedScenario> scenarios, std::uint64_t seed,
                              bool keep_trajectories = false);

}  // namespace wayfind
