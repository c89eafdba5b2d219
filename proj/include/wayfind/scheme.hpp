#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "wayfind/anneal.hpp"
#include "wayfind/graph.hpp"
#include "wayfind/kshortest.hpp"
#include "wayfind/rng.hpp"

namespace wayfind {

struct SchemeWeights {
  double local_length = 1.0;
  double local_node = 1.0;
  double local_angle = 10.0;
  double global_length = 5.0;
  double global_node = 5.0;

  void validate() const;
};

// One chosen path per scenario, drawn from that scenario's candidate list.
struct WayfindingScheme {
  std::vector<NavScenario> scenarios;
  std::vector<std::vector<Path>> candidates;
  std::vector<std::size_t> choice;

  std::size_t size() const noexcept { return scenarios.size(); }
  const Path& path(std::size_t scenario) const { return candidates.at(scenario).at(choice.at(scenario)); }

  // Scheme whose only candidates are the given paths.
  static WayfindingScheme from_paths(std::vector<NavScenario> scenarios, std::vector<Path> paths);
};

// Sum of absolute turning angles at the interior nodes of `p`, in radians.
double path_turning_angle(const LayoutGraph& g, const Path& p);

double cost_local_length(const LayoutGraph& g, const WayfindingScheme& scheme);
double cost_local_node(const LayoutGraph& g, const WayfindingScheme& scheme);
double cost_local_angle(const LayoutGraph& g, const WayfindingScheme& scheme);
double cost_global_length(const LayoutGraph& g, const WayfindingScheme& scheme);
double cost_global_node(const LayoutGraph& g, const WayfindingScheme& scheme);

struct SchemeCosts {
  double local_length = 0.0;
  double local_node = 0.0;
  double local_angle = 0.0;
  double global_length = 0.0;
  double global_node = 0.0;

  double total(const SchemeWeights& w) const noexcept;
};

SchemeCosts scheme_costs(const LayoutGraph& g, const WayfindingScheme& scheme);
double total_scheme_cost(const LayoutGraph& g, const WayfindingScheme& scheme,
                         const SchemeWeights& weights);

// Draws the number of scenarios a move touches: Pr(x) = (n - x + 1) / (n (n + 1) / 2).
std::size_t draw_move_size(std::size_t n, Rng& rng);

// Reassigns x distinct scenarios (x from draw_move_size) to uniformly drawn
// candidates; a reassignment may redraw the current path.
std::vector<std::size_t> propose_move(std::span<const std::size_t> choice,
                                      std::span<const std::size_t> candidate_counts, Rng& rng);
WayfindingScheme propose_move(const WayfindingScheme& scheme, Rng& rng);

struct TraceRow {
  std::size_t iteration = 0;
  double temperature = 0.0;
  double current = 0.0;
  double best = 0.0;
};

struct SchemeResult {
  WayfindingScheme scheme;  // best visited
  SchemeCosts costs;        // terms of `scheme`
  double cost = 0.0;
  double initial_cost = 0.0;
  std::vector<TraceRow> trace;  // row 0 is the random initial state
  std::vector<std::size_t> capped_scenarios;
};

using ProgressFn = std::function<void(std::size_t iteration, double best_cost)>;

// Simulated annealing over the candidate product space. Deterministic for a
// given schedule.seed. Throws Unreachable / Validation for bad scenarios.
SchemeResult optimize_scheme(const LayoutGraph& g, std::span<const NavScenario> scenarios,
                             const SchemeWeights& weights, const AnnealSchedule& schedule,
                             double stretch = kDefaultStretch,
                             std::size_t k_cap = kDefaultCandidateCap,
                             const ProgressFn& progress = {});

}  // namespace wayfind
