#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "wayfind/agent_sim.hpp"
#include "wayfind/anneal.hpp"
#include "wayfind/placement.hpp"
#include "wayfind/scheme.hpp"

namespace wayfind {

struct SignWeights {
  double count = 1.0;
  double distribution = 1.0;
  double failure = 10.0;
  double tolerance = 0.2;  // maximum admissible failure rate

  void validate() const;
};

// Schedule defaults for the refinement stage.
AnnealSchedule default_sign_schedule();

// A sign at every node of every scheme path except the destination, pointing
// to the path successor. When scenarios disagree at a shared (node,
// destination), the earlier scenario wins.
SignPlacement full_placement(std::span<const RoutedScenario> scenarios);

// Entries divided by the node count of the placement graph.
double cost_sign_count(const SignPlacement& signs, const LayoutGraph& g);

// Mean over scenarios of sd(gaps) / path length, where the gaps run between
// the source, every on-path sign for the scenario's destination, and the
// destination. Scenarios with fewer than two gaps contribute zero.
double cost_sign_distribution(const SignPlacement& signs, std::span<const RoutedScenario> scenarios);

// failure_rate when it does not exceed `tolerance`, +infinity otherwise.
double cost_sign_failure(double failure_rate, double tolerance);

struct SignCosts {
  double count = 0.0;
  double distribution = 0.0;
  double failure_rate = 0.0;
  double failure = 0.0;  // may be +infinity

  double total(const SignWeights& w) const noexcept;
};

SignCosts sign_costs(const Simulator& sim, const SignPlacement& signs,
                     std::span<const RoutedScenario> scenarios, const SignWeights& weights,
                     std::uint64_t seed);
double total_sign_cost(const Simulator& sim, const SignPlacement& signs,
                       std::span<const RoutedScenario> scenarios, const SignWeights& weights,
                       std::uint64_t seed);

enum class SignMoveKind { Add, Remove, Relocate };

const char* to_string(SignMoveKind kind) noexcept;

std::vector<SignMoveKind> feasible_sign_moves(const SignPlacement& signs,
                                              std::span<const RoutedScenario> scenarios);

struct SignMove {
  SignMoveKind kind = SignMoveKind::Add;
  SignPlacement result;
};

// Draws a move kind uniformly among the feasible ones and applies it. Added
// and relocated entries always point to the path successor. With no feasible
// kind the placement is returned unchanged as an Add.
SignMove propose_sign_move(const SignPlacement& signs, std::span<const RoutedScenario> scenarios,
                           Rng& rng);

struct RefineResult {
  SignPlacement placement;  // best visited
  SignPlacement initial;    // the full placement
  SignCosts costs;          // of `placement`, as evaluated during the search
  double cost = 0.0;
  std::vector<TraceRow> trace;
};

// Anneals from the full placement. Every accepted state has finite cost.
// Throws Infeasible when the full placement already exceeds the tolerance.
RefineResult refine_signs(const Simulator& sim, std::span<const RoutedScenario> scenarios,
                          const SignWeights& weights, const AnnealSchedule& schedule,
                          const ProgressFn& progress = {});

}  // namespace wayfind
