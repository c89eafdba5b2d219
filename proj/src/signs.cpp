#include "wayfind/signs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "wayfind/error.hpp"

namespace wayfind {

namespace {

struct Slot {
  std::size_t scenario;
  std::size_t position;  // index into the scenario path
};

// Path positions (excluding the destination) that carry no entry for the
// scenario's destination.
std::vector<Slot> free_slots(const SignPlacement& signs, std::span<const RoutedScenario> scenarios,
                             std::size_t scenario) {
  std::vector<Slot> out;
  const auto& z = scenarios[scenario];
  for (std::size_t k = 0; k + 1 < z.path.size(); ++k) {
    if (!signs.contains(z.path[k], z.destination)) out.push_back({scenario, k});
  }
  return out;
}

std::vector<std::size_t> scenarios_with_free_slots(const SignPlacement& signs,
                                                   std::span<const RoutedScenario> scenarios) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    if (!free_slots(signs, scenarios, i).empty()) out.push_back(i);
  }
  return out;
}

Sign sign_at(const RoutedScenario& z, std::size_t k) {
  return Sign{z.path[k], z.destination, z.path[k + 1]};
}

// (entry, scenario) pairs where the entry sits on the scenario's path and that
// path has another free slot to move it to.
std::vector<std::pair<Sign, std::size_t>> relocatable(const SignPlacement& signs,
                                                      std::span<const RoutedScenario> scenarios) {
  std::vector<std::pair<Sign, std::size_t>> out;
  const auto entries = signs.entries();
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    const auto& z = scenarios[i];
    if (free_slots(signs, scenarios, i).empty()) continue;
    for (const auto& s : entries) {
      if (s.destination != z.destination) continue;
      if (std::find(z.path.begin(), z.path.end() - 1, s.node) != z.path.end() - 1)
        out.emplace_back(s, i);
    }
  }
  return out;
}

}  // namespace

void SignWeights::validate() const {
  for (double w : {count, distribution, failure}) {
    if (!(w >= 0.0) || !std::isfinite(w))
      throw Error(ErrorCode::InvalidArgument, "sign weights must be finite and non-negative");
  }
  if (!(tolerance >= 0.0 && tolerance <= 1.0))
    throw Error(ErrorCode::InvalidArgument, "failure tolerance must lie in [0, 1]");
}

AnnealSchedule default_sign_schedule() {
  AnnealSchedule s;
  s.t_initial = 0.1;
  s.cooling = 0.99;
  s.stop_window = 50;
  s.stop_rel_change = 0.01;
  s.max_iters = 5000;
  return s;
}

std::vector<Sign> SignPlacement::entries() const {
  std::vector<Sign> out;
  out.reserve(entries_.size());
  for (const auto& [key, next] : entries_) out.push_back({key.first, key.second, next});
  return out;
}

std::size_t SignPlacement::board_count() const {
  std::size_t boards = 0;
  NodeIndex last = 0;
  bool any = false;
  for (const auto& [key, next] : entries_) {
    if (!any || key.first != last) ++boards;
    last = key.first;
    any = true;
  }
  return boards;
}

void SignPlacement::validate(const LayoutGraph& g) const {
  for (const auto& [key, next] : entries_) {
    const auto [node, dest] = key;
    if (node >= g.node_count() || dest >= g.node_count() || next >= g.node_count())
      throw Error(ErrorCode::Validation, "sign references a node outside the graph");
    if (!g.edge_between(node, next)) {
      throw Error(ErrorCode::Validation, "sign at '" + g.node(node).id + "' points to '" +
                                             g.node(next).id + "', which is not adjacent");
    }
  }
}

SignPlacement full_placement(std::span<const RoutedScenario> scenarios) {
  SignPlacement out;
  for (const auto& z : scenarios) {
    for (std::size_t k = 0; k + 1 < z.path.size(); ++k) out.insert(sign_at(z, k));
  }
  return out;
}

double cost_sign_count(const SignPlacement& signs, const LayoutGraph& g) {
  return static_cast<double>(signs.size()) / static_cast<double>(g.node_count());
}

double cost_sign_distribution(const SignPlacement& signs, std::span<const RoutedScenario> scenarios) {
  if (scenarios.empty()) return 0.0;
  double total = 0.0;
  for (const auto& z : scenarios) {
    if (z.baseline <= 0.0) continue;
    // Marks along the path: source, signed nodes, destination.
    std::vector<double> marks{0.0};
    for (std::size_t k = 1; k + 1 < z.path.size(); ++k) {
      if (signs.contains(z.path[k], z.destination)) marks.push_back(z.offsets[k]);
    }
    marks.push_back(z.baseline);
    if (marks.size() < 3) continue;
    std::vector<double> gaps;
    for (std::size_t i = 1; i < marks.size(); ++i) gaps.push_back(marks[i] - marks[i - 1]);
    double mean = 0.0;
    for (double gap : gaps) mean += gap;
    mean /= static_cast<double>(gaps.size());
    double var = 0.0;
    for (double gap : gaps) var += (gap - mean) * (gap - mean);
    var /= static_cast<double>(gaps.size());
    total += std::sqrt(var) / z.baseline;
  }
  return total / static_cast<double>(scenarios.size());
}

double cost_sign_failure(double failure_rate, double tolerance) {
  if (failure_rate <= tolerance) return failure_rate;
  return std::numeric_limits<double>::infinity();
}

double SignCosts::total(const SignWeights& w) const noexcept {
  if (std::isinf(failure)) return std::numeric_limits<double>::infinity();
  return w.count * count + w.distribution * distribution + w.failure * failure;
}

SignCosts sign_costs(const Simulator& sim, const SignPlacement& signs,
                     std::span<const RoutedScenario> scenarios, const SignWeights& weights,
                     std::uint64_t seed) {
  SignCosts c;
  c.count = cost_sign_count(signs, sim.graph());
  c.distribution = cost_sign_distribution(signs, scenarios);
  c.failure_rate = evaluate_placement(sim, signs, scenarios, seed).failure_rate;
  c.failure = cost_sign_failure(c.failure_rate, weights.tolerance);
  return c;
}

double total_sign_cost(const Simulator& sim, const SignPlacement& signs,
                       std::span<const RoutedScenario> scenarios, const SignWeights& weights,
                       std::uint64_t seed) {
  return sign_costs(sim, signs, scenarios, weights, seed).total(weights);
}

const char* to_string(SignMoveKind kind) noexcept {
  switch (kind) {
    case SignMoveKind::Add: return "add";
    case SignMoveKind::Remove: return "remove";
    case SignMoveKind::Relocate: return "relocate";
  }
  return "add";
}

std::vector<SignMoveKind> feasible_sign_moves(const SignPlacement& signs,
                                              std::span<const RoutedScenario> scenarios) {
  std::vector<SignMoveKind> kinds;
  if (!scenarios_with_free_slots(signs, scenarios).empty()) kinds.push_back(SignMoveKind::Add);
  if (!signs.empty()) kinds.push_back(SignMoveKind::Remove);
  if (!relocatable(signs, scenarios).empty()) kinds.push_back(SignMoveKind::Relocate);
  return kinds;
}

SignMove propose_sign_move(const SignPlacement& signs, std::span<const RoutedScenario> scenarios,
                           Rng& rng) {
  SignMove move;
  move.result = signs;
  const auto kinds = feasible_sign_moves(signs, scenarios);
  if (kinds.empty()) return move;
  move.kind = kinds[rng.below(kinds.size())];
  const std::size_t amount = 1 + rng.below(2);

  switch (move.kind) {
    case SignMoveKind::Add:
      for (std::size_t n = 0; n < amount; ++n) {
        const auto open = scenarios_with_free_slots(move.result, scenarios);
        if (open.empty()) break;
        const std::size_t i = open[rng.below(open.size())];
        const auto slots = free_slots(move.result, scenarios, i);
        const Slot slot = slots[rng.below(slots.size())];
        move.result.insert(sign_at(scenarios[i], slot.position));
      }
      break;
    case SignMoveKind::Remove:
      for (std::size_t n = 0; n < amount && !move.result.empty(); ++n) {
        const auto entries = move.result.entries();
        const Sign& victim = entries[rng.below(entries.size())];
        move.result.erase(victim.node, victim.destination);
      }
      break;
    case SignMoveKind::Relocate: {
      const auto options = relocatable(move.result, scenarios);
      const auto& [entry, i] = options[rng.below(options.size())];
      const auto slots = free_slots(move.result, scenarios, i);
      const Slot slot = slots[rng.below(slots.size())];
      move.result.erase(entry.node, entry.destination);
      move.result.insert(sign_at(scenarios[i], slot.position));
      break;
    }
  }
  return move;
}

RefineResult refine_signs(const Simulator& sim, std::span<const RoutedScenario> scenarios,
                          const SignWeights& weights, const AnnealSchedule& schedule,
                          const ProgressFn& progress) {
  weights.validate();
  schedule.validate();

  RefineResult result;
  result.initial = full_placement(scenarios);
  Rng rng(schedule.seed);

  SignPlacement current = result.initial;
  SignCosts current_costs = sign_costs(sim, current, scenarios, weights, rng.next_u64());
  double current_cost = current_costs.total(weights);
  if (!std::isfinite(current_cost)) {
    throw Error(ErrorCode::Infeasible,
                "full sign placement fails " + std::to_string(current_costs.failure_rate * 100.0) +
                    "% of agents, above the tolerance; agent parameters are too hostile");
  }
  result.placement = current;
  result.costs = current_costs;
  result.cost = current_cost;
  result.trace.push_back({0, schedule.t_initial, current_cost, current_cost});

  StopRule stop(schedule.stop_window, schedule.stop_rel_change);
  for (std::size_t it = 1; it <= schedule.max_iters; ++it) {
    const double t = schedule.temperature(it - 1);
    auto move = propose_sign_move(current, scenarios, rng);
    SignCosts costs = current_costs;
    if (!(move.result == current)) {
      costs = sign_costs(sim, move.result, scenarios, weights, rng.next_u64());
    }
    const double cost = costs.total(weights);
    if (metropolis_accept(current_cost, cost, t, rng)) {
      current = std::move(move.result);
      current_costs = costs;
      current_cost = cost;
      if (current_cost < result.cost) {
        result.placement = current;
        result.costs = current_costs;
        result.cost = current_cost;
      }
    }
    result.trace.push_back({it, t, current_cost, result.cost});
    if (progress && it % 10 == 0) progress(it, result.cost);
    if (schedule.cold(it - 1) && stop.update(result.cost)) break;
  }
  if (progress) progress(result.trace.back().iteration, result.cost);
  return result;
}

}  // namespace wayfind
