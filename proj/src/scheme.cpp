#include "wayfind/scheme.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

#include "wayfind/error.hpp"

namespace wayfind {

namespace {

double sum_over_paths(const WayfindingScheme& scheme, const std::function<double(const Path&)>& f) {
  double total = 0.0;
  for (std::size_t i = 0; i < scheme.size(); ++i) total += scheme.scenarios[i].importance * f(scheme.path(i));
  return total;
}

// Candidate statistics precomputed once per optimization.
struct PathStats {
  double length = 0.0;
  double nodes = 0.0;
  double angle = 0.0;
  std::vector<EdgeIndex> edges;
};

PathStats stats_of(const LayoutGraph& g, const Path& p) {
  PathStats s;
  s.length = p.length;
  s.nodes = static_cast<double>(p.nodes.size());
  s.angle = path_turning_angle(g, p);
  for (std::size_t i = 1; i < p.nodes.size(); ++i) {
    auto e = g.edge_between(p.nodes[i - 1], p.nodes[i]);
    if (!e) throw Error(ErrorCode::Validation, "path uses a missing edge");
    s.edges.push_back(*e);
  }
  return s;
}

class CostModel {
 public:
  CostModel(const LayoutGraph& g, const WayfindingScheme& scheme)
      : graph_(g),
        scheme_(scheme),
        edge_mark_(g.edge_count(), 0),
        node_mark_(g.node_count(), 0),
        total_length_(total_edge_length(g)),
        node_count_(static_cast<double>(g.node_count())) {
    stats_.resize(scheme.size());
    for (std::size_t i = 0; i < scheme.size(); ++i) {
      for (const auto& p : scheme.candidates[i]) stats_[i].push_back(stats_of(g, p));
    }
  }

  SchemeCosts costs(std::span<const std::size_t> choice) {
    SchemeCosts c;
    const std::size_t n = choice.size();
    if (n == 0) return c;
    ++stamp_;
    double union_length = 0.0;
    double union_nodes = 0.0;
    double sum_length = 0.0;
    double sum_nodes = 0.0;
    double sum_angle = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const PathStats& s = stats_[i][choice[i]];
      const double kappa = scheme_.scenarios[i].importance;
      sum_length += kappa * s.length;
      sum_nodes += kappa * s.nodes;
      sum_angle += kappa * s.angle;
      for (EdgeIndex e : s.edges) {
        if (edge_mark_[e] != stamp_) {
          edge_mark_[e] = stamp_;
          union_length += graph_.edge(e).length;
        }
      }
      for (NodeIndex v : scheme_.candidates[i][choice[i]].nodes) {
        if (node_mark_[v] != stamp_) {
          node_mark_[v] = stamp_;
          union_nodes += 1.0;
        }
      }
    }
    const double pairs = static_cast<double>(n);
    c.local_length = sum_length / (pairs * total_length_);
    c.local_node = sum_nodes / (pairs * node_count_);
    c.local_angle = sum_angle / (pairs * node_count_ * std::numbers::pi);
    c.global_length = union_length / total_length_;
    c.global_node = union_nodes / node_count_;
    return c;
  }

 private:
  const LayoutGraph& graph_;
  const WayfindingScheme& scheme_;
  std::vector<std::vector<PathStats>> stats_;
  std::vector<std::uint64_t> edge_mark_;
  std::vector<std::uint64_t> node_mark_;
  std::uint64_t stamp_ = 0;
  double total_length_;
  double node_count_;
};

}  // namespace

void SchemeWeights::validate() const {
  for (double w : {local_length, local_node, local_angle, global_length, global_node}) {
    if (!(w >= 0.0) || !std::isfinite(w))
      throw Error(ErrorCode::InvalidArgument, "scheme weights must be finite and non-negative");
  }
}

WayfindingScheme WayfindingScheme::from_paths(std::vector<NavScenario> scenarios,
                                              std::vector<Path> paths) {
  if (scenarios.size() != paths.size())
    throw Error(ErrorCode::InvalidArgument, "one path per scenario required");
  WayfindingScheme s;
  s.scenarios = std::move(scenarios);
  for (auto& p : paths) s.candidates.push_back({std::move(p)});
  s.choice.assign(s.scenarios.size(), 0);
  return s;
}

double path_turning_angle(const LayoutGraph& g, const Path& p) {
  double total = 0.0;
  for (std::size_t i = 1; i + 1 < p.nodes.size(); ++i) {
    const Point a = g.node(p.nodes[i - 1]).position;
    const Point b = g.node(p.nodes[i]).position;
    const Point c = g.node(p.nodes[i + 1]).position;
    const double ux = b.x - a.x, uy = b.y - a.y;
    const double vx = c.x - b.x, vy = c.y - b.y;
    const double cross = ux * vy - uy * vx;
    const double dot = ux * vx + uy * vy;
    if (cross == 0.0 && dot == 0.0) continue;  // coincident positions
    total += std::abs(std::atan2(cross, dot));
  }
  return total;
}

double cost_local_length(const LayoutGraph& g, const WayfindingScheme& scheme) {
  if (scheme.size() == 0) return 0.0;
  return sum_over_paths(scheme, [](const Path& p) { return p.length; }) /
         (static_cast<double>(scheme.size()) * total_edge_length(g));
}

double cost_local_node(const LayoutGraph& g, const WayfindingScheme& scheme) {
  if (scheme.size() == 0) return 0.0;
  return sum_over_paths(scheme, [](const Path& p) { return static_cast<double>(p.nodes.size()); }) /
         (static_cast<double>(scheme.size()) * static_cast<double>(g.node_count()));
}

double cost_local_angle(const LayoutGraph& g, const WayfindingScheme& scheme) {
  if (scheme.size() == 0) return 0.0;
  return sum_over_paths(scheme, [&](const Path& p) { return path_turning_angle(g, p); }) /
         (static_cast<double>(scheme.size()) * static_cast<double>(g.node_count()) *
          std::numbers::pi);
}

double cost_global_length(const LayoutGraph& g, const WayfindingScheme& scheme) {
  std::vector<char> used(g.edge_count(), 0);
  double total = 0.0;
  for (std::size_t i = 0; i < scheme.size(); ++i) {
    const auto& nodes = scheme.path(i).nodes;
    for (std::size_t j = 1; j < nodes.size(); ++j) {
      auto e = g.edge_between(nodes[j - 1], nodes[j]);
      if (e && !used[*e]) {
        used[*e] = 1;
        total += g.edge(*e).length;
      }
    }
  }
  return total / total_edge_length(g);
}

double cost_global_node(const LayoutGraph& g, const WayfindingScheme& scheme) {
  std::vector<char> used(g.node_count(), 0);
  std::size_t count = 0;
  for (std::size_t i = 0; i < scheme.size(); ++i) {
    for (NodeIndex v : scheme.path(i).nodes) {
      if (!used[v]) {
        used[v] = 1;
        ++count;
      }
    }
  }
  return static_cast<double>(count) / static_cast<double>(g.node_count());
}

double SchemeCosts::total(const SchemeWeights& w) const noexcept {
  return w.local_length * local_length + w.local_node * local_node + w.local_angle * local_angle +
         w.global_length * global_length + w.global_node * global_node;
}

SchemeCosts scheme_costs(const LayoutGraph& g, const WayfindingScheme& scheme) {
  CostModel model(g, scheme);
  return model.costs(scheme.choice);
}

double total_scheme_cost(const LayoutGraph& g, const WayfindingScheme& scheme,
                         const SchemeWeights& weights) {
  return scheme_costs(g, scheme).total(weights);
}

std::size_t draw_move_size(std::size_t n, Rng& rng) {
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "move over an empty scheme");
  // Weight of x is n - x + 1; walk the cumulative sum.
  std::uint64_t r = rng.below(n * (n + 1) / 2);
  for (std::size_t x = 1; x <= n; ++x) {
    const std::size_t weight = n - x + 1;
    if (r < weight) return x;
    r -= weight;
  }
  return n;
}

std::vector<std::size_t> propose_move(std::span<const std::size_t> choice,
                                      std::span<const std::size_t> candidate_counts, Rng& rng) {
  const std::size_t n = choice.size();
  std::vector<std::size_t> next(choice.begin(), choice.end());
  const std::size_t x = draw_move_size(n, rng);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t j = 0; j < x; ++j) {
    const std::size_t pick = j + static_cast<std::size_t>(rng.below(n - j));
    std::swap(order[j], order[pick]);
    const std::size_t scenario = order[j];
    if (candidate_counts[scenario] == 0)
      throw Error(ErrorCode::InvalidArgument, "scenario without candidates");
    next[scenario] = static_cast<std::size_t>(rng.below(candidate_counts[scenario]));
  }
  return next;
}

WayfindingScheme propose_move(const WayfindingScheme& scheme, Rng& rng) {
  std::vector<std::size_t> counts;
  for (const auto& c : scheme.candidates) counts.push_back(c.size());
  WayfindingScheme out = scheme;
  out.choice = propose_move(scheme.choice, counts, rng);
  return out;
}

SchemeResult optimize_scheme(const LayoutGraph& g, std::span<const NavScenario> scenarios,
                             const SchemeWeights& weights, const AnnealSchedule& schedule,
                             double stretch, std::size_t k_cap, const ProgressFn& progress) {
  weights.validate();
  schedule.validate();
  if (scenarios.empty()) throw Error(ErrorCode::InvalidArgument, "no scenarios to optimize");
  validate_scenarios(g, scenarios);

  SchemeResult result;
  WayfindingScheme& scheme = result.scheme;
  scheme.scenarios.assign(scenarios.begin(), scenarios.end());
  std::vector<std::size_t> counts;
  double space = 1.0;
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    auto set = adaptive_candidates(g, g.index_of(scenarios[i].source),
                                   g.index_of(scenarios[i].destination), stretch, k_cap);
    if (set.capped) result.capped_scenarios.push_back(i);
    counts.push_back(set.paths.size());
    space *= static_cast<double>(set.paths.size());
    scheme.candidates.push_back(std::move(set.paths));
  }

  Rng rng(schedule.seed);
  std::vector<std::size_t> current(scenarios.size());
  for (std::size_t i = 0; i < current.size(); ++i) current[i] = rng.below(counts[i]);

  CostModel model(g, scheme);
  double current_cost = model.costs(current).total(weights);
  std::vector<std::size_t> best = current;
  double best_cost = current_cost;
  result.initial_cost = current_cost;
  result.trace.push_back({0, schedule.t_initial, current_cost, best_cost});

  if (space > 1.0) {
    StopRule stop(schedule.stop_window, schedule.stop_rel_change);
    for (std::size_t it = 1; it <= schedule.max_iters; ++it) {
      const double t = schedule.temperature(it - 1);
      auto proposal = propose_move(current, counts, rng);
      const double cost = model.costs(proposal).total(weights);
      if (metropolis_accept(current_cost, cost, t, rng)) {
        current = std::move(proposal);
        current_cost = cost;
        if (current_cost < best_cost) {
          best_cost = current_cost;
          best = current;
        }
      }
      result.trace.push_back({it, t, current_cost, best_cost});
      if (progress && it % 1000 == 0) progress(it, best_cost);
      if (schedule.cold(it - 1) && stop.update(best_cost)) break;
    }
  }

  scheme.choice = best;
  result.costs = model.costs(best);
  result.cost = best_cost;
  if (progress) progress(result.trace.back().iteration, best_cost);
  return result;
}

}  // namespace wayfind
