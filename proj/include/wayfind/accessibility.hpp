#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "wayfind/agent_sim.hpp"
#include "wayfind/graph.hpp"
#include "wayfind/placement.hpp"

namespace wayfind {

struct AccessibilitySample {
  Point position;
  std::string node;  // id in the sampled graph
  double rate = 0.0;

  friend bool operator==(const AccessibilitySample&, const AccessibilitySample&) = default;
};

struct AccessibilityField {
  std::string destination;
  double interval = 0.0;
  std::vector<AccessibilitySample> samples;
  // Pairs of sample indices joined by a road segment.
  std::vector<std::pair<std::size_t, std::size_t>> segments;

  friend bool operator==(const AccessibilityField&, const AccessibilityField&) = default;
};

struct FieldSummary {
  double min = 0.0;
  double mean = 0.0;
  double max = 0.0;
  std::size_t blind = 0;  // samples strictly below the threshold
};

FieldSummary summarize(const AccessibilityField& field, double blind_threshold = 0.5);

// Samples the placement graph every `interval` metres and runs agents from
// each sample. Agents from a sample get budget stretch_factor x (shortest
// distance to the destination); agent j at sample i uses stream
// derive_seed(seed, i, j).
class AccessibilityAnalyzer {
 public:
  AccessibilityAnalyzer(const LayoutGraph& placement_graph, const AgentParams& params, double interval);

  const LayoutGraph& sampled_graph() const noexcept { return sub_->graph; }
  double interval() const noexcept { return interval_; }

  AccessibilityField compute(const SignPlacement& signs, NodeIndex destination, std::uint64_t seed) const;

  // Recomputes only the samples whose agents could come within sight of a
  // node in `changed` before exhausting their budget; equal to compute() at
  // every sample. Indices of recomputed samples go to `recomputed`.
  AccessibilityField update(const AccessibilityField& field, const SignPlacement& signs,
                            NodeIndex destination, std::span<const NodeIndex> changed,
                            std::uint64_t seed, std::vector<std::size_t>* recomputed = nullptr) const;

 private:
  double sample_rate(std::span<const NodeIndex> arrows, NodeIndex sample, NodeIndex destination,
                     std::span<const double> dist, std::uint64_t seed) const;
  std::vector<NodeIndex> sampled_arrows(const SignPlacement& signs, NodeIndex destination) const;
  AccessibilityField skeleton(NodeIndex destination) const;

  const LayoutGraph* placement_graph_;
  double interval_;
  std::unique_ptr<Subdivision> sub_;
  std::unique_ptr<Simulator> sim_;
};

AccessibilityField compute_field(const LayoutGraph& placement_graph, const SignPlacement& signs,
                                 NodeIndex destination, const AgentParams& params, double interval,
                                 std::uint64_t seed);

// Rate at `point`: linear along the segment under the point, otherwise the
// nearest sample. Throws InvalidArgument outside the sample bounding box.
double interpolate(const AccessibilityField& field, Point point);

struct BlindZoneFix {
  SignPlacement placement;
  std::vector<Sign> added;
  NodeIndex snapped = 0;
};

// Snaps `point` to the nearest node and adds signs along the shortest
// connector from there to the nearest node of a scheme path toward
// `destination`: one per decision node (the clicked node and every node of
// degree >= 3), each pointing to its successor. Throws NotFound when no
// scenario leads to `destination`, InvalidArgument for a point outside the
// layout.
BlindZoneFix fix_blind_zone(const LayoutGraph& placement_graph, const SignPlacement& signs,
                            NodeIndex destination, Point point,
                            std::span<const RoutedScenario> scenarios);

}  // namespace wayfind
