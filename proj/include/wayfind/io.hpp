#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wayfind/accessibility.hpp"
#include "wayfind/agent_sim.hpp"
#include "wayfind/config.hpp"
#include "wayfind/graph.hpp"
#include "wayfind/placement.hpp"
#include "wayfind/scheme.hpp"

// JSON and CSV formats. Every serializer is deterministic: equal inputs give
// byte-identical text.
namespace wayfind::io {

struct Layout {
  LayoutGraph graph;
  std::vector<NavScenario> scenarios;
  bool default_scenarios = false;  // no scenarios were authored
};

// Throws Error{Parse} with line/column context for malformed JSON and
// Error{Validation} naming the offending key or element.
Layout parse_layout(std::string_view text);
std::string serialize_layout(const Layout& layout);

ProjectConfig parse_config(std::string_view text);
std::string serialize_config(const ProjectConfig& config);

std::string serialize_scheme(const LayoutGraph& g, const WayfindingScheme& scheme,
                             const SchemeCosts* costs = nullptr, const SchemeWeights* weights = nullptr);
WayfindingScheme parse_scheme(const LayoutGraph& g, std::string_view text);

// Compass bearing in degrees, clockwise from +y.
double bearing_degrees(Point from, Point to);

std::string serialize_placement(const LayoutGraph& g, const SignPlacement& signs);
SignPlacement parse_placement(const LayoutGraph& g, std::string_view text);

std::string serialize_field(const AccessibilityField& field);
AccessibilityField parse_field(std::string_view text);

std::string trace_csv(std::span<const TraceRow> trace);
std::string trajectories_csv(const LayoutGraph& g, std::span<const AgentRecord> records);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

}  // namespace wayfind::io
