#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

#include "wayfind/agent_sim.hpp"
#include "wayfind/anneal.hpp"
#include "wayfind/kshortest.hpp"
#include "wayfind/scheme.hpp"
#include "wayfind/signs.hpp"

namespace wayfind {

struct ProjectConfig {
  SchemeWeights scheme_weights;
  AnnealSchedule scheme_schedule;
  double stretch = kDefaultStretch;
  std::size_t k_cap = kDefaultCandidateCap;

  SignWeights sign_weights;
  AnnealSchedule sign_schedule = default_sign_schedule();
  double subdivision = 50.0;  // longest road segment without an extra sign location

  AgentParams agents;
  std::optional<double> heatmap_interval;  // defaults to subdivision / 2

  std::uint64_t seed = 1;

  double interval() const { return heatmap_interval.value_or(subdivision / 2.0); }
  // Seeds every stage from `seed`.
  ProjectConfig with_seed(std::uint64_t s) const;
  void validate() const;
};

}  // namespace wayfind
