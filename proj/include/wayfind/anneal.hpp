#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>

#include "wayfind/rng.hpp"

namespace wayfind {

struct AnnealSchedule {
  double t_initial = 1.0;
  double cooling = 0.999;
  double t_min = 1e-4;
  std::size_t stop_window = 1000;
  double stop_rel_change = 0.01;
  std::size_t max_iters = 100000;
  std::uint64_t seed = 1;

  // Throws InvalidArgument when a field is out of range.
  void validate() const;

  double temperature(std::size_t iteration) const;
  // True once the temperature has reached its floor; the stop rule only
  // watches cold iterations.
  bool cold(std::size_t iteration) const { return temperature(iteration) <= t_min; }
};

// Metropolis criterion: accept with probability min(1, exp((c_old - c_new) / t)).
// Draws from `rng` only when the move is uphill, so downhill and equal-cost
// proposals never consume randomness.
bool metropolis_accept(double c_old, double c_new, double t, Rng& rng);

// Terminates when the running-best cost improved by less than `rel_change`
// (relative to the best `window` iterations earlier) across `window`
// iterations.
class StopRule {
 public:
  StopRule(std::size_t window, double rel_change) : window_(window), rel_change_(rel_change) {}

  // Records the running best after an iteration; returns true to stop.
  bool update(double best);

 private:
  std::size_t window_;
  double rel_change_;
  std::deque<double> history_;
};

}  // namespace wayfind
