#include "wayfind/anneal.hpp"

#include <algorithm>
#include <cmath>

#include "wayfind/error.hpp"

namespace wayfind {

void AnnealSchedule::validate() const {
  if (!(t_initial > 0.0)) throw Error(ErrorCode::InvalidArgument, "t_initial must be positive");
  if (!(cooling > 0.0 && cooling < 1.0))
    throw Error(ErrorCode::InvalidArgument, "cooling must lie in (0, 1)");
  if (!(t_min > 0.0)) throw Error(ErrorCode::InvalidArgument, "t_min must be positive");
  if (stop_window < 1) throw Error(ErrorCode::InvalidArgument, "stop_window must be at least 1");
  if (!(stop_rel_change >= 0.0))
    throw Error(ErrorCode::InvalidArgument, "stop_rel_change must be non-negative");
}

double AnnealSchedule::temperature(std::size_t iteration) const {
  return std::max(t_min, t_initial * std::pow(cooling, static_cast<double>(iteration)));
}

bool metropolis_accept(double c_old, double c_new, double t, Rng& rng) {
  if (c_new <= c_old) return true;
  if (!std::isfinite(c_new)) return false;
  return rng.uniform() < std::exp((c_old - c_new) / t);
}

bool StopRule::update(double best) {
  history_.push_back(best);
  if (history_.size() <= window_) return false;
  const double before = history_.front();
  history_.pop_front();
  if (!std::isfinite(before)) return false;
  const double scale = std::abs(before);
  const double change = before - best;
  if (scale == 0.0) return change <= 0.0;
  return change / scale < rel_change_;
}

}  // namespace wayfind
