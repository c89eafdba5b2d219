#include "wayfind/config.hpp"

#include <cmath>

#include "wayfind/error.hpp"
#include "wayfind/rng.hpp"

namespace wayfind {

ProjectConfig ProjectConfig::with_seed(std::uint64_t s) const {
  ProjectConfig c = *this;
  c.seed = s;
  c.scheme_schedule.seed = derive_seed(s, 1, 0);
  c.sign_schedule.seed = derive_seed(s, 2, 0);
  return c;
}

void ProjectConfig::validate() const {
  scheme_weights.validate();
  scheme_schedule.validate();
  if (!(stretch >= 0.0) || !std::isfinite(stretch))
    throw Error(ErrorCode::InvalidArgument, "stretch must be finite and non-negative");
  if (k_cap < 1) throw Error(ErrorCode::InvalidArgument, "k_cap must be at least 1");
  sign_weights.validate();
  sign_schedule.validate();
  if (!(subdivision > 0.0) || !std::isfinite(subdivision))
    throw Error(ErrorCode::InvalidArgument, "subdivision must be a positive length");
  agents.validate();
  if (heatmap_interval && (!(*heatmap_interval > 0.0) || !std::isfinite(*heatmap_interval)))
    throw Error(ErrorCode::InvalidArgument, "heatmap interval must be a positive length");
}

}  // namespace wayfind
