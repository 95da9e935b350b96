#include "dpsize/mcem.hpp"

namespace dpsize {

EmConfig EmConfig::stochastic(std::int64_t outer_iterations) {
  EmConfig c;
  c.outer_iterations = outer_iterations;
  c.m = 1;
  c.thinning = 1;
  c.e_burn_in = 0;
  c.warm_start = true;
  c.tol = 0.0;
  return c;
}

void EmConfig::validate() const {
  if (outer_iterations < 1 || m < 1 || thinning < 1 || e_burn_in < 0) {
    throw Error(ErrorKind::kInvalidConfig,
                "need outer_iterations, m, thinning >= 1 and e_burn_in >= 0");
  }
  if (!(schedule.tau0 > 0.0) || schedule.kappa < 0.0) {
    throw Error(ErrorKind::kInvalidConfig, "learning rate must be positive");
  }
  if (tol < 0.0) throw Error(ErrorKind::kInvalidConfig, "tol must be >= 0");
  if (!(burn_in_fraction >= 0.0 && burn_in_fraction < 1.0)) {
    throw Error(ErrorKind::kInvalidConfig, "burn_in_fraction must lie in [0, 1)");
  }
  if (t_refresh_period < 1) {
    throw Error(ErrorKind::kInvalidConfig, "t_refresh_period must be >= 1");
  }
}

}  // namespace dpsize
