#include "plgrim/reward.hpp"

#include <stdexcept>

#include "plgrim/kernels.hpp"

namespace plgrim::reward {

void RewardWeights::validate() const {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must lie in (0,1]");
  if (k_info < 0.0 || k_cost < 0.0 || k_dist < 0.0 || k_risk < 0.0 || k_motion < 0.0) {
    throw std::invalid_argument("reward weights must be non-negative");
  }
}

double coverage_entropy(std::span<const double> p_covered) {
  return kernels::binary_entropy_sum(p_covered);
}

double info_gain(std::span<const double> footprint_probs) {
  // H(current) - H(after covering) collapses to the footprint entropy since
  // every footprint term becomes zero.
  return kernels::binary_entropy_sum(footprint_probs);
}

double action_cost(double d_m, double rho, double heading_change, const RewardWeights& w) {
  return w.k_dist * d_m + w.k_risk * rho + w.k_motion * heading_change;
}

double step_reward(double info_gain_bits, double cost, const RewardWeights& w) {
  return w.k_info * info_gain_bits - w.k_cost * cost;
}

}  // namespace plgrim::reward
