#pragma once

#include <span>

#include "plgrim/geometry.hpp"

namespace plgrim::reward {

struct RewardWeights {
  double k_info = 1.0;    // weight of information gain in the reward
  double k_cost = 0.2;    // weight of action cost in the reward
  double k_dist = 1.0;    // traversal distance term of the cost
  double k_risk = 5.0;    // edge risk term of the cost
  double k_motion = 0.3;  // motion-primitive (heading change) term of the cost
  double gamma = 0.95;    // discount for future rewards

  void validate() const;
};

// Coverage entropy in bits over a set of node coverage probabilities:
//   H = -sum_i [ p_i log2 p_i + (1-p_i) log2 (1-p_i) ],  0*log 0 = 0.
double coverage_entropy(std::span<const double> p_covered);

// Entropy reduction in bits from covering the given footprint (every node
// set to p = 1): equals the footprint's current entropy, and is always >= 0.
double info_gain(std::span<const double> footprint_probs);

// C = k_d * d + k_rho * rho + k_mu * mu, with mu the normalized heading
// change in [0, 1] (0 = straight, 1 = reversal).
double action_cost(double d_m, double rho, double heading_change, const RewardWeights& w);

// R = k_I * I - k_C * C.
double step_reward(double info_gain_bits, double cost, const RewardWeights& w);

}  // namespace plgrim::reward
