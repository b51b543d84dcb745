#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "metashield/mdp.hpp"
#include "metashield/rng.hpp"

namespace metashield {

/// Single-product stochastic inventory control. States are stock levels
/// {0..M}, actions are order quantities {0..M} (clamped to the free
/// capacity M - s), demand is uniform on {0..demand_max}. Raw rewards
///   r = -O(a) - h*(s+a) + f*sold,  O(u) = K + c*u for u > 0 else 0,
/// are mapped affinely onto [0,1] using the exact min/max over all
/// reachable (s, a, demand) triples.
struct InventoryParams {
  int capacity = 5;            // M
  double fixed_order_cost = 2; // K
  double unit_order_cost = 2;  // c
  double holding_cost = 1;     // h, per unit held after ordering
  double revenue_per_unit = 8; // f
  int demand_max = 5;          // demand uniform on {0..demand_max}
  int horizon = 20;
  int initial_state = 0;
};

/// Expected-reward formulation: R[s][a] is the demand-expectation of the
/// normalized reward, so the simulated per-step reward is deterministic
/// given (s, a); randomness enters through the next state only.
TabularMdp build_inventory_mdp(const InventoryParams& params = {});

/// Raw (unnormalized) single-outcome reward; exposed for tests.
double inventory_raw_reward(const InventoryParams& params, int stock, int order,
                            int demand);

/// Exact raw-reward range over all reachable (s, clamped a, demand).
struct RewardRange {
  double lo = 0.0;
  double hi = 0.0;
};
RewardRange inventory_reward_range(const InventoryParams& params);

struct RandomMdpParams {
  int num_states = 5;
  int num_actions = 2;
  int horizon = 20;
  double min_transition_prob = 0.02;  // requires S * floor <= 1
  std::uint64_t seed = 0;
  // Raw Dirichlet rows clear the hitting-time gate only occasionally, so
  // the retry budget is generous; a rejected attempt costs well under a
  // millisecond.
  int max_build_attempts = 2000;
};

/// Dirichlet(1,...,1) transition rows floored at min_transition_prob and
/// renormalized; rewards uniform in [0,1]. Retries with a derived seed
/// until every target's worst-case expected hitting time is <= H/2, then
/// throws when the attempt budget runs out.
TabularMdp build_random_ergodic_mdp(const RandomMdpParams& params);

/// Episodes generated under the uniform-random policy, for pre-loading the
/// estimator before online learning.
std::vector<Rollout> warm_start_dataset(const TabularMdp& mdp, long long n_episodes,
                                        Rng& rng);

}  // namespace metashield
