#include "metashield/envs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "metashield/dp.hpp"

namespace metashield {

namespace {

void check_inventory_params(const InventoryParams& p) {
  if (p.capacity < 1) throw std::invalid_argument("inventory: capacity must be >= 1");
  if (p.demand_max < 1) throw std::invalid_argument("inventory: demand_max must be >= 1");
  if (p.horizon < 2) throw std::invalid_argument("inventory: horizon must be >= 2");
  if (p.fixed_order_cost < 0 || p.unit_order_cost < 0 || p.holding_cost < 0 ||
      p.revenue_per_unit < 0) {
    throw std::invalid_argument("inventory: costs and revenue must be >= 0");
  }
  if (p.initial_state < 0 || p.initial_state > p.capacity) {
    throw std::invalid_argument("inventory: initial state out of range");
  }
}

}  // namespace

double inventory_raw_reward(const InventoryParams& p, int stock, int order,
                            int demand) {
  const int order_eff = std::min(order, p.capacity - stock);
  const int post_order = stock + order_eff;
  const int next = std::max(0, post_order - demand);
  const int sold = post_order - next;
  const double order_cost =
      order_eff > 0 ? p.fixed_order_cost + p.unit_order_cost * order_eff : 0.0;
  return -order_cost - p.holding_cost * post_order + p.revenue_per_unit * sold;
}

RewardRange inventory_reward_range(const InventoryParams& p) {
  // Exact enumeration over the finite reachable lattice; bit-stable and
  // valid for any parameter signs, unlike corner-case algebra.
  RewardRange range{std::numeric_limits<double>::infinity(),
                    -std::numeric_limits<double>::infinity()};
  for (int s = 0; s <= p.capacity; ++s) {
    for (int a = 0; a <= p.capacity; ++a) {
      for (int d = 0; d <= p.demand_max; ++d) {
        const double r = inventory_raw_reward(p, s, a, d);
        range.lo = std::min(range.lo, r);
        range.hi = std::max(range.hi, r);
      }
    }
  }
  return range;
}

TabularMdp build_inventory_mdp(const InventoryParams& p) {
  check_inventory_params(p);
  const int S = p.capacity + 1;
  const int A = p.capacity + 1;
  const double d_prob = 1.0 / (p.demand_max + 1);
  const RewardRange range = inventory_reward_range(p);
  const double width = range.hi - range.lo;

  TabularMdp mdp = TabularMdp::zeros(S, A, p.horizon, p.initial_state);
  for (int s = 0; s < S; ++s) {
    for (int a = 0; a < A; ++a) {
      const int order_eff = std::min(a, p.capacity - s);
      const int post_order = s + order_eff;
      double expected_reward = 0.0;
      for (int d = 0; d <= p.demand_max; ++d) {
        const int next = std::max(0, post_order - d);
        const double raw = inventory_raw_reward(p, s, a, d);
        const double normalized = width > 0.0 ? (raw - range.lo) / width : 0.0;
        expected_reward += d_prob * normalized;
        mdp.p(s, a, next) += d_prob;
      }
      mdp.r(s, a) = expected_reward;
    }
  }
  mdp.validate();
  return mdp;
}

TabularMdp build_random_ergodic_mdp(const RandomMdpParams& p) {
  if (p.num_states < 1 || p.num_actions < 1 || p.horizon < 2) {
    throw std::invalid_argument("random mdp: dimensions out of range");
  }
  if (p.min_transition_prob < 0.0 || p.min_transition_prob * p.num_states > 1.0) {
    throw std::invalid_argument("random mdp: need 0 <= min_transition_prob * S <= 1");
  }
  const int S = p.num_states, A = p.num_actions;
  for (int attempt = 0; attempt < p.max_build_attempts; ++attempt) {
    Rng rng(mix_seed(p.seed, static_cast<std::uint64_t>(attempt)));
    TabularMdp mdp = TabularMdp::zeros(S, A, p.horizon, 0);
    for (int s = 0; s < S; ++s) {
      for (int a = 0; a < A; ++a) {
        // Dirichlet(1,...,1) row via normalized exponentials.
        double total = 0.0;
        std::vector<double> row(S);
        for (int s2 = 0; s2 < S; ++s2) {
          row[s2] = -std::log(1.0 - rng.uniform());
          total += row[s2];
        }
        double floored_total = 0.0;
        for (int s2 = 0; s2 < S; ++s2) {
          row[s2] = std::max(row[s2] / total, p.min_transition_prob);
          floored_total += row[s2];
        }
        for (int s2 = 0; s2 < S; ++s2) mdp.p(s, a, s2) = row[s2] / floored_total;
      }
    }
    for (int s = 0; s < S; ++s) {
      for (int a = 0; a < A; ++a) mdp.r(s, a) = rng.uniform();
    }
    mdp.validate();

    bool ergodic = true;
    for (int target = 0; target < S && ergodic; ++target) {
      const auto hit = max_expected_hitting_time(mdp, target);
      if (!hit || *hit > p.horizon / 2.0) ergodic = false;
    }
    if (ergodic) return mdp;
  }
  throw std::runtime_error(
      "build_random_ergodic_mdp: could not satisfy the hitting-time bound within "
      "the attempt budget; raise min_transition_prob or the horizon");
}

std::vector<Rollout> warm_start_dataset(const TabularMdp& mdp, long long n_episodes,
                                        Rng& rng) {
  if (n_episodes < 0) throw std::invalid_argument("warm_start_dataset: n_episodes < 0");
  std::vector<Rollout> rollouts;
  rollouts.reserve(static_cast<std::size_t>(n_episodes));
  const int A = mdp.num_actions;
  for (long long k = 0; k < n_episodes; ++k) {
    // action draw happens inside the callback so the stream interleaves
    // with transition draws deterministically
    Rollout r = sample_rollout(
        mdp, [&](int, int) { return rng.uniform_int(A); }, rng);
    r.episode_index = k;
    rollouts.push_back(std::move(r));
  }
  return rollouts;
}

}  // namespace metashield
