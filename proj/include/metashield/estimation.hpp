#pragma once

#include <string>
#include <vector>

#include "metashield/mdp.hpp"

namespace metashield {

/// Sufficient statistics of observed transitions.
struct Counts {
  int num_states = 0;
  int num_actions = 0;
  std::vector<long long> visits;       // [s][a]
  std::vector<long long> next_counts;  // [s][a][s']
  std::vector<double> reward_sum;      // [s][a]

  Counts() = default;
  Counts(int num_states, int num_actions);

  long long n(int s, int a) const {
    return visits[static_cast<std::size_t>(s) * num_actions + a];
  }
  long long n_next(int s, int a, int s2) const {
    return next_counts[(static_cast<std::size_t>(s) * num_actions + a) * num_states + s2];
  }
  double r_sum(int s, int a) const {
    return reward_sum[static_cast<std::size_t>(s) * num_actions + a];
  }

  void update(const Transition& step);
  void update(const Rollout& rollout);
  long long total_steps() const;

  /// Checkpoint format for long experiments.
  std::string to_json(int indent = -1) const;
  static Counts from_json(const std::string& text);
};

struct EmpiricalModel {
  int num_states = 0;
  int num_actions = 0;
  std::vector<double> p_hat;  // [s][a][s']
  std::vector<double> r_hat;  // [s][a]

  double p(int s, int a, int s2) const {
    return p_hat[(static_cast<std::size_t>(s) * num_actions + a) * num_states + s2];
  }
  double r(int s, int a) const {
    return r_hat[static_cast<std::size_t>(s) * num_actions + a];
  }
};

/// Sample-average model. Pairs with no data get a uniform next-state
/// distribution and zero reward so planning is well-defined before any
/// warm start.
EmpiricalModel empirical_model(const Counts& counts);

/// The true model viewed as an EmpiricalModel, for bonus-free planner
/// reduction checks.
EmpiricalModel exact_model(const TabularMdp& mdp);

struct BonusParams {
  int num_states = 0;
  int num_actions = 0;
  int horizon = 0;
  double delta = 0.1;
  // Total episode count planned for the experiment; stands in for the
  // realized episode sum, which is unknown when the bonus is first used.
  long long planned_total_episodes = 1;
};

/// L = ln(5 * S * A * H * planned_total_episodes / delta).
double log_term(const BonusParams& params);

/// b = 4 H sqrt(S * L / max{1, n}) for a given log term.
double bonus_value(double log_term_value, long long n, const BonusParams& params);

/// b(s, a; N) with L computed from params.
double bonus(int s, int a, const Counts& counts, const BonusParams& params);

}  // namespace metashield
