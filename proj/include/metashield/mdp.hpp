#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace metashield {

/// Finite-horizon tabular MDP with time-homogeneous dynamics.
///
/// Terminal convention: value tables satisfy V[H-1] = Q[H-1] = 0, so the
/// final step of an episode contributes no value. An H-step rollout
/// therefore accrues return from its first H-1 rewards only. This follows
/// the Q_H = 0 convention of the planning recursions and surprises most
/// users at least once; see episode_return().
struct TabularMdp {
  int num_states = 0;
  int num_actions = 0;
  int horizon = 0;
  int initial_state = 0;
  std::vector<double> transition;  // [s][a][s'], row-major
  std::vector<double> reward;      // [s][a], values in [0, 1]

  double p(int s, int a, int s2) const {
    return transition[(static_cast<std::size_t>(s) * num_actions + a) * num_states + s2];
  }
  double& p(int s, int a, int s2) {
    return transition[(static_cast<std::size_t>(s) * num_actions + a) * num_states + s2];
  }
  double r(int s, int a) const {
    return reward[static_cast<std::size_t>(s) * num_actions + a];
  }
  double& r(int s, int a) {
    return reward[static_cast<std::size_t>(s) * num_actions + a];
  }

  static TabularMdp zeros(int num_states, int num_actions, int horizon,
                          int initial_state = 0);

  /// Throws std::invalid_argument if rows do not sum to 1 (tol 1e-9),
  /// probabilities are negative, rewards leave [0,1], H < 2, or the
  /// initial state is out of range.
  void validate() const;

  /// JSON document {"S":..,"A":..,"H":..,"s1":..,"P":[[[..]]],"R":[[..]]}.
  std::string to_json(int indent = -1) const;
  static TabularMdp from_json(const std::string& text);
};

/// Time-indexed deterministic action map; t in [0,H), s in [0,S).
struct DeterministicPolicy {
  int horizon = 0;
  int num_states = 0;
  std::vector<int> actions;  // [t][s]

  int action(int t, int s) const {
    return actions[static_cast<std::size_t>(t) * num_states + s];
  }
  int& action(int t, int s) {
    return actions[static_cast<std::size_t>(t) * num_states + s];
  }

  static DeterministicPolicy constant(int horizon, int num_states, int a = 0);
  bool valid_for(const TabularMdp& mdp) const;
};

struct ValueTable {
  int horizon = 0;
  int num_states = 0;
  std::vector<double> values;  // [t][s]

  double at(int t, int s) const {
    return values[static_cast<std::size_t>(t) * num_states + s];
  }
  double& at(int t, int s) {
    return values[static_cast<std::size_t>(t) * num_states + s];
  }
  static ValueTable zeros(int horizon, int num_states);
};

struct QTable {
  int horizon = 0;
  int num_states = 0;
  int num_actions = 0;
  std::vector<double> values;  // [t][s][a]

  double at(int t, int s, int a) const {
    return values[(static_cast<std::size_t>(t) * num_states + s) * num_actions + a];
  }
  double& at(int t, int s, int a) {
    return values[(static_cast<std::size_t>(t) * num_states + s) * num_actions + a];
  }
  static QTable zeros(int horizon, int num_states, int num_actions);
};

/// One simulated step. s_next is recorded for every step including the
/// last one; the meta-episode controller needs the post-step state as the
/// next target when the budget runs out at t = H-1.
struct Transition {
  int t = 0;
  int s = 0;
  int a = 0;
  double r = 0.0;
  int s_next = 0;
};

/// Per-step shield annotations. target == kNoTarget means "cleared".
struct StepAnnotation {
  bool used_ucb = false;
  double zeta = 0.0;  // tracked deficit through this step
  int target = -1;
};

inline constexpr int kNoTarget = -1;

struct Rollout {
  long long episode_index = 0;
  std::vector<Transition> steps;
  std::vector<StepAnnotation> annotations;  // empty, or one per step

  /// Sum of the first H-1 rewards (the last step is rewardless under the
  /// terminal convention), i.e. the quantity comparable to V_1(s_1).
  double episode_return() const;

  /// True when consecutive steps chain: steps[t].s_next == steps[t+1].s.
  bool chained() const;
};

}  // namespace metashield
