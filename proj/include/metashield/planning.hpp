#pragma once

#include <optional>

#include "metashield/estimation.hpp"
#include "metashield/mdp.hpp"

namespace metashield {

struct PlanningOptions {
  // The recursions carry a discount factor; the setting is finite-horizon,
  // so 1 is the default.
  double gamma = 1.0;
  // Clip every stage's Q values into [0, H]. True values live in [0, H-1];
  // unclipped optimistic values can blow up early, so clipping is the
  // standard choice. Disable for fidelity experiments.
  bool clip_values = true;
  // When set, overrides b(s, a) with a constant. bonus_override = 0 turns
  // the planners into plain value iteration on the supplied model.
  std::optional<double> bonus_override;
};

struct PlannerOutput {
  QTable q;
  ValueTable v;
  DeterministicPolicy policy;
};

struct EvalOutput {
  QTable q;
  ValueTable v;
};

/// UCBVI-style optimistic planning:
///   Q[t] = (R^ + b) + gamma * P^ V[t+1],  V[t][s] = max_a Q[t][s][a],
/// greedy policy with lowest-index tie-break, terminal slice zero.
PlannerOutput optimistic_plan(const EmpiricalModel& model, const Counts& counts,
                              const BonusParams& params,
                              const PlanningOptions& options = {});

/// Identical recursion with the bonus subtracted; yields the pessimistic
/// baseline policy and the lower bound on its Q values.
PlannerOutput conservative_plan(const EmpiricalModel& model, const Counts& counts,
                                const BonusParams& params,
                                const PlanningOptions& options = {});

/// Bonus-added value iteration for policy evaluation: the upper bound on
/// the supplied policy's value.
EvalOutput optimistic_eval(const EmpiricalModel& model, const Counts& counts,
                           const BonusParams& params, const DeterministicPolicy& policy,
                           const PlanningOptions& options = {});

}  // namespace metashield
