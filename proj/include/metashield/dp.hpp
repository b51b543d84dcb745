#pragma once

#include <functional>
#include <optional>

#include "metashield/mdp.hpp"
#include "metashield/rng.hpp"

namespace metashield {

struct PolicyEvalResult {
  ValueTable v;
  QTable q;
};

struct OptimalResult {
  ValueTable v;
  QTable q;
  DeterministicPolicy policy;
};

/// Exact backward-induction evaluation of a policy on the true model:
/// Q[t] = R + P V[t+1], V[t][s] = Q[t][s][pi(t,s)], with V[H-1] = Q[H-1] = 0.
PolicyEvalResult exact_policy_eval(const TabularMdp& mdp,
                                   const DeterministicPolicy& policy);

/// Bellman-optimal tables under the same terminal convention. Argmax ties
/// break toward the lowest action index.
OptimalResult exact_optimal(const TabularMdp& mdp);

/// Action callback: (t, s) -> action.
using ActionFn = std::function<int(int t, int s)>;

/// Simulates H steps from the initial state. Deterministic given the rng
/// state. Throws std::invalid_argument when the callback returns an
/// out-of-range action.
Rollout sample_rollout(const TabularMdp& mdp, const ActionFn& act, Rng& rng);

/// Worst-case expected hitting time of `target` over all deterministic
/// policies, maximized over start states != target. Computed by value
/// iteration on U(x) = 1 + max_a sum_y P(y|x,a) U(y), U(target) = 0.
/// Returns nullopt ("unbounded") when the iteration fails to converge
/// within max_iterations, i.e. some policy never reaches the target.
std::optional<double> max_expected_hitting_time(const TabularMdp& mdp, int target,
                                                int max_iterations = 10000);

/// max over t < H-1, s, a of V^pi[t][s] - Q^pi[t][s][a]; always >= 0.
/// Assumption-2 style budgets need eta >= 2 * policy_gap.
double policy_gap(const TabularMdp& mdp, const DeterministicPolicy& policy);

}  // namespace metashield
