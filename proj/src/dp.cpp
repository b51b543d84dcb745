#include "metashield/dp.hpp"

#include <cmath>
#include <stdexcept>

namespace metashield {

PolicyEvalResult exact_policy_eval(const TabularMdp& mdp,
                                   const DeterministicPolicy& policy) {
  if (!policy.valid_for(mdp)) {
    throw std::invalid_argument("exact_policy_eval: policy does not match mdp dimensions");
  }
  const int S = mdp.num_states, A = mdp.num_actions, H = mdp.horizon;
  PolicyEvalResult out{ValueTable::zeros(H, S), QTable::zeros(H, S, A)};
  // slice H-1 stays zero
  for (int t = H - 2; t >= 0; --t) {
    for (int s = 0; s < S; ++s) {
      for (int a = 0; a < A; ++a) {
        double ev = 0.0;
        for (int s2 = 0; s2 < S; ++s2) ev += mdp.p(s, a, s2) * out.v.at(t + 1, s2);
        out.q.at(t, s, a) = mdp.r(s, a) + ev;
      }
      out.v.at(t, s) = out.q.at(t, s, policy.action(t, s));
    }
  }
  return out;
}

OptimalResult exact_optimal(const TabularMdp& mdp) {
  const int S = mdp.num_states, A = mdp.num_actions, H = mdp.horizon;
  OptimalResult out{ValueTable::zeros(H, S), QTable::zeros(H, S, A),
                    DeterministicPolicy::constant(H, S, 0)};
  for (int t = H - 2; t >= 0; --t) {
    for (int s = 0; s < S; ++s) {
      int best_a = 0;
      double best_q = -1.0;
      for (int a = 0; a < A; ++a) {
        double ev = 0.0;
        for (int s2 = 0; s2 < S; ++s2) ev += mdp.p(s, a, s2) * out.v.at(t + 1, s2);
        const double q = mdp.r(s, a) + ev;
        out.q.at(t, s, a) = q;
        if (q > best_q) {  // strict: ties keep the lowest index
          best_q = q;
          best_a = a;
        }
      }
      out.v.at(t, s) = best_q;
      out.policy.action(t, s) = best_a;
    }
  }
  return out;
}

Rollout sample_rollout(const TabularMdp& mdp, const ActionFn& act, Rng& rng) {
  const int S = mdp.num_states, H = mdp.horizon;
  Rollout rollout;
  rollout.steps.reserve(H);
  int s = mdp.initial_state;
  for (int t = 0; t < H; ++t) {
    const int a = act(t, s);
    if (a < 0 || a >= mdp.num_actions) {
      throw std::invalid_argument("sample_rollout: callback returned invalid action");
    }
    const double u = rng.uniform();
    double acc = 0.0;
    int s_next = -1;
    int last_positive = 0;
    for (int s2 = 0; s2 < S; ++s2) {
      const double prob = mdp.p(s, a, s2);
      if (prob <= 0.0) continue;
      last_positive = s2;
      acc += prob;
      if (u < acc) {
        s_next = s2;
        break;
      }
    }
    if (s_next < 0) s_next = last_positive;  // guards rounding at u ~ 1
    rollout.steps.push_back(Transition{t, s, a, mdp.r(s, a), s_next});
    s = s_next;
  }
  return rollout;
}

std::optional<double> max_expected_hitting_time(const TabularMdp& mdp, int target,
                                                int max_iterations) {
  if (target < 0 || target >= mdp.num_states) {
    throw std::invalid_argument("max_expected_hitting_time: target out of range");
  }
  const int S = mdp.num_states, A = mdp.num_actions;
  std::vector<double> u(S, 0.0), u_next(S, 0.0);
  const double tol = 1e-10;
  for (int it = 0; it < max_iterations; ++it) {
    double delta = 0.0;
    for (int s = 0; s < S; ++s) {
      if (s == target) {
        u_next[s] = 0.0;
        continue;
      }
      double worst = 0.0;
      for (int a = 0; a < A; ++a) {
        double ev = 0.0;
        for (int s2 = 0; s2 < S; ++s2) ev += mdp.p(s, a, s2) * u[s2];
        if (ev > worst) worst = ev;
      }
      u_next[s] = 1.0 + worst;
      delta = std::max(delta, std::abs(u_next[s] - u[s]));
    }
    u.swap(u_next);
    if (delta < tol) {
      double result = 0.0;
      for (int s = 0; s < S; ++s) {
        if (s != target) result = std::max(result, u[s]);
      }
      return result;
    }
  }
  return std::nullopt;  // some policy never reaches the target
}

double policy_gap(const TabularMdp& mdp, const DeterministicPolicy& policy) {
  const auto eval = exact_policy_eval(mdp, policy);
  const int S = mdp.num_states, A = mdp.num_actions, H = mdp.horizon;
  double gap = 0.0;
  for (int t = 0; t < H - 1; ++t) {
    for (int s = 0; s < S; ++s) {
      for (int a = 0; a < A; ++a) {
        gap = std::max(gap, eval.v.at(t, s) - eval.q.at(t, s, a));
      }
    }
  }
  return gap;
}

}  // namespace metashield
