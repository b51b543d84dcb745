#include "metashield/planning.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <vector>

namespace metashield {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_dims(const EmpiricalModel& model, const Counts& counts,
                const BonusParams& params) {
  if (model.num_states != counts.num_states || model.num_actions != counts.num_actions ||
      model.num_states != params.num_states || model.num_actions != params.num_actions) {
    throw std::invalid_argument("planning: model/counts/params dimensions disagree");
  }
  if (params.horizon < 2) {
    throw std::invalid_argument("planning: horizon must be >= 2");
  }
}

// Shared backward induction. bonus_sign selects the optimistic (+1) or
// conservative (-1) reward adjustment; [lo, hi] bounds each stage's Q
// values; when `policy` is non-null the value backup follows it instead of
// maximizing (greedy is filled otherwise).
void backward_induction(const EmpiricalModel& model, const Counts& counts,
                        const BonusParams& params, const PlanningOptions& options,
                        double bonus_sign, double lo, double hi,
                        const DeterministicPolicy* policy, QTable& q, ValueTable& v,
                        DeterministicPolicy* greedy) {
  const int S = model.num_states, A = model.num_actions, H = params.horizon;
  const double L = options.bonus_override ? 0.0 : log_term(params);

  // b depends on counts only, not on t; precompute per pair.
  std::vector<double> b(static_cast<std::size_t>(S) * A, 0.0);
  for (int s = 0; s < S; ++s) {
    for (int a = 0; a < A; ++a) {
      const double raw = options.bonus_override ? *options.bonus_override
                                                : bonus_value(L, counts.n(s, a), params);
      b[static_cast<std::size_t>(s) * A + a] = bonus_sign * raw;
    }
  }

  for (int t = H - 2; t >= 0; --t) {
    for (int s = 0; s < S; ++s) {
      int best_a = 0;
      double best_q = -kInf;
      for (int a = 0; a < A; ++a) {
        double ev = 0.0;
        for (int s2 = 0; s2 < S; ++s2) ev += model.p(s, a, s2) * v.at(t + 1, s2);
        double qv = model.r(s, a) + b[static_cast<std::size_t>(s) * A + a] +
                    options.gamma * ev;
        qv = std::clamp(qv, lo, hi);
        q.at(t, s, a) = qv;
        if (qv > best_q) {  // strict: ties keep the lowest index
          best_q = qv;
          best_a = a;
        }
      }
      if (policy != nullptr) {
        v.at(t, s) = q.at(t, s, policy->action(t, s));
      } else {
        v.at(t, s) = best_q;
        greedy->action(t, s) = best_a;
      }
    }
  }
}

}  // namespace

PlannerOutput optimistic_plan(const EmpiricalModel& model, const Counts& counts,
                              const BonusParams& params, const PlanningOptions& options) {
  check_dims(model, counts, params);
  const int S = model.num_states, A = model.num_actions, H = params.horizon;
  PlannerOutput out{QTable::zeros(H, S, A), ValueTable::zeros(H, S),
                    DeterministicPolicy::constant(H, S, 0)};
  const double lo = options.clip_values ? 0.0 : -kInf;
  const double hi = options.clip_values ? static_cast<double>(H) : kInf;
  backward_induction(model, counts, params, options, +1.0, lo, hi, nullptr, out.q,
                     out.v, &out.policy);
  return out;
}

PlannerOutput conservative_plan(const EmpiricalModel& model, const Counts& counts,
                                const BonusParams& params, const PlanningOptions& options) {
  check_dims(model, counts, params);
  const int S = model.num_states, A = model.num_actions, H = params.horizon;
  PlannerOutput out{QTable::zeros(H, S, A), ValueTable::zeros(H, S),
                    DeterministicPolicy::constant(H, S, 0)};
  // Conservative values stay floored at 0 even without [0,H] clipping:
  // true values are nonnegative, so the floor sharpens the lower bound
  // without breaking it.
  const double hi = options.clip_values ? static_cast<double>(H) : kInf;
  backward_induction(model, counts, params, options, -1.0, 0.0, hi, nullptr, out.q,
                     out.v, &out.policy);
  return out;
}

EvalOutput optimistic_eval(const EmpiricalModel& model, const Counts& counts,
                           const BonusParams& params, const DeterministicPolicy& policy,
                           const PlanningOptions& options) {
  check_dims(model, counts, params);
  const int S = model.num_states, A = model.num_actions, H = params.horizon;
  if (policy.horizon != H || policy.num_states != S) {
    throw std::invalid_argument("optimistic_eval: policy dimensions disagree");
  }
  EvalOutput out{QTable::zeros(H, S, A), ValueTable::zeros(H, S)};
  const double lo = options.clip_values ? 0.0 : -kInf;
  const double hi = options.clip_values ? static_cast<double>(H) : kInf;
  backward_induction(model, counts, params, options, +1.0, lo, hi, &policy, out.q,
                     out.v, nullptr);
  return out;
}

}  // namespace metashield
