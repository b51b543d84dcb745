#include "metashield/estimation.hpp"

#include <cmath>
#include <stdexcept>

#include "json.hpp"

namespace metashield {

Counts::Counts(int num_states_, int num_actions_) {
  num_states = num_states_;
  num_actions = num_actions_;
  visits.assign(static_cast<std::size_t>(num_states) * num_actions, 0);
  next_counts.assign(static_cast<std::size_t>(num_states) * num_actions * num_states, 0);
  reward_sum.assign(static_cast<std::size_t>(num_states) * num_actions, 0.0);
}

void Counts::update(const Transition& step) {
  if (step.s < 0 || step.s >= num_states || step.a < 0 || step.a >= num_actions ||
      step.s_next < 0 || step.s_next >= num_states) {
    throw std::invalid_argument("Counts::update: index out of range");
  }
  visits[static_cast<std::size_t>(step.s) * num_actions + step.a] += 1;
  next_counts[(static_cast<std::size_t>(step.s) * num_actions + step.a) * num_states +
              step.s_next] += 1;
  reward_sum[static_cast<std::size_t>(step.s) * num_actions + step.a] += step.r;
}

void Counts::update(const Rollout& rollout) {
  for (const auto& step : rollout.steps) update(step);
}

long long Counts::total_steps() const {
  long long total = 0;
  for (long long v : visits) total += v;
  return total;
}

std::string Counts::to_json(int indent) const {
  nlohmann::json j;
  j["S"] = num_states;
  j["A"] = num_actions;
  j["visits"] = visits;
  j["next"] = next_counts;
  j["reward_sum"] = reward_sum;
  return j.dump(indent);
}

Counts Counts::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  Counts c(j.at("S").get<int>(), j.at("A").get<int>());
  c.visits = j.at("visits").get<std::vector<long long>>();
  c.next_counts = j.at("next").get<std::vector<long long>>();
  c.reward_sum = j.at("reward_sum").get<std::vector<double>>();
  const std::size_t sa = static_cast<std::size_t>(c.num_states) * c.num_actions;
  if (c.visits.size() != sa || c.reward_sum.size() != sa ||
      c.next_counts.size() != sa * c.num_states) {
    throw std::invalid_argument("Counts JSON: array sizes do not match S/A");
  }
  return c;
}

EmpiricalModel empirical_model(const Counts& counts) {
  const int S = counts.num_states, A = counts.num_actions;
  EmpiricalModel m;
  m.num_states = S;
  m.num_actions = A;
  m.p_hat.assign(static_cast<std::size_t>(S) * A * S, 0.0);
  m.r_hat.assign(static_cast<std::size_t>(S) * A, 0.0);
  for (int s = 0; s < S; ++s) {
    for (int a = 0; a < A; ++a) {
      const long long n = counts.n(s, a);
      const std::size_t base = (static_cast<std::size_t>(s) * A + a) * S;
      if (n == 0) {
        for (int s2 = 0; s2 < S; ++s2) m.p_hat[base + s2] = 1.0 / S;
        continue;
      }
      for (int s2 = 0; s2 < S; ++s2) {
        m.p_hat[base + s2] = static_cast<double>(counts.n_next(s, a, s2)) / n;
      }
      m.r_hat[static_cast<std::size_t>(s) * A + a] = counts.r_sum(s, a) / n;
    }
  }
  return m;
}

EmpiricalModel exact_model(const TabularMdp& mdp) {
  EmpiricalModel m;
  m.num_states = mdp.num_states;
  m.num_actions = mdp.num_actions;
  m.p_hat = mdp.transition;
  m.r_hat = mdp.reward;
  return m;
}

double log_term(const BonusParams& params) {
  if (params.num_states < 1 || params.num_actions < 1 || params.horizon < 1 ||
      params.planned_total_episodes < 1 || params.delta <= 0.0 || params.delta >= 1.0) {
    throw std::invalid_argument("log_term: parameters out of range");
  }
  return std::log(5.0 * params.num_states * params.num_actions * params.horizon *
                  static_cast<double>(params.planned_total_episodes) / params.delta);
}

double bonus_value(double log_term_value, long long n, const BonusParams& params) {
  const double denom = static_cast<double>(n > 1 ? n : 1);
  return 4.0 * params.horizon * std::sqrt(params.num_states * log_term_value / denom);
}

double bonus(int s, int a, const Counts& counts, const BonusParams& params) {
  return bonus_value(log_term(params), counts.n(s, a), params);
}

}  // namespace metashield
