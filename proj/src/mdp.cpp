#include "metashield/mdp.hpp"

#include <cmath>
#include <stdexcept>

#include "json.hpp"

namespace metashield {

TabularMdp TabularMdp::zeros(int num_states, int num_actions, int horizon,
                             int initial_state) {
  TabularMdp m;
  m.num_states = num_states;
  m.num_actions = num_actions;
  m.horizon = horizon;
  m.initial_state = initial_state;
  m.transition.assign(static_cast<std::size_t>(num_states) * num_actions * num_states, 0.0);
  m.reward.assign(static_cast<std::size_t>(num_states) * num_actions, 0.0);
  return m;
}

void TabularMdp::validate() const {
  if (num_states < 1 || num_actions < 1) {
    throw std::invalid_argument("TabularMdp: need at least one state and one action");
  }
  if (horizon < 2) {
    throw std::invalid_argument("TabularMdp: horizon must be >= 2");
  }
  if (initial_state < 0 || initial_state >= num_states) {
    throw std::invalid_argument("TabularMdp: initial state out of range");
  }
  const std::size_t sa = static_cast<std::size_t>(num_states) * num_actions;
  if (transition.size() != sa * num_states || reward.size() != sa) {
    throw std::invalid_argument("TabularMdp: tensor sizes do not match S/A");
  }
  for (int s = 0; s < num_states; ++s) {
    for (int a = 0; a < num_actions; ++a) {
      double row_sum = 0.0;
      for (int s2 = 0; s2 < num_states; ++s2) {
        const double v = p(s, a, s2);
        if (v < 0.0) {
          throw std::invalid_argument("TabularMdp: negative transition probability");
        }
        row_sum += v;
      }
      if (std::abs(row_sum - 1.0) > 1e-9) {
        throw std::invalid_argument("TabularMdp: transition row does not sum to 1");
      }
      const double rv = r(s, a);
      if (rv < 0.0 || rv > 1.0) {
        throw std::invalid_argument("TabularMdp: reward outside [0,1]");
      }
    }
  }
}

std::string TabularMdp::to_json(int indent) const {
  nlohmann::json j;
  j["S"] = num_states;
  j["A"] = num_actions;
  j["H"] = horizon;
  j["s1"] = initial_state;
  auto P = nlohmann::json::array();
  for (int s = 0; s < num_states; ++s) {
    auto rows = nlohmann::json::array();
    for (int a = 0; a < num_actions; ++a) {
      auto row = nlohmann::json::array();
      for (int s2 = 0; s2 < num_states; ++s2) row.push_back(p(s, a, s2));
      rows.push_back(std::move(row));
    }
    P.push_back(std::move(rows));
  }
  j["P"] = std::move(P);
  auto R = nlohmann::json::array();
  for (int s = 0; s < num_states; ++s) {
    auto row = nlohmann::json::array();
    for (int a = 0; a < num_actions; ++a) row.push_back(r(s, a));
    R.push_back(std::move(row));
  }
  j["R"] = std::move(R);
  return j.dump(indent);
}

TabularMdp TabularMdp::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  TabularMdp m = zeros(j.at("S").get<int>(), j.at("A").get<int>(),
                       j.at("H").get<int>(), j.at("s1").get<int>());
  const auto& P = j.at("P");
  const auto& R = j.at("R");
  if (static_cast<int>(P.size()) != m.num_states || static_cast<int>(R.size()) != m.num_states) {
    throw std::invalid_argument("TabularMdp JSON: P/R outer size != S");
  }
  for (int s = 0; s < m.num_states; ++s) {
    if (static_cast<int>(P[s].size()) != m.num_actions ||
        static_cast<int>(R[s].size()) != m.num_actions) {
      throw std::invalid_argument("TabularMdp JSON: P/R action dimension != A");
    }
    for (int a = 0; a < m.num_actions; ++a) {
      if (static_cast<int>(P[s][a].size()) != m.num_states) {
        throw std::invalid_argument("TabularMdp JSON: P row size != S");
      }
      for (int s2 = 0; s2 < m.num_states; ++s2) {
        m.p(s, a, s2) = P[s][a][s2].get<double>();
      }
      m.r(s, a) = R[s][a].get<double>();
    }
  }
  m.validate();
  return m;
}

DeterministicPolicy DeterministicPolicy::constant(int horizon, int num_states, int a) {
  DeterministicPolicy pi;
  pi.horizon = horizon;
  pi.num_states = num_states;
  pi.actions.assign(static_cast<std::size_t>(horizon) * num_states, a);
  return pi;
}

bool DeterministicPolicy::valid_for(const TabularMdp& mdp) const {
  if (horizon != mdp.horizon || num_states != mdp.num_states) return false;
  for (int v : actions) {
    if (v < 0 || v >= mdp.num_actions) return false;
  }
  return true;
}

ValueTable ValueTable::zeros(int horizon, int num_states) {
  ValueTable t;
  t.horizon = horizon;
  t.num_states = num_states;
  t.values.assign(static_cast<std::size_t>(horizon) * num_states, 0.0);
  return t;
}

QTable QTable::zeros(int horizon, int num_states, int num_actions) {
  QTable t;
  t.horizon = horizon;
  t.num_states = num_states;
  t.num_actions = num_actions;
  t.values.assign(static_cast<std::size_t>(horizon) * num_states * num_actions, 0.0);
  return t;
}

double Rollout::episode_return() const {
  double total = 0.0;
  if (steps.empty()) return total;
  for (std::size_t t = 0; t + 1 < steps.size(); ++t) total += steps[t].r;
  return total;
}

bool Rollout::chained() const {
  for (std::size_t t = 0; t + 1 < steps.size(); ++t) {
    if (steps[t].s_next != steps[t + 1].s) return false;
  }
  return true;
}

}  // namespace metashield
