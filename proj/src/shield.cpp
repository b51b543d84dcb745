#include "metashield/shield.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "metashield/envs.hpp"

namespace metashield {

InternalState init_internal(int episode_in_meta, std::optional<int> target,
                            int initial_state) {
  if (episode_in_meta < 1) {
    throw std::invalid_argument("init_internal: episode index is 1-based");
  }
  if (episode_in_meta == 1) return InternalState{initial_state, 0.0};
  if (!target) {
    throw std::invalid_argument("init_internal: target required for n > 1");
  }
  return InternalState{*target, 0.0};
}

InternalState sigma_update(const InternalState& z, int s, int a,
                           const EvalOutput& vhat, const QTable& qbar, int t) {
  if (z.target && *z.target != s) {
    return z;  // still waiting for the target
  }
  InternalState next;
  next.target.reset();
  next.zeta = z.zeta + (vhat.v.at(t, s) - qbar.at(t, s, a));
  return next;
}

int AgentConfig::effective_meta_cap() const {
  if (max_episodes_per_meta > 0) return max_episodes_per_meta;
  return 20 * static_cast<int>(std::ceil(6.0 * std::log(1.0 / delta)));
}

BonusParams AgentConfig::bonus_params(const TabularMdp& mdp) const {
  return BonusParams{mdp.num_states, mdp.num_actions, mdp.horizon, delta,
                     planned_total_episodes};
}

PlanningOptions AgentConfig::planning_options() const {
  return PlanningOptions{gamma, clip_values, bonus_override};
}

ShieldDecision shield_action(int s, const InternalState& z, int t, int pi_hat_action,
                             int pi_bar_action, const AgentConfig& config, double gap) {
  (void)t;
  const bool at_position =
      !z.target || (*z.target == s && !config.literal_eq4);
  const bool within_budget = z.zeta <= config.eta / 2.0;
  const bool gate_ok = !config.strict_gate || (z.zeta + gap <= config.eta);
  if (at_position && within_budget && gate_ok) {
    return ShieldDecision{pi_hat_action, true};
  }
  return ShieldDecision{pi_bar_action, false};
}

bool MetaRollout::chained() const {
  for (std::size_t i = 0; i + 1 < steps.size(); ++i) {
    if (steps[i].s_next != steps[i + 1].s) return false;
  }
  return true;
}

EpisodeOutcome run_unif_conserv_episode(const TabularMdp& mdp, const Counts& data,
                                        const MetaEpisodeState& meta,
                                        const DeterministicPolicy& pi_hat,
                                        const AgentConfig& config, Rng& rng,
                                        long long episode_index) {
  const int H = mdp.horizon;
  if (pi_hat.horizon != H || pi_hat.num_states != mdp.num_states) {
    throw std::invalid_argument("run_unif_conserv_episode: pi_hat dimensions disagree");
  }
  const BonusParams bparams = config.bonus_params(mdp);
  const PlanningOptions popts = config.planning_options();
  const EmpiricalModel model = empirical_model(data);

  // Baseline and its bounds are rebuilt from all data at every episode.
  const PlannerOutput baseline = conservative_plan(model, data, bparams, popts);
  const EvalOutput vhat = optimistic_eval(model, data, bparams, baseline.policy, popts);

  const int n = meta.episodes_this_meta + 1;
  int target = mdp.initial_state;
  if (n > 1) {
    if (!meta.next_episode_target) {
      throw std::logic_error("run_unif_conserv_episode: meta state lost its target");
    }
    target = *meta.next_episode_target;
  }
  InternalState z = init_internal(n, target, mdp.initial_state);

  int j = meta.ucb_steps_collected;  // pi^ is indexed by this meta-step clock
  bool stopped = false;
  bool encountered = false;
  int stop_state = -1;
  double max_zeta = 0.0;
  bool overshoot = false;
  std::vector<StepAnnotation> annotations(H);

  const auto act = [&](int t, int s) -> int {
    const int pi_bar_a = baseline.policy.action(t, s);
    int result = pi_bar_a;
    bool used = false;
    if (!stopped) {
      const bool seeking = z.target.has_value();
      const bool at_target = seeking && *z.target == s;
      if (!seeking || at_target) {
        encountered = true;
        if (at_target && config.literal_eq4) {
          // Literal shield rule: the encounter step itself stays on the
          // baseline; deficit tracking arms for the following steps.
          z.target.reset();
        } else {
          const int pi_hat_a = pi_hat.action(j < H ? j : H - 1, s);
          const double gap = vhat.v.at(t, s) - baseline.q.at(t, s, pi_hat_a);
          const ShieldDecision dec =
              shield_action(s, z, t, pi_hat_a, pi_bar_a, config, gap);
          if (dec.used_ucb && j < H) {
            result = dec.action;
            used = true;
            z.target.reset();
            // zeta accrues on exploration steps; baseline steps leave the
            // tracked deficit unchanged (their true deficit is zero).
            z.zeta += std::max(0.0, gap);
            ++j;
          } else {
            stopped = true;
            stop_state = s;
            z.target.reset();
          }
        }
      }
    }
    annotations[t] = StepAnnotation{used, z.zeta,
                                    z.target ? *z.target : kNoTarget};
    max_zeta = std::max(max_zeta, z.zeta);
    if (z.zeta > config.eta + 1e-12) overshoot = true;
    return result;
  };

  Rollout rollout = sample_rollout(mdp, act, rng);
  rollout.episode_index = episode_index;
  rollout.annotations = std::move(annotations);

  EpisodeOutcome out;
  out.rollout = std::move(rollout);
  out.baseline = baseline.policy;
  out.max_zeta = max_zeta;
  out.zeta_exceeded_eta = overshoot;
  out.meta = meta;
  out.meta.episodes_this_meta = n;

  int first_ucb = -1, last_ucb = -1;
  for (int t = 0; t < H; ++t) {
    if (!out.rollout.annotations[t].used_ucb) continue;
    if (first_ucb < 0) first_ucb = t;
    last_ucb = t;
    const Transition& step = out.rollout.steps[t];
    out.meta.assembled.steps.push_back(Transition{
        out.meta.ucb_steps_collected, step.s, step.a, step.r, step.s_next});
    out.meta.assembled.origins.emplace_back(episode_index, t);
    out.meta.ucb_steps_collected += 1;
    out.ucb_steps_used += 1;
  }
  if (first_ucb >= 0) {
    out.meta.fragment_markers.push_back(
        FragmentMarker{episode_index, first_ucb, last_ucb + 1});
  }

  if (out.meta.ucb_steps_collected >= H) {
    out.meta.completed = true;
    if (!config.literal_eq4 && !out.meta.assembled.chained()) {
      throw std::logic_error("meta-rollout chaining invariant broken");
    }
    return out;
  }

  if (first_ucb >= 0) {
    // Exploration progressed; resume from where it left off. When the
    // episode ended mid-exploration the resume point is the stored final
    // next-state.
    out.meta.next_episode_target = stopped ? stop_state : out.rollout.steps.back().s_next;
    out.meta.seek_failures = 0;
  } else if (encountered) {
    // Reached the target but the budget/gate blocked every exploration
    // step; retry the same resume point next episode.
    out.meta.next_episode_target = stopped ? stop_state : out.rollout.steps.back().s_next;
    out.meta.seek_failures = 0;
  } else {
    out.meta.next_episode_target = target;
    out.meta.seek_failures = meta.seek_failures + 1;
    const int cap = config.effective_meta_cap();
    if (out.meta.seek_failures > cap) {
      std::ostringstream msg;
      msg << "meta-episode " << meta.meta_index << " could not reach target state "
          << target << " in " << out.meta.seek_failures
          << " episodes (cap " << cap
          << "); the environment appears non-ergodic for the current policies";
      throw MetaEpisodeCapError(msg.str());
    }
  }
  return out;
}

std::string agent_kind_name(AgentKind kind) {
  switch (kind) {
    case AgentKind::UnifConservUcbvi: return "unif_conserv_ucbvi";
    case AgentKind::Ucbvi: return "ucbvi";
    case AgentKind::BaselineOnly: return "baseline_only";
  }
  throw std::logic_error("unknown agent kind");
}

AgentKind agent_kind_from_name(const std::string& name) {
  if (name == "unif_conserv_ucbvi") return AgentKind::UnifConservUcbvi;
  if (name == "ucbvi") return AgentKind::Ucbvi;
  if (name == "baseline_only") return AgentKind::BaselineOnly;
  throw std::invalid_argument("unknown agent kind: " + name);
}

ViolationReport true_violation(const TabularMdp& mdp, const DeterministicPolicy& baseline,
                               const Rollout& rollout, double eta) {
  const auto eval = exact_policy_eval(mdp, baseline);
  ViolationReport report;
  double deficit = 0.0;
  for (const auto& step : rollout.steps) {
    deficit += std::max(eval.v.at(step.t, step.s) - eval.q.at(step.t, step.s, step.a), 0.0);
    report.max_deficit = std::max(report.max_deficit, deficit);
  }
  report.violated = report.max_deficit > eta;
  return report;
}

double MetricsLog::cumulative_regret() const {
  double total = 0.0;
  for (const auto& rec : episodes) total += rec.regret_increment;
  return total;
}

long long MetricsLog::total_violations() const {
  long long total = 0;
  for (const auto& rec : episodes) total += rec.violated ? 1 : 0;
  return total;
}

std::map<int, long long> MetricsLog::meta_length_histogram() const {
  std::map<int, long long> hist;
  for (int len : completed_meta_lengths) hist[len] += 1;
  return hist;
}

namespace {

EpisodeRecord make_record(long long k, const Rollout& rollout,
                          const ViolationReport& violation, double optimal_value,
                          long long meta_index, int episode_in_meta, int ucb_steps,
                          double max_zeta) {
  EpisodeRecord rec;
  rec.episode = k;
  rec.ret = rollout.episode_return();
  rec.regret_increment = optimal_value - rec.ret;
  rec.violated = violation.violated;
  rec.max_deficit = violation.max_deficit;
  rec.meta_index = meta_index;
  rec.episode_in_meta = episode_in_meta;
  rec.ucb_steps = ucb_steps;
  rec.max_zeta = max_zeta;
  return rec;
}

}  // namespace

MetricsLog run_agent(AgentKind kind, const TabularMdp& mdp, const AgentConfig& config,
                     long long total_episodes, long long warm_start_episodes, Rng& rng,
                     const TraceSink& trace) {
  mdp.validate();
  const int H = mdp.horizon;
  const BonusParams bparams = config.bonus_params(mdp);
  const PlanningOptions popts = config.planning_options();

  MetricsLog log;
  log.agent = kind;
  log.eta = config.eta;
  log.warm_start_episodes = warm_start_episodes;

  Counts counts_all(mdp.num_states, mdp.num_actions);
  Counts counts_meta(mdp.num_states, mdp.num_actions);
  for (const auto& r : warm_start_dataset(mdp, warm_start_episodes, rng)) {
    counts_all.update(r);
  }

  const OptimalResult oracle = exact_optimal(mdp);
  log.optimal_value = oracle.v.at(0, mdp.initial_state);

  const auto plan_pi_hat = [&]() {
    const Counts& src = config.use_full_data_for_ucb ? counts_all : counts_meta;
    return optimistic_plan(empirical_model(src), src, bparams, popts).policy;
  };

  if (kind == AgentKind::UnifConservUcbvi) {
    MetaEpisodeState meta;
    DeterministicPolicy pi_hat = plan_pi_hat();
    for (long long k = 1; k <= total_episodes; ++k) {
      EpisodeOutcome outcome;
      try {
        outcome = run_unif_conserv_episode(mdp, counts_all, meta, pi_hat, config, rng, k);
      } catch (const MetaEpisodeCapError& err) {
        log.aborted_at_episode = k;
        log.abort_reason = err.what();
        break;
      }
      const auto violation = true_violation(mdp, outcome.baseline, outcome.rollout, config.eta);
      log.episodes.push_back(make_record(k, outcome.rollout, violation, log.optimal_value,
                                         meta.meta_index, outcome.meta.episodes_this_meta,
                                         outcome.ucb_steps_used, outcome.max_zeta));
      if (outcome.zeta_exceeded_eta) log.zeta_overshoot_episodes += 1;
      counts_all.update(outcome.rollout);
      if (trace) trace(outcome.rollout);
      if (outcome.meta.completed) {
        for (const auto& step : outcome.meta.assembled.steps) counts_meta.update(step);
        log.completed_meta_episodes += 1;
        log.completed_meta_lengths.push_back(outcome.meta.episodes_this_meta);
        MetaEpisodeState fresh;
        fresh.meta_index = outcome.meta.meta_index + 1;
        meta = fresh;
        pi_hat = plan_pi_hat();
      } else {
        meta = outcome.meta;
      }
    }
    return log;
  }

  // Plain agents. The conservative baseline is still rebuilt every episode:
  // the constraint monitor is defined against it regardless of who acts.
  for (long long k = 1; k <= total_episodes; ++k) {
    const EmpiricalModel model = empirical_model(counts_all);
    const DeterministicPolicy pi_bar =
        conservative_plan(model, counts_all, bparams, popts).policy;
    DeterministicPolicy actor = pi_bar;
    bool ucb = false;
    if (kind == AgentKind::Ucbvi) {
      actor = optimistic_plan(model, counts_all, bparams, popts).policy;
      ucb = true;
    }
    Rollout rollout = sample_rollout(
        mdp, [&](int t, int s) { return actor.action(t, s); }, rng);
    rollout.episode_index = k;
    rollout.annotations.assign(H, StepAnnotation{ucb, 0.0, kNoTarget});
    const auto violation = true_violation(mdp, pi_bar, rollout, config.eta);
    log.episodes.push_back(make_record(k, rollout, violation, log.optimal_value, 0, 0,
                                       ucb ? H : 0, 0.0));
    counts_all.update(rollout);
    if (trace) trace(rollout);
  }
  return log;
}

}  // namespace metashield
