#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "metashield/dp.hpp"
#include "metashield/estimation.hpp"
#include "metashield/mdp.hpp"
#include "metashield/planning.hpp"

namespace metashield {

/// Shield internal state z = (target, zeta). While a target is set zeta
/// stays 0; once the target has been reached the target clears and zeta
/// accrues the surrogate reward deficit.
struct InternalState {
  std::optional<int> target;
  double zeta = 0.0;
};

/// Internal state at the start of episode n (1-based) of a meta-episode:
/// (s1, 0) for n = 1, (target, 0) afterwards.
InternalState init_internal(int episode_in_meta, std::optional<int> target,
                            int initial_state);

/// One step of the internal-state transition: while a target is set and
/// not yet reached the state is unchanged; otherwise the target clears and
/// zeta accrues V^(s) - Q_(s, a) for the action taken (nonnegative under
/// the planning sandwich).
InternalState sigma_update(const InternalState& z, int s, int a,
                           const EvalOutput& vhat, const QTable& qbar, int t);

struct AgentConfig {
  double eta = 0.1;    // per-episode exploration budget
  double delta = 0.1;  // failure probability
  // Extra pre-check zeta + (V^ - Q_)(s, pi^(s)) <= eta before every
  // exploratory step; guards against early-training surrogate gaps larger
  // than eta/2. Off by default (faithful to the budget rule).
  bool strict_gate = false;
  // Literal reading of the shield rule: the step at which the target state
  // is reached still uses the baseline. Default off: exploration resumes
  // AT the target, which the meta-rollout chaining requires.
  bool literal_eq4 = false;
  // Plan the exploration policy from all data rather than meta-rollouts
  // only. Meta-rollouts alone mimic the exploration algorithm exactly; in
  // practice the full dataset works and learns faster.
  bool use_full_data_for_ucb = true;
  // 0 = auto: 20 * ceil(6 ln(1/delta)). Exceeding the cap in target
  // seeking signals that the ergodicity assumption does not hold.
  int max_episodes_per_meta = 0;
  double gamma = 1.0;
  bool clip_values = true;
  long long planned_total_episodes = 1;
  std::optional<double> bonus_override;  // diagnostic hook

  int effective_meta_cap() const;
  BonusParams bonus_params(const TabularMdp& mdp) const;
  PlanningOptions planning_options() const;
};

struct ShieldDecision {
  int action = 0;
  bool used_ucb = false;
};

/// The shield policy: the exploration action when exploration-eligible
/// (target cleared or standing on it, zeta within budget, strict gate
/// satisfied when enabled), the baseline action otherwise.
/// `gap` is V^_t(s) - Q__t(s, pi_hat_action), used only by the strict gate.
ShieldDecision shield_action(int s, const InternalState& z, int t, int pi_hat_action,
                             int pi_bar_action, const AgentConfig& config, double gap);

struct FragmentMarker {
  long long episode_index = 0;  // online episode index the fragment came from
  int t_begin = 0;              // episode-local step range [t_begin, t_end)
  int t_end = 0;
};

/// Exploration steps stitched across episodes; a completed meta-rollout
/// has exactly H steps and chains across fragment boundaries.
struct MetaRollout {
  std::vector<Transition> steps;
  std::vector<std::pair<long long, int>> origins;  // (episode, local step)

  bool chained() const;
};

struct MetaEpisodeState {
  long long meta_index = 1;
  int ucb_steps_collected = 0;
  std::optional<int> next_episode_target;  // unset => first episode, target s1
  std::vector<FragmentMarker> fragment_markers;
  MetaRollout assembled;
  int episodes_this_meta = 0;
  int seek_failures = 0;  // episodes that never reached the target
  bool completed = false;
};

/// Thrown when a meta-episode's target goes unreached for more episodes
/// than the cap allows; the environment is then effectively non-ergodic
/// for the current policies.
class MetaEpisodeCapError : public std::runtime_error {
 public:
  explicit MetaEpisodeCapError(const std::string& what) : std::runtime_error(what) {}
};

struct EpisodeOutcome {
  Rollout rollout;  // annotated with (used_ucb, zeta, target) per step
  MetaEpisodeState meta;
  DeterministicPolicy baseline;  // the pi_ in force during this episode
  int ucb_steps_used = 0;
  double max_zeta = 0.0;
  bool zeta_exceeded_eta = false;
};

/// One inner-loop episode of the uniformly conservative agent: recomputes
/// the baseline and its bounds from `data`, runs the shield for H steps,
/// and advances the meta-episode stitching state. The exploration policy
/// is indexed by the meta-step (ucb_steps_collected), not the episode
/// step, so the assembled meta-rollout looks like one H-step exploration
/// episode.
///
/// The tracked deficit accrues only on exploration steps; baseline steps
/// contribute exactly zero true deficit, so zeta stays a tight upper bound
/// on it. Once exploration stops within an episode it stays stopped, which
/// keeps each episode's exploration fragment contiguous. Without the
/// strict gate the final exploratory step may push zeta past eta; such
/// episodes are flagged (zeta_exceeded_eta) rather than prevented.
EpisodeOutcome run_unif_conserv_episode(const TabularMdp& mdp, const Counts& data,
                                        const MetaEpisodeState& meta,
                                        const DeterministicPolicy& pi_hat,
                                        const AgentConfig& config, Rng& rng,
                                        long long episode_index = 0);

enum class AgentKind { UnifConservUcbvi, Ucbvi, BaselineOnly };

std::string agent_kind_name(AgentKind kind);
AgentKind agent_kind_from_name(const std::string& name);

struct ViolationReport {
  double max_deficit = 0.0;
  bool violated = false;
};

/// Ground-truth constraint monitor: the running reward deficit
///   z*_t = sum_{tau<=t} max{V^pi_(s_tau) - Q^pi_(s_tau, a_tau), 0}
/// computed with exact policy evaluation on the true MDP; the episode
/// violates the budget when max_t z*_t > eta.
ViolationReport true_violation(const TabularMdp& mdp, const DeterministicPolicy& baseline,
                               const Rollout& rollout, double eta);

struct EpisodeRecord {
  long long episode = 0;  // 1-based online episode index
  double ret = 0.0;       // realized return under the terminal convention
  double regret_increment = 0.0;  // V*_1(s1) - ret
  bool violated = false;
  double max_deficit = 0.0;
  long long meta_index = 0;  // 0 when the agent has no meta structure
  int episode_in_meta = 0;
  int ucb_steps = 0;
  double max_zeta = 0.0;
};

struct MetricsLog {
  AgentKind agent = AgentKind::UnifConservUcbvi;
  std::string label;  // harness cell label; empty means the kind name
  std::uint64_t seed = 0;
  double eta = 0.0;
  double optimal_value = 0.0;  // V*_1(s1)
  std::vector<EpisodeRecord> episodes;
  long long warm_start_episodes = 0;
  long long completed_meta_episodes = 0;
  std::vector<int> completed_meta_lengths;  // N_m per completed meta-episode
  long long zeta_overshoot_episodes = 0;
  // Set when the run stopped early on a meta-episode cap error.
  std::optional<long long> aborted_at_episode;
  std::string abort_reason;

  double cumulative_regret() const;
  long long total_violations() const;
  std::map<int, long long> meta_length_histogram() const;
};

using TraceSink = std::function<void(const Rollout&)>;

/// Runs one agent for `total_episodes` online episodes after a warm start.
/// The exploration policy of the shield agent is recomputed at meta-episode
/// starts; the baseline and its bounds are recomputed every episode from
/// all data. A meta-episode cap error ends the run early and is recorded
/// on the log rather than thrown.
MetricsLog run_agent(AgentKind kind, const TabularMdp& mdp, const AgentConfig& config,
                     long long total_episodes, long long warm_start_episodes, Rng& rng,
                     const TraceSink& trace = {});

}  // namespace metashield
