// Acceptance suite. Each criterion runs standalone, prints one PASS/FAIL
// line (plus measurement details), and the process exit code is the number
// of failed criteria. Run with no arguments for all criteria, or pass
// criterion numbers.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "metashield/harness.hpp"
#include "../oracles.hpp"

using namespace metashield;
namespace mt = metashield::testing;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// The fixed ergodic instance used by the statistical criteria: Dirichlet
// rows floored at 0.02, fully supported. Note it cannot come from
// build_random_ergodic_mdp: with 5 states no fully-supported MDP has a
// worst-case diameter below H/2 = 3, because the five per-row target
// masses cannot all reach 1/3.
TabularMdp fixed_ergodic_5x2(int horizon) {
  Rng rng(mix_seed(67, 2));
  const int S = 5, A = 2;
  TabularMdp mdp = TabularMdp::zeros(S, A, horizon, 0);
  for (int s = 0; s < S; ++s) {
    for (int a = 0; a < A; ++a) {
      double total = 0.0;
      std::vector<double> row(S);
      for (int s2 = 0; s2 < S; ++s2) {
        row[s2] = -std::log(1.0 - rng.uniform());
        total += row[s2];
      }
      double floored = 0.0;
      for (int s2 = 0; s2 < S; ++s2) {
        row[s2] = std::max(row[s2] / total, 0.02);
        floored += row[s2];
      }
      for (int s2 = 0; s2 < S; ++s2) mdp.p(s, a, s2) = row[s2] / floored;
      mdp.r(s, a) = rng.uniform();
    }
  }
  mdp.validate();
  return mdp;
}

double inventory_eta() {
  const TabularMdp mdp = build_inventory_mdp();
  const CheckReport report = check_env(mdp);
  return std::max(0.12, 1.1 * report.eta_min);
}

// ---------------------------------------------------------------------
// criterion 1: exact oracles vs brute-force enumeration

bool criterion_1() {
  const auto start = Clock::now();
  int instances = 0;
  double worst = 0.0;
  for (std::uint64_t i = 0; i < 20; ++i) {
    const int S = 2 + static_cast<int>(i % 2);
    const int A = 2;
    const int H = 3 + static_cast<int>(i % 2);
    const TabularMdp mdp = mt::random_mdp(S, A, H, 1000 + i);
    ++instances;

    const auto pi = mt::random_policy(H, S, A, 2000 + i);
    const auto eval = exact_policy_eval(mdp, pi);
    for (int t = 0; t < H; ++t) {
      for (int s = 0; s < S; ++s) {
        worst = std::max(worst,
                         std::abs(eval.v.at(t, s) - mt::enum_policy_value(mdp, pi, t, s)));
      }
    }
    const auto opt = exact_optimal(mdp);
    worst = std::max(worst, std::abs(opt.v.at(0, mdp.initial_state) -
                                     mt::enum_best_initial_value(mdp)));
  }
  const double elapsed = seconds_since(start);
  const bool pass = instances >= 20 && worst <= 1e-9 && elapsed < 60.0;
  std::printf("  instances=%d worst_abs_err=%.2e elapsed=%.2fs\n", instances, worst,
              elapsed);
  return pass;
}

// ---------------------------------------------------------------------
// criterion 2: planner reductions at zero bonus

bool criterion_2() {
  double worst = 0.0;
  PlanningOptions zero;
  zero.bonus_override = 0.0;
  for (std::uint64_t i = 0; i < 20; ++i) {
    const int S = 2 + static_cast<int>(i % 2);
    const int A = 2;
    const int H = 3 + static_cast<int>(i % 2);
    const TabularMdp mdp = mt::random_mdp(S, A, H, 1000 + i);
    const Counts counts(S, A);
    const auto model = exact_model(mdp);
    const BonusParams params{S, A, H, 0.1, 100};

    const auto opt = exact_optimal(mdp);
    const auto up = optimistic_plan(model, counts, params, zero);
    const auto lo = conservative_plan(model, counts, params, zero);
    const auto pi = mt::random_policy(H, S, A, 2000 + i);
    const auto ev_exact = exact_policy_eval(mdp, pi);
    const auto ev = optimistic_eval(model, counts, params, pi, zero);
    for (int t = 0; t < H; ++t) {
      for (int s = 0; s < S; ++s) {
        worst = std::max(worst, std::abs(up.v.at(t, s) - opt.v.at(t, s)));
        worst = std::max(worst, std::abs(lo.v.at(t, s) - opt.v.at(t, s)));
        worst = std::max(worst, std::abs(ev.v.at(t, s) - ev_exact.v.at(t, s)));
        for (int a = 0; a < A; ++a) {
          worst = std::max(worst, std::abs(up.q.at(t, s, a) - opt.q.at(t, s, a)));
          worst = std::max(worst, std::abs(lo.q.at(t, s, a) - opt.q.at(t, s, a)));
          worst = std::max(worst, std::abs(ev.q.at(t, s, a) - ev_exact.q.at(t, s, a)));
        }
      }
    }
  }
  std::printf("  worst_abs_err=%.2e\n", worst);
  return worst <= 1e-9;
}

// ---------------------------------------------------------------------
// criterion 3: deterministic sandwich across planner calls

bool criterion_3() {
  long long calls = 0, failures = 0;
  for (std::uint64_t i = 0; i < 50; ++i) {
    const int S = 3 + static_cast<int>(i % 3);
    const int A = 2 + static_cast<int>(i % 2);
    const int H = 4 + static_cast<int>(i % 4);
    const TabularMdp mdp = mt::random_mdp(S, A, H, 3000 + i);
    Counts counts(S, A);
    Rng rng(mix_seed(31, i));
    const int episodes = static_cast<int>(i % 40);
    for (int k = 0; k < episodes; ++k) {
      counts.update(sample_rollout(
          mdp, [&](int, int) { return rng.uniform_int(A); }, rng));
    }
    const auto model = empirical_model(counts);
    const BonusParams params{S, A, H, 0.1, 500};
    PlanningOptions opts;
    opts.clip_values = (i % 2 == 0);
    const auto up = optimistic_plan(model, counts, params, opts);
    const auto lo = conservative_plan(model, counts, params, opts);
    const auto ev = optimistic_eval(model, counts, params, lo.policy, opts);
    ++calls;
    for (int t = 0; t < H; ++t) {
      for (int s = 0; s < S; ++s) {
        if (ev.v.at(t, s) < lo.v.at(t, s) - 1e-12) ++failures;
        for (int a = 0; a < A; ++a) {
          if (lo.q.at(t, s, a) > up.q.at(t, s, a) + 1e-12) ++failures;
          if (lo.v.at(t, s) < lo.q.at(t, s, a) - 1e-12) ++failures;
        }
      }
    }
  }
  std::printf("  planner_calls=%lld pointwise_failures=%lld\n", calls, failures);
  return failures == 0;
}

// ---------------------------------------------------------------------
// criterion 4: statistical optimism/pessimism vs the true values

bool criterion_4() {
  const TabularMdp mdp = fixed_ergodic_5x2(6);
  const int runs = 100;
  int bad_runs = 0;
  for (int run = 0; run < runs; ++run) {
    Counts counts(5, 2);
    Rng rng(mix_seed(4000, run));
    for (int k = 0; k < 200; ++k) {
      counts.update(sample_rollout(
          mdp, [&](int, int) { return rng.uniform_int(2); }, rng));
    }
    const auto model = empirical_model(counts);
    const BonusParams params{5, 2, 6, 0.1, 200};
    const auto lo = conservative_plan(model, counts, params);
    const auto ev = optimistic_eval(model, counts, params, lo.policy);
    const auto truth = exact_policy_eval(mdp, lo.policy);
    bool failed = false;
    for (int t = 0; t < 6 && !failed; ++t) {
      for (int s = 0; s < 5 && !failed; ++s) {
        if (ev.v.at(t, s) < truth.v.at(t, s) - 1e-9) failed = true;
        for (int a = 0; a < 2; ++a) {
          if (lo.q.at(t, s, a) > truth.q.at(t, s, a) + 1e-9) failed = true;
        }
      }
    }
    if (failed) ++bad_runs;
  }
  std::printf("  runs=%d bound_failures=%d (allowed %d)\n", runs, bad_runs, runs / 10);
  return bad_runs <= runs / 10;
}

// ---------------------------------------------------------------------
// criterion 5: shield safety on the inventory environment

bool criterion_5() {
  const auto start = Clock::now();
  const TabularMdp mdp = build_inventory_mdp();
  const double eta = inventory_eta();
  const long long N = 5000;
  int seeds_with_violations = 0;
  bool zeta_ok = true, complete = true, rate_ok = true;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    AgentConfig cfg;
    cfg.strict_gate = true;
    const auto log = run_cell(mdp, AgentKind::UnifConservUcbvi, cfg, eta, seed, N, 1500);
    if (log.aborted_at_episode || log.episodes.size() != static_cast<std::size_t>(N)) {
      complete = false;
      continue;
    }
    for (const auto& rec : log.episodes) {
      if (rec.max_zeta > eta + 1e-12) zeta_ok = false;
    }
    const long long violations = log.total_violations();
    if (violations > 0) ++seeds_with_violations;
    if (violations >= N / 100) rate_ok = false;
  }
  const double elapsed = seconds_since(start);
  std::printf("  eta=%.4f seeds_with_violations=%d/10 zeta_within_budget=%d "
              "complete=%d elapsed=%.1fs\n",
              eta, seeds_with_violations, zeta_ok ? 1 : 0, complete ? 1 : 0, elapsed);
  return complete && zeta_ok && seeds_with_violations <= 1 && rate_ok &&
         elapsed < 10.0 * 60.0 * 10.0;
}

// ---------------------------------------------------------------------
// criterion 6: meta-rollout structure and stitching equivalence

struct FrozenSetup {
  TabularMdp mdp;
  Counts counts;
  DeterministicPolicy pi_hat;
  AgentConfig cfg;
};

FrozenSetup frozen_setup() {
  FrozenSetup setup{fixed_ergodic_5x2(6), Counts(5, 2),
                    DeterministicPolicy::constant(6, 5, 0), AgentConfig{}};
  Rng warm(mix_seed(600, 0));
  for (int k = 0; k < 200; ++k) {
    setup.counts.update(sample_rollout(
        setup.mdp, [&](int, int) { return warm.uniform_int(2); }, warm));
  }
  // stationary exploration policy: the optimal first-stage action map
  const auto opt = exact_optimal(setup.mdp);
  for (int t = 0; t < 6; ++t) {
    for (int s = 0; s < 5; ++s) {
      setup.pi_hat.action(t, s) = opt.policy.action(0, s);
    }
  }
  setup.cfg.eta = 1.2;
  setup.cfg.bonus_override = 0.25;  // frozen moderate gaps: a few steps per episode
  setup.cfg.planned_total_episodes = 1;
  return setup;
}

bool criterion_6() {
  const auto setup = frozen_setup();
  const int H = setup.mdp.horizon, S = setup.mdp.num_states;
  const int n_meta = 20000;

  // assembled meta-rollouts under frozen data, policy, and bounds
  std::vector<long long> meta_visits(static_cast<std::size_t>(H) * S, 0);
  Rng rng(mix_seed(600, 1));
  MetaEpisodeState meta;
  long long episode = 0;
  int completed = 0, structural_failures = 0;
  while (completed < n_meta) {
    const auto out = run_unif_conserv_episode(setup.mdp, setup.counts, meta,
                                              setup.pi_hat, setup.cfg, rng, ++episode);
    if (out.meta.completed) {
      if (out.meta.assembled.steps.size() != static_cast<std::size_t>(H) ||
          !out.meta.assembled.chained()) {
        ++structural_failures;
      }
      for (const auto& step : out.meta.assembled.steps) {
        meta_visits[static_cast<std::size_t>(step.t) * S + step.s] += 1;
      }
      ++completed;
      MetaEpisodeState fresh;
      fresh.meta_index = out.meta.meta_index + 1;
      meta = fresh;
    } else {
      meta = out.meta;
    }
  }

  // plain rollouts under the same exploration policy
  std::vector<long long> plain_visits(static_cast<std::size_t>(H) * S, 0);
  Rng plain_rng(mix_seed(600, 2));
  for (int k = 0; k < n_meta; ++k) {
    const auto rollout = sample_rollout(
        setup.mdp, [&](int t, int s) { return setup.pi_hat.action(t, s); }, plain_rng);
    for (const auto& step : rollout.steps) {
      plain_visits[static_cast<std::size_t>(step.t) * S + step.s] += 1;
    }
  }

  const double total = static_cast<double>(n_meta) * H;
  double tv = 0.0;
  for (std::size_t i = 0; i < meta_visits.size(); ++i) {
    tv += std::abs(meta_visits[i] / total - plain_visits[i] / total);
  }
  tv *= 0.5;
  std::printf("  completed_meta_rollouts=%d structural_failures=%d episodes_used=%lld "
              "tv_distance=%.4f\n",
              completed, structural_failures, episode, tv);
  return structural_failures == 0 && tv <= 0.05;
}

// ---------------------------------------------------------------------
// criteria 7 and 8 share the comparative inventory experiment

struct ComparativeResult {
  bool ours_complete = true;
  bool ucbvi_complete = true;
  std::string abort_note;
  double ours_violations = 0.0;  // seed-averaged
  double ucbvi_violations = 0.0;
  double ours_regret = 0.0;  // seed-averaged cumulative at N
  double ucbvi_regret = 0.0;
  double ours_first_half = 0.0;  // seed-averaged regret in [1, N/2]
  double ours_second_half = 0.0;  // seed-averaged regret in (N/2, N]
};

ComparativeResult run_comparative(long long N) {
  const TabularMdp mdp = build_inventory_mdp();
  const double eta = inventory_eta();
  ComparativeResult res;
  const std::vector<std::uint64_t> seeds{1, 2, 3, 4};
  for (std::uint64_t seed : seeds) {
    AgentConfig cfg;  // spec defaults: strict gate off, clipping on, gamma 1
    const auto ours = run_cell(mdp, AgentKind::UnifConservUcbvi, cfg, eta, seed, N, 1500);
    if (ours.aborted_at_episode) {
      res.ours_complete = false;
      if (res.abort_note.empty()) res.abort_note = ours.abort_reason;
    }
    const auto ucbvi = run_cell(mdp, AgentKind::Ucbvi, cfg, eta, seed, N, 1500);
    if (ucbvi.aborted_at_episode) res.ucbvi_complete = false;
    res.ours_violations += static_cast<double>(ours.total_violations()) / seeds.size();
    res.ucbvi_violations += static_cast<double>(ucbvi.total_violations()) / seeds.size();
    res.ours_regret += ours.cumulative_regret() / seeds.size();
    res.ucbvi_regret += ucbvi.cumulative_regret() / seeds.size();
    for (const auto& rec : ours.episodes) {
      if (rec.episode <= N / 2) {
        res.ours_first_half += rec.regret_increment / seeds.size();
      } else {
        res.ours_second_half += rec.regret_increment / seeds.size();
      }
    }
  }
  return res;
}

bool criterion_7() {
  const long long N = 20000;
  const auto res = run_comparative(N);
  std::printf("  ours_violations=%.2f ucbvi_violations=%.2f ours_regret=%.1f "
              "ucbvi_regret=%.1f complete=%d/%d\n",
              res.ours_violations, res.ucbvi_violations, res.ours_regret,
              res.ucbvi_regret, res.ours_complete ? 1 : 0, res.ucbvi_complete ? 1 : 0);
  if (!res.abort_note.empty()) std::printf("  note: %s\n", res.abort_note.c_str());
  const bool complete = res.ours_complete && res.ucbvi_complete;
  const bool violation_gap = res.ucbvi_violations > res.ours_violations &&
                             res.ucbvi_violations >= 10.0 * res.ours_violations;
  const bool regret_ok = res.ours_regret <= 5.0 * res.ucbvi_regret;
  return complete && violation_gap && regret_ok;
}

bool criterion_8() {
  const long long N = 20000;
  const auto res = run_comparative(N);
  std::printf("  ours_first_half=%.1f ours_second_half=%.1f complete=%d\n",
              res.ours_first_half, res.ours_second_half, res.ours_complete ? 1 : 0);
  if (!res.abort_note.empty()) std::printf("  note: %s\n", res.abort_note.c_str());
  return res.ours_complete && res.ours_second_half < res.ours_first_half;
}

// ---------------------------------------------------------------------
// criterion 9: assumption checkers

bool criterion_9() {
  const auto start = Clock::now();

  const TabularMdp inventory = build_inventory_mdp();
  const auto inv_report = check_env(inventory);
  const bool inventory_ok = inv_report.upsilon_bounded && inv_report.upsilon <= 10.0;

  TabularMdp trap = TabularMdp::zeros(2, 2, 4, 0);
  for (int s = 0; s < 2; ++s) {
    trap.p(s, 0, 1 - s) = 1.0;
    trap.p(s, 1, s) = 1.0;
    trap.r(s, 0) = 0.3;
    trap.r(s, 1) = 0.3;
  }
  const auto trap_report = check_env(trap);
  const bool trap_ok = !trap_report.upsilon_bounded;

  TabularMdp single = TabularMdp::zeros(3, 1, 6, 0);
  for (int s = 0; s < 3; ++s) {
    for (int s2 = 0; s2 < 3; ++s2) single.p(s, 0, s2) = 1.0 / 3;
    single.r(s, 0) = 0.4;
  }
  const auto single_report = check_env(single);
  const bool single_ok = single_report.eta_min == 0.0;

  // determinism of the full reports
  const bool deterministic = check_env(inventory).to_json() == inv_report.to_json();

  const double elapsed = seconds_since(start);
  std::printf("  inventory_upsilon=%s (pass<=10: %d) trap_unbounded=%d "
              "single_action_eta_min=%.3f deterministic=%d elapsed=%.2fs\n",
              inv_report.upsilon_bounded ? std::to_string(inv_report.upsilon).c_str()
                                         : "unbounded",
              inventory_ok ? 1 : 0, trap_ok ? 1 : 0, single_report.eta_min,
              deterministic ? 1 : 0, elapsed);
  if (!inventory_ok) {
    std::printf("  note: the worst-case diameter quantifies over all policies; a "
                "never-order policy cannot raise the stock level, so targets above "
                "the initial level are unreachable and upsilon is unbounded\n");
  }
  return inventory_ok && trap_ok && single_ok && deterministic && elapsed < 10.0;
}

// ---------------------------------------------------------------------
// criterion 10: byte-identical reruns

bool criterion_10() {
  ExperimentConfig cfg;
  cfg.env.kind = "random_ergodic";
  cfg.env.random.num_states = 3;
  cfg.env.random.num_actions = 2;
  cfg.env.random.horizon = 12;
  cfg.env.random.min_transition_prob = 0.1;
  cfg.env.random.seed = 5;
  cfg.agents.push_back(AgentSetup{AgentKind::UnifConservUcbvi, {}});
  cfg.agents.push_back(AgentSetup{AgentKind::Ucbvi, {}});
  cfg.total_episodes = 200;
  cfg.eta_values = {0.4};
  cfg.seeds = {1, 2};
  cfg.warm_start_episodes = 20;
  cfg.workers = 2;

  const fs::path dir1 = fs::temp_directory_path() / "metashield_acc10_a";
  const fs::path dir2 = fs::temp_directory_path() / "metashield_acc10_b";
  fs::remove_all(dir1);
  fs::remove_all(dir2);
  cfg.output_dir = dir1.string();
  const auto r1 = run_experiment(cfg);
  cfg.output_dir = dir2.string();
  cfg.workers = 1;  // scheduling must not matter
  const auto r2 = run_experiment(cfg);

  auto slurp = [](const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
  };
  bool identical = r1.failures.empty() && r2.failures.empty() &&
                   r1.cell_files.size() == r2.cell_files.size();
  int cells = 0;
  if (identical) {
    for (const auto& name : r1.cell_files) {
      ++cells;
      if (slurp(dir1 / name) != slurp(dir2 / name)) identical = false;
    }
  }
  fs::remove_all(dir1);
  fs::remove_all(dir2);
  std::printf("  cells_compared=%d byte_identical=%d\n", cells, identical ? 1 : 0);
  return identical;
}

struct Criterion {
  int number;
  const char* title;
  bool (*run)();
};

const Criterion kCriteria[] = {
    {1, "oracle equivalence vs brute-force enumeration", criterion_1},
    {2, "planner reductions at zero bonus", criterion_2},
    {3, "deterministic sandwich on planner outputs", criterion_3},
    {4, "statistical optimism/pessimism bounds", criterion_4},
    {5, "shield safety on the inventory environment", criterion_5},
    {6, "meta-rollout structure and stitching equivalence", criterion_6},
    {7, "comparative violations and regret vs plain optimism", criterion_7},
    {8, "sublinearity signature on the inventory environment", criterion_8},
    {9, "assumption checkers", criterion_9},
    {10, "byte-identical reruns", criterion_10},
};

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.push_back(std::atoi(argv[i]));
  int failures = 0;
  for (const auto& criterion : kCriteria) {
    if (!wanted.empty() &&
        std::find(wanted.begin(), wanted.end(), criterion.number) == wanted.end()) {
      continue;
    }
    std::printf("criterion %d: %s\n", criterion.number, criterion.title);
    std::fflush(stdout);
    bool pass = false;
    try {
      pass = criterion.run();
    } catch (const std::exception& err) {
      std::printf("  exception: %s\n", err.what());
    }
    std::printf("criterion %d: %s\n", criterion.number, pass ? "PASS" : "FAIL");
    std::fflush(stdout);
    if (!pass) ++failures;
  }
  return failures;
}
