#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "metashield/envs.hpp"
#include "metashield/shield.hpp"

namespace metashield {

/// Environment specification, JSON form:
///   {"kind":"inventory", ...InventoryParams fields...}
///   {"kind":"random_ergodic", ...RandomMdpParams fields...}
/// A raw TabularMdp document ({"S","A","H","s1","P","R"}) is accepted too.
struct EnvSpec {
  std::string kind;  // "inventory" | "random_ergodic" | "mdp"
  InventoryParams inventory;
  RandomMdpParams random;
  std::optional<TabularMdp> inline_mdp;

  TabularMdp build() const;
  static EnvSpec from_json(const std::string& text);
  std::string to_json(int indent = 2) const;
  static EnvSpec inventory_default();
};

struct AgentSetup {
  AgentKind kind = AgentKind::UnifConservUcbvi;
  AgentConfig config;  // eta / planned_total_episodes filled per cell
  // Cell label; defaults to the kind name. Distinguishes two setups of the
  // same kind (say, with and without the strict gate) in file names and
  // aggregates.
  std::string label;
};

struct ExperimentConfig {
  EnvSpec env;
  std::vector<AgentSetup> agents;
  long long total_episodes = 1;
  std::vector<double> eta_values;
  std::vector<std::uint64_t> seeds;
  long long warm_start_episodes = 0;
  double delta = 0.1;
  std::string output_dir = "out";
  bool trace = false;
  bool force = false;
  int workers = 1;

  static ExperimentConfig from_json(const std::string& text);
  void validate() const;
};

struct CheckReport {
  int num_states = 0;
  int horizon = 0;
  double h_half = 0.0;
  bool upsilon_bounded = false;
  double upsilon = 0.0;  // meaningful when bounded
  std::vector<double> upsilon_per_target;  // -1 marks unbounded targets
  bool assumption1_pass = false;
  double eta_min_optimal = 0.0;
  double eta_min_sampled = 0.0;  // max over sampled random policies
  double eta_min = 0.0;          // max of the two above
  std::optional<double> eta;
  bool assumption2_pass = false;  // eta_min <= eta, when eta given

  std::string to_json(int indent = 2) const;
};

/// Assumption checkers: worst-case diameter vs H/2 and the minimum
/// feasible budget 2 * policy_gap, for the exact-optimal policy and a
/// deterministic sample of random policies (the assumption quantifies over
/// all policies, which is not enumerable).
CheckReport check_env(const TabularMdp& mdp, std::optional<double> eta = std::nullopt,
                      int sampled_policies = 32, std::uint64_t seed = 7u);

/// One (agent, eta, seed) experiment cell, fully determined by its inputs.
MetricsLog run_cell(const TabularMdp& mdp, AgentKind kind, AgentConfig config,
                    double eta, std::uint64_t seed, long long total_episodes,
                    long long warm_start_episodes, const TraceSink& trace = {});

/// Per-episode CSV with the fixed column set; header always present.
std::string metrics_to_csv(const MetricsLog& log);

/// Per-cell summary JSON (totals plus meta-episode statistics).
std::string cell_summary_json(const MetricsLog& log, int indent = 2);

/// Seed-averaged per-(agent, eta) curves, downsampled to at most
/// `max_points` episodes, plus per-cell totals.
std::string aggregate_summary_json(const std::vector<MetricsLog>& logs,
                                   int max_points = 2000, int indent = 2);

struct CellFailure {
  std::string cell;
  std::string error;
};

struct ExperimentResult {
  std::vector<std::string> cell_files;
  std::vector<CellFailure> failures;
  std::string aggregate_file;
};

/// Runs the full (agent x eta x seed) grid. Cells run independently on a
/// worker pool and their outputs do not depend on scheduling. Cell-level
/// errors (including meta-episode cap aborts) are collected per cell
/// without killing sibling cells.
ExperimentResult run_experiment(const ExperimentConfig& config);

}  // namespace metashield
