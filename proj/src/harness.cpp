#include "metashield/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace metashield {

namespace {

std::string fmt_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

std::string eta_tag(double eta) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", eta);
  std::string s = buf;
  for (char& c : s) {
    if (c == '.') c = 'p';
    if (c == '-') c = 'm';
  }
  return s;
}

}  // namespace

TabularMdp EnvSpec::build() const {
  if (kind == "inventory") return build_inventory_mdp(inventory);
  if (kind == "random_ergodic") return build_random_ergodic_mdp(random);
  if (kind == "mdp") {
    if (!inline_mdp) throw std::invalid_argument("EnvSpec: missing inline mdp");
    TabularMdp copy = *inline_mdp;
    copy.validate();
    return copy;
  }
  throw std::invalid_argument("EnvSpec: unknown kind '" + kind + "'");
}

EnvSpec EnvSpec::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  EnvSpec spec;
  if (!j.contains("kind")) {
    if (j.contains("P")) {
      spec.kind = "mdp";
      spec.inline_mdp = TabularMdp::from_json(text);
      return spec;
    }
    throw std::invalid_argument("EnvSpec: missing 'kind'");
  }
  spec.kind = j.at("kind").get<std::string>();
  if (spec.kind == "inventory") {
    auto& p = spec.inventory;
    p.capacity = j.value("capacity", p.capacity);
    p.fixed_order_cost = j.value("fixed_order_cost", p.fixed_order_cost);
    p.unit_order_cost = j.value("unit_order_cost", p.unit_order_cost);
    p.holding_cost = j.value("holding_cost", p.holding_cost);
    p.revenue_per_unit = j.value("revenue_per_unit", p.revenue_per_unit);
    p.demand_max = j.value("demand_max", p.capacity);
    p.horizon = j.value("horizon", p.horizon);
    p.initial_state = j.value("initial_state", p.initial_state);
  } else if (spec.kind == "random_ergodic") {
    auto& p = spec.random;
    p.num_states = j.value("S", p.num_states);
    p.num_actions = j.value("A", p.num_actions);
    p.horizon = j.value("H", p.horizon);
    p.min_transition_prob = j.value("min_transition_prob", p.min_transition_prob);
    p.seed = j.value("seed", p.seed);
    p.max_build_attempts = j.value("max_build_attempts", p.max_build_attempts);
  } else if (spec.kind == "mdp") {
    spec.inline_mdp = TabularMdp::from_json(j.at("mdp").dump());
  } else {
    throw std::invalid_argument("EnvSpec: unknown kind '" + spec.kind + "'");
  }
  return spec;
}

std::string EnvSpec::to_json(int indent) const {
  nlohmann::json j;
  j["kind"] = kind;
  if (kind == "inventory") {
    j["capacity"] = inventory.capacity;
    j["fixed_order_cost"] = inventory.fixed_order_cost;
    j["unit_order_cost"] = inventory.unit_order_cost;
    j["holding_cost"] = inventory.holding_cost;
    j["revenue_per_unit"] = inventory.revenue_per_unit;
    j["demand_max"] = inventory.demand_max;
    j["horizon"] = inventory.horizon;
    j["initial_state"] = inventory.initial_state;
  } else if (kind == "random_ergodic") {
    j["S"] = random.num_states;
    j["A"] = random.num_actions;
    j["H"] = random.horizon;
    j["min_transition_prob"] = random.min_transition_prob;
    j["seed"] = random.seed;
    j["max_build_attempts"] = random.max_build_attempts;
  } else if (kind == "mdp" && inline_mdp) {
    j["mdp"] = nlohmann::json::parse(inline_mdp->to_json());
  }
  return j.dump(indent);
}

EnvSpec EnvSpec::inventory_default() {
  EnvSpec spec;
  spec.kind = "inventory";
  return spec;
}

namespace {

AgentConfig agent_config_from_json(const nlohmann::json& j) {
  AgentConfig c;
  c.strict_gate = j.value("strict_gate", c.strict_gate);
  c.literal_eq4 = j.value("literal_eq4", c.literal_eq4);
  c.use_full_data_for_ucb = j.value("use_full_data_for_ucb", c.use_full_data_for_ucb);
  c.max_episodes_per_meta = j.value("max_episodes_per_meta", c.max_episodes_per_meta);
  c.gamma = j.value("gamma", c.gamma);
  c.clip_values = j.value("clip_values", c.clip_values);
  return c;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  ExperimentConfig cfg;
  cfg.env = EnvSpec::from_json(j.at("env").dump());
  for (const auto& a : j.at("agents")) {
    AgentSetup setup;
    if (a.is_string()) {
      setup.kind = agent_kind_from_name(a.get<std::string>());
    } else {
      setup.kind = agent_kind_from_name(a.at("kind").get<std::string>());
      setup.config = agent_config_from_json(a);
      setup.label = a.value("label", std::string());
    }
    cfg.agents.push_back(setup);
  }
  cfg.total_episodes = j.at("total_episodes").get<long long>();
  cfg.eta_values = j.at("eta_values").get<std::vector<double>>();
  cfg.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  cfg.warm_start_episodes = j.value("warm_start_episodes", 0LL);
  cfg.delta = j.value("delta", 0.1);
  cfg.output_dir = j.value("output_dir", std::string("out"));
  cfg.trace = j.value("trace", false);
  cfg.workers = j.value("workers", 1);
  return cfg;
}

void ExperimentConfig::validate() const {
  if (total_episodes < 1) throw std::invalid_argument("config: total_episodes must be >= 1");
  if (seeds.empty()) throw std::invalid_argument("config: seeds must be nonempty");
  if (agents.empty()) throw std::invalid_argument("config: agents must be nonempty");
  if (eta_values.empty()) throw std::invalid_argument("config: eta_values must be nonempty");
  for (double eta : eta_values) {
    if (eta <= 0.0) throw std::invalid_argument("config: every eta must be > 0");
  }
  if (warm_start_episodes < 0) throw std::invalid_argument("config: warm_start_episodes < 0");
  if (delta <= 0.0 || delta >= 1.0) throw std::invalid_argument("config: delta in (0,1)");
}

CheckReport check_env(const TabularMdp& mdp, std::optional<double> eta,
                      int sampled_policies, std::uint64_t seed) {
  mdp.validate();
  CheckReport report;
  report.num_states = mdp.num_states;
  report.horizon = mdp.horizon;
  report.h_half = mdp.horizon / 2.0;
  report.upsilon_bounded = true;
  for (int target = 0; target < mdp.num_states; ++target) {
    const auto hit = max_expected_hitting_time(mdp, target);
    if (hit) {
      report.upsilon_per_target.push_back(*hit);
      report.upsilon = std::max(report.upsilon, *hit);
    } else {
      report.upsilon_per_target.push_back(-1.0);
      report.upsilon_bounded = false;
    }
  }
  report.assumption1_pass = report.upsilon_bounded && report.upsilon <= report.h_half;

  report.eta_min_optimal = 2.0 * policy_gap(mdp, exact_optimal(mdp).policy);
  Rng rng(mix_seed(seed, 0x9c));
  for (int i = 0; i < sampled_policies; ++i) {
    DeterministicPolicy pi = DeterministicPolicy::constant(mdp.horizon, mdp.num_states, 0);
    for (int& a : pi.actions) a = rng.uniform_int(mdp.num_actions);
    report.eta_min_sampled = std::max(report.eta_min_sampled, 2.0 * policy_gap(mdp, pi));
  }
  report.eta_min = std::max(report.eta_min_optimal, report.eta_min_sampled);
  if (eta) {
    report.eta = eta;
    report.assumption2_pass = report.eta_min <= *eta;
  }
  return report;
}

std::string CheckReport::to_json(int indent) const {
  nlohmann::json j;
  j["S"] = num_states;
  j["H"] = horizon;
  j["h_half"] = h_half;
  if (upsilon_bounded) {
    j["upsilon"] = upsilon;
  } else {
    j["upsilon"] = "unbounded";
  }
  auto per_target = nlohmann::json::array();
  for (double u : upsilon_per_target) {
    if (u < 0.0) {
      per_target.push_back("unbounded");
    } else {
      per_target.push_back(u);
    }
  }
  j["upsilon_per_target"] = std::move(per_target);
  j["assumption1_pass"] = assumption1_pass;
  j["eta_min_optimal"] = eta_min_optimal;
  j["eta_min_sampled"] = eta_min_sampled;
  j["eta_min"] = eta_min;
  if (eta) {
    j["eta"] = *eta;
    j["assumption2_pass"] = assumption2_pass;
  }
  return j.dump(indent);
}

MetricsLog run_cell(const TabularMdp& mdp, AgentKind kind, AgentConfig config,
                    double eta, std::uint64_t seed, long long total_episodes,
                    long long warm_start_episodes, const TraceSink& trace) {
  config.eta = eta;
  config.planned_total_episodes = std::max<long long>(1, total_episodes);
  Rng rng(mix_seed(seed, 0xce11));
  MetricsLog log = run_agent(kind, mdp, config, total_episodes, warm_start_episodes,
                             rng, trace);
  log.seed = seed;
  return log;
}

std::string metrics_to_csv(const MetricsLog& log) {
  std::ostringstream out;
  out << "episode,agent,seed,eta,ret,cum_regret,violated,max_deficit,meta_index,"
         "meta_episode_n,ucb_steps\n";
  const std::string agent = agent_kind_name(log.agent);
  double cum_regret = 0.0;
  for (const auto& rec : log.episodes) {
    cum_regret += rec.regret_increment;
    out << rec.episode << ',' << agent << ',' << log.seed << ',' << fmt_double(log.eta)
        << ',' << fmt_double(rec.ret) << ',' << fmt_double(cum_regret) << ','
        << (rec.violated ? 1 : 0) << ',' << fmt_double(rec.max_deficit) << ','
        << rec.meta_index << ',' << rec.episode_in_meta << ',' << rec.ucb_steps << '\n';
  }
  return out.str();
}

namespace {

nlohmann::json cell_summary(const MetricsLog& log) {
  nlohmann::json j;
  j["agent"] = agent_kind_name(log.agent);
  j["label"] = log.label.empty() ? agent_kind_name(log.agent) : log.label;
  j["seed"] = log.seed;
  j["eta"] = log.eta;
  j["episodes"] = log.episodes.size();
  j["warm_start_episodes"] = log.warm_start_episodes;
  j["optimal_value"] = log.optimal_value;
  j["cumulative_regret"] = log.cumulative_regret();
  j["total_violations"] = log.total_violations();
  double mean_return = 0.0;
  for (const auto& rec : log.episodes) mean_return += rec.ret;
  if (!log.episodes.empty()) mean_return /= static_cast<double>(log.episodes.size());
  j["mean_return"] = mean_return;
  j["completed_meta_episodes"] = log.completed_meta_episodes;
  nlohmann::json hist = nlohmann::json::object();
  for (const auto& [len, count] : log.meta_length_histogram()) {
    hist[std::to_string(len)] = count;
  }
  j["meta_length_histogram"] = std::move(hist);
  j["zeta_overshoot_episodes"] = log.zeta_overshoot_episodes;
  if (log.aborted_at_episode) {
    j["aborted_at_episode"] = *log.aborted_at_episode;
    j["abort_reason"] = log.abort_reason;
  } else {
    j["aborted_at_episode"] = nullptr;
  }
  return j;
}

}  // namespace

std::string cell_summary_json(const MetricsLog& log, int indent) {
  return cell_summary(log).dump(indent);
}

std::string aggregate_summary_json(const std::vector<MetricsLog>& logs, int max_points,
                                   int indent) {
  // group cells by (agent, eta)
  struct Group {
    std::vector<const MetricsLog*> cells;
  };
  std::map<std::pair<std::string, double>, Group> groups;
  for (const auto& log : logs) {
    const std::string label = log.label.empty() ? agent_kind_name(log.agent) : log.label;
    groups[{label, log.eta}].cells.push_back(&log);
  }
  nlohmann::json j;
  auto arr = nlohmann::json::array();
  for (const auto& [key, group] : groups) {
    nlohmann::json g;
    g["agent"] = key.first;
    g["eta"] = key.second;
    std::size_t min_len = SIZE_MAX;
    for (const auto* log : group.cells) {
      min_len = std::min(min_len, log->episodes.size());
    }
    if (min_len == SIZE_MAX) min_len = 0;
    // seed-averaged cumulative regret, downsampled
    std::vector<double> mean_cum(min_len, 0.0);
    for (const auto* log : group.cells) {
      double cum = 0.0;
      for (std::size_t i = 0; i < min_len; ++i) {
        cum += log->episodes[i].regret_increment;
        mean_cum[i] += cum;
      }
    }
    const double n_cells = static_cast<double>(group.cells.size());
    for (double& v : mean_cum) v /= n_cells;
    std::size_t stride = min_len > static_cast<std::size_t>(max_points)
                             ? (min_len + max_points - 1) / max_points
                             : 1;
    auto episodes = nlohmann::json::array();
    auto curve = nlohmann::json::array();
    for (std::size_t i = stride - 1; i < min_len; i += stride) {
      episodes.push_back(i + 1);
      curve.push_back(mean_cum[i]);
    }
    if (min_len > 0 && (min_len - 1) % stride != stride - 1) {
      episodes.push_back(min_len);
      curve.push_back(mean_cum[min_len - 1]);
    }
    g["episodes"] = std::move(episodes);
    g["mean_cum_regret"] = std::move(curve);
    auto seeds = nlohmann::json::array();
    auto violations = nlohmann::json::array();
    auto final_regret = nlohmann::json::array();
    double mean_violations = 0.0;
    for (const auto* log : group.cells) {
      seeds.push_back(log->seed);
      violations.push_back(log->total_violations());
      final_regret.push_back(log->cumulative_regret());
      mean_violations += static_cast<double>(log->total_violations());
    }
    g["seeds"] = std::move(seeds);
    g["violations_per_seed"] = std::move(violations);
    g["mean_violations"] = mean_violations / n_cells;
    g["final_cum_regret_per_seed"] = std::move(final_regret);
    arr.push_back(std::move(g));
  }
  j["groups"] = std::move(arr);
  return j.dump(indent);
}

ExperimentResult run_experiment(const ExperimentConfig& config_in) {
  ExperimentConfig config = config_in;
  if (const char* dir = std::getenv("METASHIELD_OUTPUT_DIR")) config.output_dir = dir;
  if (const char* w = std::getenv("METASHIELD_WORKERS")) config.workers = std::atoi(w);
  config.validate();

  const TabularMdp mdp = config.env.build();
  if (!config.force) {
    const CheckReport report = check_env(mdp);
    if (!report.assumption1_pass) {
      throw std::runtime_error(
          "Assumption 1 check failed (worst-case expected hitting time above H/2 or "
          "unbounded); pass force=true / --force to run anyway");
    }
  }

  std::filesystem::create_directories(config.output_dir);

  struct Cell {
    AgentSetup setup;
    double eta;
    std::uint64_t seed;
    std::string name;
    std::string label;
  };
  std::vector<std::string> labels;
  {
    std::map<std::string, int> used;
    for (const auto& setup : config.agents) {
      std::string label = setup.label.empty() ? agent_kind_name(setup.kind) : setup.label;
      const int n = ++used[label];
      if (n > 1) label += "_" + std::to_string(n);
      labels.push_back(label);
    }
  }
  std::vector<Cell> cells;
  for (std::size_t ai = 0; ai < config.agents.size(); ++ai) {
    const auto& setup = config.agents[ai];
    for (double eta : config.eta_values) {
      for (std::uint64_t seed : config.seeds) {
        std::ostringstream name;
        name << labels[ai] << "_eta" << eta_tag(eta) << "_seed" << seed;
        cells.push_back(Cell{setup, eta, seed, name.str(), labels[ai]});
      }
    }
  }

  ExperimentResult result;
  std::vector<MetricsLog> logs(cells.size());
  std::vector<std::string> errors(cells.size());
  std::vector<char> ok(cells.size(), 0);

  std::atomic<std::size_t> next{0};
  const int n_workers = std::max(1, std::min<int>(config.workers,
                                                  static_cast<int>(cells.size())));
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      const Cell& cell = cells[i];
      try {
        AgentConfig agent_cfg = cell.setup.config;
        agent_cfg.delta = config.delta;
        std::ofstream trace_file;
        TraceSink sink;
        if (config.trace) {
          trace_file.open(std::filesystem::path(config.output_dir) /
                          (cell.name + ".trace.jsonl"));
          sink = [&trace_file](const Rollout& rollout) {
            nlohmann::json line;
            line["episode"] = rollout.episode_index;
            auto steps = nlohmann::json::array();
            for (std::size_t t = 0; t < rollout.steps.size(); ++t) {
              const auto& step = rollout.steps[t];
              nlohmann::json s;
              s["t"] = step.t;
              s["s"] = step.s;
              s["a"] = step.a;
              s["r"] = step.r;
              s["s_next"] = step.s_next;
              if (t < rollout.annotations.size()) {
                s["used_ucb"] = rollout.annotations[t].used_ucb;
                s["zeta"] = rollout.annotations[t].zeta;
                s["target"] = rollout.annotations[t].target;
              }
              steps.push_back(std::move(s));
            }
            line["steps"] = std::move(steps);
            trace_file << line.dump() << '\n';
          };
        }
        MetricsLog log = run_cell(mdp, cell.setup.kind, agent_cfg, cell.eta, cell.seed,
                                  config.total_episodes, config.warm_start_episodes,
                                  sink);
        log.label = cell.label;
        const auto csv_path =
            std::filesystem::path(config.output_dir) / (cell.name + ".csv");
        std::ofstream csv(csv_path);
        csv << metrics_to_csv(log);
        std::ofstream summary(std::filesystem::path(config.output_dir) /
                              (cell.name + ".summary.json"));
        summary << cell_summary_json(log) << '\n';
        // A cap abort is a per-cell failure but keeps its partial outputs.
        if (log.aborted_at_episode) {
          errors[i] = log.abort_reason;
        } else {
          ok[i] = 1;
        }
        logs[i] = std::move(log);
      } catch (const std::exception& err) {
        errors[i] = err.what();
      }
    }
  };
  std::vector<std::thread> threads;
  threads.reserve(n_workers);
  for (int w = 0; w < n_workers; ++w) threads.emplace_back(worker);
  for (auto& t : threads) t.join();

  std::vector<MetricsLog> good_logs;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (ok[i]) {
      result.cell_files.push_back(cells[i].name + ".csv");
      good_logs.push_back(logs[i]);
    } else {
      result.failures.push_back(CellFailure{cells[i].name, errors[i]});
    }
  }
  const auto aggregate_path = std::filesystem::path(config.output_dir) / "aggregate.json";
  std::ofstream aggregate(aggregate_path);
  aggregate << aggregate_summary_json(good_logs) << '\n';
  result.aggregate_file = aggregate_path.string();
  return result;
}

}  // namespace metashield
