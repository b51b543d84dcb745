#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "metashield/harness.hpp"

namespace py = pybind11;
using namespace metashield;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Tabular conservative-exploration agents and experiment tools";

  py::class_<TabularMdp>(m, "TabularMdp")
      .def(py::init(&TabularMdp::zeros), py::arg("num_states"), py::arg("num_actions"),
           py::arg("horizon"), py::arg("initial_state") = 0)
      .def_readwrite("num_states", &TabularMdp::num_states)
      .def_readwrite("num_actions", &TabularMdp::num_actions)
      .def_readwrite("horizon", &TabularMdp::horizon)
      .def_readwrite("initial_state", &TabularMdp::initial_state)
      .def("p", py::overload_cast<int, int, int>(&TabularMdp::p, py::const_))
      .def("set_p", [](TabularMdp& self, int s, int a, int s2, double v) {
        self.p(s, a, s2) = v;
      })
      .def("r", py::overload_cast<int, int>(&TabularMdp::r, py::const_))
      .def("set_r", [](TabularMdp& self, int s, int a, double v) { self.r(s, a) = v; })
      .def("validate", &TabularMdp::validate)
      .def("to_json", &TabularMdp::to_json, py::arg("indent") = -1)
      .def_static("from_json", &TabularMdp::from_json);

  py::class_<DeterministicPolicy>(m, "DeterministicPolicy")
      .def_static("constant", &DeterministicPolicy::constant, py::arg("horizon"),
                  py::arg("num_states"), py::arg("action") = 0)
      .def("action", py::overload_cast<int, int>(&DeterministicPolicy::action, py::const_))
      .def("set_action", [](DeterministicPolicy& self, int t, int s, int a) {
        self.action(t, s) = a;
      })
      .def_readonly("horizon", &DeterministicPolicy::horizon)
      .def_readonly("num_states", &DeterministicPolicy::num_states);

  py::class_<ValueTable>(m, "ValueTable")
      .def("at", py::overload_cast<int, int>(&ValueTable::at, py::const_))
      .def_readonly("horizon", &ValueTable::horizon)
      .def_readonly("num_states", &ValueTable::num_states);

  py::class_<QTable>(m, "QTable")
      .def("at", py::overload_cast<int, int, int>(&QTable::at, py::const_))
      .def_readonly("horizon", &QTable::horizon);

  py::class_<Transition>(m, "Transition")
      .def_readonly("t", &Transition::t)
      .def_readonly("s", &Transition::s)
      .def_readonly("a", &Transition::a)
      .def_readonly("r", &Transition::r)
      .def_readonly("s_next", &Transition::s_next);

  py::class_<StepAnnotation>(m, "StepAnnotation")
      .def_readonly("used_ucb", &StepAnnotation::used_ucb)
      .def_readonly("zeta", &StepAnnotation::zeta)
      .def_readonly("target", &StepAnnotation::target);

  py::class_<Rollout>(m, "Rollout")
      .def_readonly("episode_index", &Rollout::episode_index)
      .def_readonly("steps", &Rollout::steps)
      .def_readonly("annotations", &Rollout::annotations)
      .def("episode_return", &Rollout::episode_return)
      .def("chained", &Rollout::chained);

  py::class_<Rng>(m, "Rng").def(py::init<std::uint64_t>());

  py::class_<PolicyEvalResult>(m, "PolicyEvalResult")
      .def_readonly("v", &PolicyEvalResult::v)
      .def_readonly("q", &PolicyEvalResult::q);
  py::class_<OptimalResult>(m, "OptimalResult")
      .def_readonly("v", &OptimalResult::v)
      .def_readonly("q", &OptimalResult::q)
      .def_readonly("policy", &OptimalResult::policy);

  m.def("exact_policy_eval", &exact_policy_eval);
  m.def("exact_optimal", &exact_optimal);
  m.def("sample_rollout", &sample_rollout, py::arg("mdp"), py::arg("act"), py::arg("rng"));
  m.def(
      "max_expected_hitting_time",
      [](const TabularMdp& mdp, int target, int max_iterations) {
        return max_expected_hitting_time(mdp, target, max_iterations);
      },
      py::arg("mdp"), py::arg("target"), py::arg("max_iterations") = 10000);
  m.def("policy_gap", &policy_gap);

  py::class_<InventoryParams>(m, "InventoryParams")
      .def(py::init<>())
      .def_readwrite("capacity", &InventoryParams::capacity)
      .def_readwrite("fixed_order_cost", &InventoryParams::fixed_order_cost)
      .def_readwrite("unit_order_cost", &InventoryParams::unit_order_cost)
      .def_readwrite("holding_cost", &InventoryParams::holding_cost)
      .def_readwrite("revenue_per_unit", &InventoryParams::revenue_per_unit)
      .def_readwrite("demand_max", &InventoryParams::demand_max)
      .def_readwrite("horizon", &InventoryParams::horizon)
      .def_readwrite("initial_state", &InventoryParams::initial_state);
  py::class_<RandomMdpParams>(m, "RandomMdpParams")
      .def(py::init<>())
      .def_readwrite("num_states", &RandomMdpParams::num_states)
      .def_readwrite("num_actions", &RandomMdpParams::num_actions)
      .def_readwrite("horizon", &RandomMdpParams::horizon)
      .def_readwrite("min_transition_prob", &RandomMdpParams::min_transition_prob)
      .def_readwrite("seed", &RandomMdpParams::seed);

  m.def("build_inventory_mdp", &build_inventory_mdp,
        py::arg("params") = InventoryParams{});
  m.def("build_random_ergodic_mdp", &build_random_ergodic_mdp);
  m.def("warm_start_dataset", &warm_start_dataset);

  py::class_<Counts>(m, "Counts")
      .def(py::init<int, int>())
      .def("update", py::overload_cast<const Transition&>(&Counts::update))
      .def("update_rollout", py::overload_cast<const Rollout&>(&Counts::update))
      .def("n", &Counts::n)
      .def("total_steps", &Counts::total_steps)
      .def("to_json", &Counts::to_json, py::arg("indent") = -1)
      .def_static("from_json", &Counts::from_json);

  py::class_<EmpiricalModel>(m, "EmpiricalModel")
      .def("p", &EmpiricalModel::p)
      .def("r", &EmpiricalModel::r);
  py::class_<BonusParams>(m, "BonusParams")
      .def(py::init<>())
      .def_readwrite("num_states", &BonusParams::num_states)
      .def_readwrite("num_actions", &BonusParams::num_actions)
      .def_readwrite("horizon", &BonusParams::horizon)
      .def_readwrite("delta", &BonusParams::delta)
      .def_readwrite("planned_total_episodes", &BonusParams::planned_total_episodes);

  m.def("empirical_model", &empirical_model);
  m.def("exact_model", &exact_model);
  m.def("log_term", &log_term);
  m.def("bonus", &bonus);

  py::class_<PlanningOptions>(m, "PlanningOptions")
      .def(py::init<>())
      .def_readwrite("gamma", &PlanningOptions::gamma)
      .def_readwrite("clip_values", &PlanningOptions::clip_values)
      .def_readwrite("bonus_override", &PlanningOptions::bonus_override);
  py::class_<PlannerOutput>(m, "PlannerOutput")
      .def_readonly("q", &PlannerOutput::q)
      .def_readonly("v", &PlannerOutput::v)
      .def_readonly("policy", &PlannerOutput::policy);
  py::class_<EvalOutput>(m, "EvalOutput")
      .def_readonly("q", &EvalOutput::q)
      .def_readonly("v", &EvalOutput::v);

  m.def("optimistic_plan", &optimistic_plan, py::arg("model"), py::arg("counts"),
        py::arg("params"), py::arg("options") = PlanningOptions{});
  m.def("conservative_plan", &conservative_plan, py::arg("model"), py::arg("counts"),
        py::arg("params"), py::arg("options") = PlanningOptions{});
  m.def("optimistic_eval", &optimistic_eval, py::arg("model"), py::arg("counts"),
        py::arg("params"), py::arg("policy"), py::arg("options") = PlanningOptions{});

  py::enum_<AgentKind>(m, "AgentKind")
      .value("UNIF_CONSERV_UCBVI", AgentKind::UnifConservUcbvi)
      .value("UCBVI", AgentKind::Ucbvi)
      .value("BASELINE_ONLY", AgentKind::BaselineOnly);

  py::class_<AgentConfig>(m, "AgentConfig")
      .def(py::init<>())
      .def_readwrite("eta", &AgentConfig::eta)
      .def_readwrite("delta", &AgentConfig::delta)
      .def_readwrite("strict_gate", &AgentConfig::strict_gate)
      .def_readwrite("literal_eq4", &AgentConfig::literal_eq4)
      .def_readwrite("use_full_data_for_ucb", &AgentConfig::use_full_data_for_ucb)
      .def_readwrite("max_episodes_per_meta", &AgentConfig::max_episodes_per_meta)
      .def_readwrite("gamma", &AgentConfig::gamma)
      .def_readwrite("clip_values", &AgentConfig::clip_values)
      .def_readwrite("planned_total_episodes", &AgentConfig::planned_total_episodes)
      .def_readwrite("bonus_override", &AgentConfig::bonus_override);

  py::class_<ViolationReport>(m, "ViolationReport")
      .def_readonly("max_deficit", &ViolationReport::max_deficit)
      .def_readonly("violated", &ViolationReport::violated);
  m.def("true_violation", &true_violation);

  py::class_<EpisodeRecord>(m, "EpisodeRecord")
      .def_readonly("episode", &EpisodeRecord::episode)
      .def_readonly("ret", &EpisodeRecord::ret)
      .def_readonly("regret_increment", &EpisodeRecord::regret_increment)
      .def_readonly("violated", &EpisodeRecord::violated)
      .def_readonly("max_deficit", &EpisodeRecord::max_deficit)
      .def_readonly("meta_index", &EpisodeRecord::meta_index)
      .def_readonly("episode_in_meta", &EpisodeRecord::episode_in_meta)
      .def_readonly("ucb_steps", &EpisodeRecord::ucb_steps)
      .def_readonly("max_zeta", &EpisodeRecord::max_zeta);

  py::class_<MetricsLog>(m, "MetricsLog")
      .def_readonly("eta", &MetricsLog::eta)
      .def_readonly("seed", &MetricsLog::seed)
      .def_readonly("optimal_value", &MetricsLog::optimal_value)
      .def_readonly("episodes", &MetricsLog::episodes)
      .def_readonly("completed_meta_episodes", &MetricsLog::completed_meta_episodes)
      .def_readonly("completed_meta_lengths", &MetricsLog::completed_meta_lengths)
      .def_readonly("zeta_overshoot_episodes", &MetricsLog::zeta_overshoot_episodes)
      .def_readonly("aborted_at_episode", &MetricsLog::aborted_at_episode)
      .def_readonly("abort_reason", &MetricsLog::abort_reason)
      .def("cumulative_regret", &MetricsLog::cumulative_regret)
      .def("total_violations", &MetricsLog::total_violations);

  py::class_<CheckReport>(m, "CheckReport")
      .def_readonly("upsilon_bounded", &CheckReport::upsilon_bounded)
      .def_readonly("upsilon", &CheckReport::upsilon)
      .def_readonly("assumption1_pass", &CheckReport::assumption1_pass)
      .def_readonly("eta_min_optimal", &CheckReport::eta_min_optimal)
      .def_readonly("eta_min_sampled", &CheckReport::eta_min_sampled)
      .def_readonly("eta_min", &CheckReport::eta_min)
      .def("to_json", &CheckReport::to_json, py::arg("indent") = 2);

  m.def("check_env", &check_env, py::arg("mdp"), py::arg("eta") = std::nullopt,
        py::arg("sampled_policies") = 32, py::arg("seed") = 7u);
  m.def("run_cell", &run_cell, py::arg("mdp"), py::arg("kind"), py::arg("config"),
        py::arg("eta"), py::arg("seed"), py::arg("total_episodes"),
        py::arg("warm_start_episodes"), py::arg("trace") = TraceSink{});
  m.def("metrics_to_csv", &metrics_to_csv);
  m.def("cell_summary_json", &cell_summary_json, py::arg("log"), py::arg("indent") = 2);

  py::class_<EnvSpec>(m, "EnvSpec")
      .def_static("from_json", &EnvSpec::from_json)
      .def_static("inventory_default", &EnvSpec::inventory_default)
      .def("build", &EnvSpec::build)
      .def("to_json", &EnvSpec::to_json, py::arg("indent") = 2);

  m.def(
      "run_experiment_json",
      [](const std::string& config_json) {
        const auto result = run_experiment(ExperimentConfig::from_json(config_json));
        py::dict out;
        out["cell_files"] = result.cell_files;
        out["aggregate_file"] = result.aggregate_file;
        py::list failures;
        for (const auto& f : result.failures) {
          py::dict fd;
          fd["cell"] = f.cell;
          fd["error"] = f.error;
          failures.append(fd);
        }
        out["failures"] = failures;
        return out;
      },
      py::arg("config_json"),
      "Run a full experiment grid from a JSON config document; returns the "
      "written cell files and per-cell failures.");
}
