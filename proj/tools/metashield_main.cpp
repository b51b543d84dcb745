#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "metashield/harness.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void emit_error(const std::string& context, const std::string& message) {
  nlohmann::json j;
  j["error"] = message;
  j["context"] = context;
  std::cerr << j.dump() << std::endl;
}

int cmd_run(const std::string& config_path, bool trace, bool force, int workers) {
  metashield::ExperimentConfig config =
      metashield::ExperimentConfig::from_json(read_file(config_path));
  if (trace) config.trace = true;
  if (force) config.force = true;
  if (workers > 0) config.workers = workers;
  const metashield::ExperimentResult result = metashield::run_experiment(config);
  nlohmann::json j;
  j["cells_written"] = result.cell_files;
  j["aggregate"] = result.aggregate_file;
  j["failures"] = nlohmann::json::array();
  for (const auto& f : result.failures) {
    nlohmann::json fj;
    fj["cell"] = f.cell;
    fj["error"] = f.error;
    j["failures"].push_back(fj);
  }
  std::cout << j.dump(2) << std::endl;
  for (const auto& f : result.failures) emit_error("cell " + f.cell, f.error);
  return result.failures.empty() ? 0 : 1;
}

int cmd_check(const std::string& env_path, std::optional<double> eta) {
  const auto spec = metashield::EnvSpec::from_json(read_file(env_path));
  const auto mdp = spec.build();
  const auto report = metashield::check_env(mdp, eta);
  std::cout << report.to_json() << std::endl;
  return 0;
}

int cmd_gen_env(const std::string& kind, const std::string& out_path,
                const metashield::EnvSpec& spec, bool emit_mdp) {
  std::ofstream out(out_path);
  if (!out) throw std::runtime_error("cannot write " + out_path);
  if (emit_mdp) {
    out << spec.build().to_json(2) << '\n';
  } else {
    out << spec.to_json() << '\n';
  }
  std::cout << "wrote " << (emit_mdp ? "mdp" : kind) << " spec to " << out_path
            << std::endl;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tabular conservative-exploration experiments"};
  app.require_subcommand(1);

  std::string config_path;
  bool trace = false, force = false;
  int workers = 0;
  auto* run = app.add_subcommand("run", "Run an experiment grid from a JSON config");
  run->add_option("--config", config_path, "experiment config JSON")->required();
  run->add_flag("--trace", trace, "emit per-step trace JSONL per cell");
  run->add_flag("--force", force, "run even if the Assumption 1 check fails");
  run->add_option("--workers", workers, "parallel cell workers");

  std::string env_path;
  double eta_value = 0.0;
  auto* check = app.add_subcommand("check", "Run assumption checkers on an environment");
  check->add_option("--env", env_path, "environment spec JSON")->required();
  auto* eta_opt = check->add_option("--eta", eta_value, "exploration budget to check");

  std::string kind = "inventory";
  std::string out_path = "env.json";
  bool emit_mdp = false;
  metashield::EnvSpec gen_spec = metashield::EnvSpec::inventory_default();
  auto* gen = app.add_subcommand("gen-env", "Write an environment spec with defaults");
  gen->add_option("--kind", kind, "inventory | random_ergodic")
      ->check(CLI::IsMember({"inventory", "random_ergodic"}));
  gen->add_option("--out", out_path, "output path");
  gen->add_flag("--mdp", emit_mdp, "emit the built TabularMdp JSON instead of the spec");
  gen->add_option("--horizon", gen_spec.inventory.horizon, "horizon (both kinds)");
  gen->add_option("--capacity", gen_spec.inventory.capacity, "inventory capacity M");
  gen->add_option("--demand-max", gen_spec.inventory.demand_max,
                  "inventory demand support {0..demand_max}");
  gen->add_option("--states", gen_spec.random.num_states, "random mdp state count");
  gen->add_option("--actions", gen_spec.random.num_actions, "random mdp action count");
  gen->add_option("--min-transition-prob", gen_spec.random.min_transition_prob,
                  "random mdp transition floor");
  gen->add_option("--seed", gen_spec.random.seed, "random mdp seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(config_path, trace, force, workers);
    if (check->parsed()) {
      std::optional<double> eta;
      if (eta_opt->count() > 0) eta = eta_value;
      return cmd_check(env_path, eta);
    }
    if (gen->parsed()) {
      gen_spec.kind = kind;
      if (kind == "random_ergodic") {
        gen_spec.random.horizon = gen_spec.inventory.horizon;
      }
      return cmd_gen_env(kind, out_path, gen_spec, emit_mdp);
    }
  } catch (const std::exception& err) {
    emit_error(app.get_subcommands().empty() ? "cli"
                                             : app.get_subcommands()[0]->get_name(),
               err.what());
    return 2;
  }
  return 0;
}
