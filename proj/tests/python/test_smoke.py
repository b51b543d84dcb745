"""Smoke tests for the python bindings."""

import json

import pytest

import metashield as ms


@pytest.fixture(scope="module")
def inventory():
    return ms.build_inventory_mdp()


def test_inventory_shape(inventory):
    assert inventory.num_states == 6
    assert inventory.num_actions == 6
    assert inventory.horizon == 20
    inventory.validate()


def test_mdp_json_round_trip(inventory):
    doc = json.loads(inventory.to_json())
    assert doc["S"] == 6 and doc["H"] == 20
    back = ms.TabularMdp.from_json(inventory.to_json())
    assert back.p(0, 1, 0) == pytest.approx(inventory.p(0, 1, 0))


def test_exact_planning(inventory):
    opt = ms.exact_optimal(inventory)
    ev = ms.exact_policy_eval(inventory, opt.policy)
    assert opt.v.at(0, 0) == pytest.approx(ev.v.at(0, 0))
    # terminal convention: the last stage carries no value
    assert opt.v.at(inventory.horizon - 1, 0) == 0.0
    assert 0.0 <= opt.v.at(0, 0) <= inventory.horizon


def test_planners_reduce_to_oracles(inventory):
    counts = ms.Counts(6, 6)
    params = ms.BonusParams()
    params.num_states, params.num_actions, params.horizon = 6, 6, 20
    opts = ms.PlanningOptions()
    opts.bonus_override = 0.0
    plan = ms.optimistic_plan(ms.exact_model(inventory), counts, params, opts)
    opt = ms.exact_optimal(inventory)
    assert plan.v.at(0, 0) == pytest.approx(opt.v.at(0, 0), abs=1e-9)


def test_run_cell_deterministic(inventory):
    cfg = ms.AgentConfig()
    a = ms.run_cell(inventory, ms.AgentKind.UNIF_CONSERV_UCBVI, cfg, 0.3, 7, 20, 10)
    b = ms.run_cell(inventory, ms.AgentKind.UNIF_CONSERV_UCBVI, cfg, 0.3, 7, 20, 10)
    assert ms.metrics_to_csv(a) == ms.metrics_to_csv(b)
    assert len(a.episodes) == 20
    assert a.episodes[0].episode == 1


def test_violation_monitor(inventory):
    cfg = ms.AgentConfig()
    log = ms.run_cell(inventory, ms.AgentKind.BASELINE_ONLY, cfg, 0.3, 1, 10, 5)
    assert log.total_violations() == 0
    assert all(rec.max_deficit == 0.0 for rec in log.episodes)


def test_check_env_fields(inventory):
    report = ms.check_env(inventory)
    doc = json.loads(report.to_json())
    assert doc["upsilon"] == "unbounded"
    assert doc["eta_min"] > 0.0
    assert not doc["assumption1_pass"]


def test_random_ergodic_builder():
    params = ms.RandomMdpParams()
    params.num_states = 3
    params.num_actions = 2
    params.horizon = 12
    params.min_transition_prob = 0.1
    params.seed = 5
    mdp = ms.build_random_ergodic_mdp(params)
    for target in range(3):
        hit = ms.max_expected_hitting_time(mdp, target)
        assert hit is not None and hit <= 6.0


def test_run_experiment_json(tmp_path):
    config = {
        "env": {"kind": "random_ergodic", "S": 3, "A": 2, "H": 12,
                "min_transition_prob": 0.1, "seed": 5},
        "agents": ["unif_conserv_ucbvi", "baseline_only"],
        "total_episodes": 30,
        "eta_values": [0.4],
        "seeds": [1],
        "warm_start_episodes": 5,
        "output_dir": str(tmp_path / "out"),
    }
    result = ms.run_experiment_json(json.dumps(config))
    assert result["failures"] == []
    assert len(result["cell_files"]) == 2
    aggregate = json.loads((tmp_path / "out" / "aggregate.json").read_text())
    assert len(aggregate["groups"]) == 2


def test_warm_start_and_counts():
    params = ms.RandomMdpParams()
    params.num_states = 3
    params.num_actions = 2
    params.horizon = 12
    params.min_transition_prob = 0.1
    params.seed = 5
    mdp = ms.build_random_ergodic_mdp(params)
    rng = ms.Rng(3)
    data = ms.warm_start_dataset(mdp, 5, rng)
    assert len(data) == 5
    counts = ms.Counts(3, 2)
    for rollout in data:
        counts.update_rollout(rollout)
    assert counts.total_steps() == 5 * 12
