import numpy as np
import pytest

from conftest import build, constant_arms
from upliftsim.agents import Agent, AgentSpec, run_episode
from upliftsim.bases import SineBase
from upliftsim.config import parse_config
from upliftsim.context import DimensionPolicy
from upliftsim.environment import Environment, EnvironmentConfig, InteractionRecord, Oracle
from upliftsim.errors import DataError
from upliftsim.evaluation import best_arm, evaluate_trajectory, optimal_action, true_uplift
from upliftsim.fixtures import load_fixture

FIG1A_UPLIFT_AT_ORIGIN = -0.41524868524598523404  # 0.5 - (sin(0.98) + 1) / 2, mpmath
# grid quadrature (4000^2 midpoint) of E_x[max_i b_i - mean_i b_i] for fig1a
FIG1A_RANDOM_REGRET_PER_ROUND = 0.14621180995190525


def _grid(n=101):
    c = np.linspace(-1, 1, n)
    return np.stack(np.meshgrid(c, c, indexing="ij"), -1)


def test_null_config_has_zero_uplift():
    oracle = Oracle(Environment(load_fixture("null_effect")))
    assert np.all(true_uplift(oracle, _grid(), 0) == 0.0)


def test_fig1a_uplift_at_origin():
    oracle = Oracle(Environment(load_fixture("fig1a")))
    assert true_uplift(oracle, [0.0, 0.0], 0) == pytest.approx(FIG1A_UPLIFT_AT_ORIGIN, abs=1e-15)


def test_constant_tabulated_uplift():
    oracle = Oracle(Environment(build(bases=constant_arms(0.3, 0.8))))
    assert np.all(true_uplift(oracle, _grid(21), 0) == 0.5)


def test_uplift_of_control_rejected():
    oracle = Oracle(Environment(load_fixture("fig1a")))
    with pytest.raises(ValueError):
        true_uplift(oracle, [0.0, 0.0], 0, arm=0)


def test_best_arm_and_ties():
    assert best_arm([0.2, 0.7]) == 1
    assert best_arm([0.5, 0.5]) == 0
    assert best_arm([0.1, 0.6, 0.6]) == 1


def test_null_config_always_prefers_control():
    oracle = Oracle(Environment(load_fixture("null_effect")))
    for x in _grid(21).reshape(-1, 2):
        assert optimal_action(oracle, x, 0) == 0


def test_single_round_regret():
    rec = InteractionRecord(t=0, x=np.zeros(2), C=0, E=1, b=np.array([0.3, 0.9]), p_sim=0.3, d=0.0)
    report = evaluate_trajectory([rec])
    assert report.cumulative_regret == pytest.approx(0.6, abs=1e-15)
    assert report.decisions[0].C_star == 1
    assert report.accuracy == 0.0 and report.effects == 1


def test_missing_oracle_fields():
    rec = InteractionRecord(t=0, x=np.zeros(2), C=0, E=1)
    with pytest.raises(DataError):
        evaluate_trajectory([rec])


def test_oracle_policy_has_zero_regret():
    env = Environment(load_fixture("fig1c"))
    oracle = Oracle(env)
    for _ in range(500):
        env.interact(optimal_action(oracle, oracle.current_context(), env.t))
    report = evaluate_trajectory(oracle.records)
    assert report.cumulative_regret == 0.0 and report.accuracy == 1.0


def test_random_policy_regret_matches_quadrature():
    config = load_fixture("fig1a")
    _, report = run_episode(Environment(config), Agent(AgentSpec("uniform-random", seed=3)), 10_000)
    expected = 10_000 * FIG1A_RANDOM_REGRET_PER_ROUND
    assert abs(report.cumulative_regret - expected) <= 0.1 * expected


def test_report_invariants():
    records, report = run_episode(Environment(load_fixture("fig1b")), Agent(AgentSpec("uniform-random")), 1000, window=64)
    trace = report.cumulative_trace()
    assert np.all(np.diff(trace) >= 0)
    assert 0 <= report.accuracy <= 1
    assert len(report.window_regret) == 16
    assert sum(report.window_regret) == pytest.approx(report.cumulative_regret, abs=1e-9)


def test_regret_additivity():
    records, whole = run_episode(Environment(load_fixture("fig1a")), Agent(AgentSpec("uniform-random")), 900)
    a = evaluate_trajectory(records[:400])
    b = evaluate_trajectory(records[400:])
    assert whole.cumulative_regret == pytest.approx(a.cumulative_regret + b.cumulative_regret, abs=1e-12)
    assert whole.effects == a.effects + b.effects
    assert whole.rounds == a.rounds + b.rounds


def _two_arm(base_spec):
    cfg = load_fixture("fig1a")
    return EnvironmentConfig(n_arms=2, policy=cfg.policy, bases=(base_spec, base_spec), drift=cfg.drift)


def test_uplift_antisymmetry_under_arm_swap():
    original = SineBase(lambdas=(2, 1), g=(0.7, 0.7))
    swapped = SineBase(lambdas=(1, 2), g=(0.7, 0.7), displacements=((0.0, 0.0), (0.7, 0.7)))
    o1 = Oracle(Environment(_two_arm(original)))
    o2 = Oracle(Environment(_two_arm(swapped)))
    grid = _grid(41)
    assert np.array_equal(true_uplift(o1, grid, 0), -true_uplift(o2, grid, 0))


def test_metrics_do_not_depend_on_noise():
    clean = load_fixture("fig1a")
    noisy = load_fixture("fig1a_noisy")
    reports = []
    for config in (clean, noisy):
        _, report = run_episode(Environment(config), Agent(AgentSpec("fixed-arm", arm=1)), 2000)
        reports.append(report)
    assert reports[0].cumulative_regret == reports[1].cumulative_regret
    assert reports[0].accuracy == reports[1].accuracy
    assert reports[0].effects != reports[1].effects


def test_report_writers(tmp_path):
    _, report = run_episode(Environment(load_fixture("fig1a")), Agent(AgentSpec("uniform-random")), 10, window=4)
    report.write_decisions_csv(tmp_path / "d.csv")
    lines = (tmp_path / "d.csv").read_text().splitlines()
    assert lines[0] == "t,C,C_star,regret,cum_regret" and len(lines) == 11
    report.write_json(tmp_path / "r.json")
    import json

    summary = json.loads((tmp_path / "r.json").read_text())
    assert summary["rounds"] == 10 and len(summary["window_regret"]) == 3
