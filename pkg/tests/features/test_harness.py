import json
import math

import numpy as np
import pytest

from cover import cmt, harness, netsim
from cover.cmt import SymbolId
from cover.constants import ACCEPT, REJECT, WILSON_Z
from cover.errors import ConfigError, RegimeError


def test_coverage_bound():
    assert harness.coverage_bound(4, 2.0) == math.ceil(4 * (math.log(4) + 2))
    assert harness.coverage_bound(1) == 2
    assert harness.coverage_lower_bound(4, 1) == 0.0
    assert harness.coverage_lower_bound(4, 40) == pytest.approx(
        1 - 4 * math.exp(-10)
    )
    with pytest.raises(ValueError):
        harness.coverage_bound(0)


def test_detection_probability():
    assert harness.detection_probability(0.5, 1) == 0.5
    assert harness.detection_probability(0.25, 2) == pytest.approx(0.4375)
    assert harness.detection_probability(0.0, 10) == 0.0
    with pytest.raises(ValueError):
        harness.detection_probability(1.5, 2)
    with pytest.raises(ValueError):
        harness.detection_probability(0.5, 0)


def test_connectivity_bounds_need_their_regime():
    with pytest.raises(RegimeError):
        harness.connectivity_requirement(4, 4, 64)
    with pytest.raises(RegimeError):
        harness.connectivity_probability(4, 4, 64)
    with pytest.raises(RegimeError):
        harness.neighbors_required(4, 4, 64)
    need = harness.connectivity_requirement(400, 4, 64, alpha=0.5)
    assert need.M == 256
    assert need.r == pytest.approx(16 * math.log(64) / 256)
    assert need.p_total == pytest.approx(min(1.0, 2 * need.p))
    assert need.neighbors == pytest.approx(need.p_total * 800)


def test_end_to_end_bounds_are_probabilities():
    for value in (
        harness.theorem_valid_bound(40, 4, 64),
        harness.theorem_invalid_bound(40, 4, 64),
        harness.theorem_unavailable_bound(40, 0.1, 64, 4),
    ):
        assert 0.0 <= value <= 1.0
    assert harness.theorem_unavailable_bound(1, 1.0, 64, 4) == 1.0
    assert harness.honest_node_requirement(4, 64) == pytest.approx(
        4 * (math.log(64) + 2)
    )
    assert harness.tree_coverage_bound(64, 16) == pytest.approx(
        4 * (math.log(64) + 2)
    )


def test_wilson_interval():
    low, high = harness.wilson_interval(50, 100)
    assert low < 0.5 < high
    assert low == pytest.approx(0.4038, abs=1e-3)
    assert high == pytest.approx(0.5962, abs=1e-3)
    assert harness.wilson_interval(0, 10)[0] == pytest.approx(0.0, abs=1e-12)
    assert harness.wilson_interval(10, 10)[1] == pytest.approx(1.0)
    with pytest.raises(ValueError):
        harness.wilson_interval(1, 0)
    with pytest.raises(ValueError):
        harness.wilson_interval(3, 2)


def test_bound_check_edges():
    estimate = harness.Estimate(95, 100)
    lower = harness.BoundCheck.lower("x", 0.96, estimate)
    lenient = harness.BoundCheck.lower("x", 0.96, estimate, lenient=True)
    assert not lower.passed
    assert lenient.passed
    assert lower.interval == lenient.interval
    data = lenient.as_dict()
    assert data["rate"] == 0.95
    assert isinstance(data["interval"], list)


def test_coverage_monte_carlo_matches_the_bound():
    estimate = harness.mc_coverage(4, 14, trials=2000, seed=1)
    check = harness.BoundCheck.lower(
        "coverage", harness.coverage_lower_bound(4, 14), estimate
    )
    assert check.passed
    # the bound at 40 nodes sits above what 2000 trials can certify
    unreachable = harness.BoundCheck.lower(
        "coverage",
        harness.coverage_lower_bound(4, 40),
        harness.mc_coverage(4, 40, trials=2000, seed=1),
    )
    assert not unreachable.passed
    assert harness.mc_coverage(4, 3, trials=50).successes == 0
    assert harness.mc_coverage(4, 40, 100, 5) == harness.mc_coverage(
        4, 40, 100, 5
    )


def test_detection_monte_carlo():
    shape = cmt.TreeShape(16)
    hidden = {SymbolId(5, 0)}
    estimates = harness.mc_detection(shape, hidden, c=32, trials=20)
    assert estimates[5].successes == 20
    # nothing is hidden above the bottom layer
    assert estimates[2].successes == 0
    single = harness.mc_detection(shape, hidden, c=1, trials=4000, seed=2)
    assert single[5].rate == pytest.approx(4 / 32, abs=0.03)
    with pytest.raises(ValueError):
        harness.mc_detection(shape, hidden, c=33, trials=1)


def test_subgraph_connectivity_matrix():
    adjacency = np.array(
        [[0, 1, 0, 0], [1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]],
        dtype=bool,
    )
    members = np.array(
        [[1, 1, 0], [1, 0, 0], [0, 1, 1], [0, 0, 1]], dtype=bool
    )
    connected = harness.subgraphs_connected(adjacency, members)
    assert connected.tolist() == [True, False, True]


def test_matrix_and_union_find_agree():
    graph = netsim.generate_graph(12, 0.25, seed=8, alpha=0.25)
    shape = cmt.TreeShape(8)
    interests = {
        node: frozenset(cmt.sample_subtree(shape, 3, node).ids())
        for node in graph.honest_nodes
    }
    ids = list(shape.all_ids())
    honest, adjacency = harness.honest_adjacency(graph)
    members = harness.interest_matrix(
        ids, [interests[n] for n in honest]
    )
    matrix = harness.subgraphs_connected(adjacency, members).tolist()
    scan = [
        netsim.interest_subgraph_connected(graph, interests, sid)
        for sid in ids
    ]
    assert matrix == scan


def test_total_nodes():
    assert harness.total_nodes(40, 0.0) == 40
    assert harness.total_nodes(6, 0.25) == 8
    for N_h, alpha in ((40, 0.2), (7, 0.33), (100, 0.5)):
        N = harness.total_nodes(N_h, alpha)
        assert N - math.floor(alpha * N) == N_h


def test_connectivity_monte_carlo_on_a_complete_graph():
    estimate = harness.mc_connectivity(10, 16, 2, 1.0, trials=5)
    assert estimate.successes == 5
    sparse = harness.mc_connectivity(10, 16, 2, 0.0, trials=5)
    assert sparse.successes == 0


def test_work_fit():
    fits = harness.fit_work_constant([16, 32], k=4, symbol_size=64)
    assert [fit.L for fit in fits] == [16, 32]
    assert fits[0].c == 4
    assert all(fit.download > 0 for fit in fits)
    assert harness.work_scaling_holds(fits, tolerance=10.0)


def test_work_scaling_is_two_sided():
    fits = [
        harness.WorkFit(64, 16, 1000, 10.0),
        harness.WorkFit(256, 64, 1000, 12.0),
    ]
    assert harness.work_scaling_holds(fits)
    low = [fits[0], harness.WorkFit(256, 64, 1000, 7.0)]
    assert not harness.work_scaling_holds(low)
    high = [fits[0], harness.WorkFit(256, 64, 1000, 13.0)]
    assert not harness.work_scaling_holds(high)


@pytest.mark.slow
def test_work_constant_is_stable_across_block_sizes():
    fits = harness.fit_work_constant([64, 256, 1024], k=4, symbol_size=64)
    assert [fit.c for fit in fits] == [16, 64, 256]
    assert harness.work_scaling_holds(fits, tolerance=0.25)


def test_interest_bytes_grow_with_neighbors_only():
    fits = harness.fit_interest_bytes(12, 16, 4, [0.2, 0.5, 1.0], seed=3)
    assert len(fits) == 36
    assert harness.interest_scaling_holds(fits)
    dense = [fit for fit in fits if fit.p == 1.0]
    assert all(fit.neighbors == 11 for fit in dense)
    assert all(fit.sent > 0 for fit in dense)
    skewed = fits + [
        harness.InterestFit(0, 0.7, 3, dense[0].per_neighbor * 3 + 6)
    ]
    assert not harness.interest_scaling_holds(skewed)


def test_config_validation_lists_every_problem():
    with pytest.raises(ConfigError) as info:
        harness.ScenarioConfig.from_dict(
            {"L": 1, "alpha": 1.0, "miner": {"kind": "bribe"}}
        )
    problems = info.value.problems
    assert "L must be at least 2" in problems
    assert "alpha must lie in [0, 1)" in problems
    assert any("bribe" in p for p in problems)
    with pytest.raises(ConfigError):
        harness.ScenarioConfig.from_dict({"blocks": 3})
    with pytest.raises(ConfigError):
        harness.ScenarioConfig.from_dict(
            {"byzantine": [{"kind": "silent"}]}
        )
    with pytest.raises(ConfigError):
        harness.ScenarioConfig.from_dict(
            {"tau": None, "miner": {"kind": "invalid_txn", "txn_class": "expired"}}
        )


def test_named_scenarios():
    config = harness.ScenarioConfig.named("smoke", trials=1)
    assert config.name == "smoke"
    assert config.L == 8
    assert config.trials == 1
    assert config.sample_count == 4
    assert config.edge_probability() == 1.0
    with pytest.raises(ConfigError):
        harness.ScenarioConfig.named("missing")
    for name in ("theorem-valid", "byzantine-spam", "withhold-below-threshold"):
        assert harness.ScenarioConfig.named(name).validate()


def test_config_files_round_trip(tmp_path):
    config = harness.ScenarioConfig.named("theorem-invalid", seed=9)
    path = tmp_path / "config.json"
    config.save(path)
    assert harness.ScenarioConfig.load(path) == config
    assert json.loads(path.read_text())["miner"]["txn_class"] == "double_spend"


def test_requirements_report():
    report = harness.requirements(harness.ScenarioConfig.named("smoke"))
    assert report["coverage_bound"] == harness.coverage_bound(2)
    assert report["edge_probability"] == 1.0
    assert "regime" in report
    assert not report["meets_connectivity"]
    valid = harness.requirements(harness.ScenarioConfig.named("theorem-valid"))
    assert valid["meets_coverage_bound"]


def test_expected_decisions():
    config = harness.ScenarioConfig.named("smoke")
    assert harness.expected_decision(config.miner_strategy) == "accept"
    assert harness.theorem_bound(config) == harness.theorem_valid_bound(
        config.N_h, config.k, config.L, config.lam
    )
    withhold = harness.ScenarioConfig.named("withhold-below-threshold")
    assert harness.expected_decision(withhold.miner_strategy) is None
    assert harness.theorem_bound(withhold) == 0.0


def test_smoke_scenario_and_export(tmp_path):
    config = harness.ScenarioConfig.named("smoke")
    result = harness.run_scenario(config)
    assert [m.trial for m in result.metrics] == [0, 1]
    summary = result.summary
    assert summary["trials"] == 2
    assert summary["checks"][0]["name"] == "honest:accept"
    rows_path, summary_path = harness.export(
        result.metrics, summary, tmp_path / "out"
    )
    rows = [json.loads(line) for line in rows_path.read_text().splitlines()]
    assert len(rows) == 2 * config.N_h
    assert {"trial", "node", "decision", "reason", "covered"} <= set(rows[0])
    assert json.loads(summary_path.read_text())["scenario"] == "smoke"
    with pytest.raises(ValueError):
        harness.export([], summary, tmp_path / "empty")


def test_switch_epoch_needs_a_finite_window():
    with pytest.raises(ConfigError) as info:
        harness.ScenarioConfig.named("smoke", tau=None, switch_epoch=4)
    assert "section switching needs a finite tau" in info.value.problems
    with pytest.raises(ConfigError) as info:
        harness.ScenarioConfig.named("smoke", tau=4, switch_epoch=2)
    assert "switch_epoch must be at least tau" in info.value.problems
    config = harness.ScenarioConfig.named("smoke", tau=3, switch_epoch=3)
    assert config.protocol_params().tau == 3


def test_sections_switching_mid_trial_keeps_honest_blocks():
    plain = harness.ScenarioConfig.named("smoke", rounds=3, tau=3)
    switching = harness.ScenarioConfig.named(
        "smoke", rounds=3, tau=3, switch_epoch=3
    )
    workload = harness.Workload(plain, harness.make_scheme(plain.scheme))
    metrics = harness.run_trial(switching, 0, workload)
    assert len(metrics.unanimous) == 3
    assert metrics.all_rounds(ACCEPT)
    assert metrics.unanimous == harness.run_trial(plain, 0, workload).unanimous


def trials_for(bound):
    """Smallest trial count whose all-success lower edge clears `bound`."""
    if bound <= 0:
        return 3
    return max(3, math.ceil(WILSON_Z**2 * bound / (1 - bound)) + 1)


@pytest.mark.slow
@pytest.mark.parametrize(
    "name, decision",
    [
        ("theorem-valid", ACCEPT),
        ("theorem-invalid", REJECT),
        ("theorem-coding-fraud", REJECT),
    ],
)
def test_end_to_end_rate_meets_its_bound(name, decision):
    bound = harness.theorem_bound(harness.ScenarioConfig.named(name))
    config = harness.ScenarioConfig.named(name, trials=trials_for(bound))
    result = harness.run_scenario(config)
    assert all(m.all_rounds(decision) for m in result.metrics)
    check = result.summary["checks"][0]
    assert check["name"] == f"{config.miner_strategy.kind}:{decision}"
    assert check["rate"] >= bound
    assert result.passed
