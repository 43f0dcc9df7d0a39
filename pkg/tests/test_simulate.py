import csv
import io
import math

import pytest

import oracles
from coopnet.families import FamilySpec, generate
from coopnet.graph import Graph, GraphError
from coopnet.simulate import (CSV_HEADER, SimulationConfig, SimulationConfigError,
                              SimulationResult, config_dict, crossover_scan, death_birth_step,
                              estimate_fixation, results_csv)

PATH4 = Graph.from_edges(4, [(0, 1), (1, 2), (2, 3)])


def test_step_keeps_absorbing_states():
    for s in ([1, 1, 1, 1], [0, 0, 0, 0]):
        for node in range(4):
            for u in (0.0, 0.5, 0.999):
                assert death_birth_step(PATH4, s, node, u, b=5.0) == s


def test_step_weights_neighbours_by_payoff():
    # node 1 (C) dies; payoffs are taken before the death, so neighbour 0 (C)
    # earns -c + b and neighbour 2 (D) earns b/2
    b, c, delta = 4.0, 1.0, 0.1
    w0 = 1 + delta * (-c + b * 1.0)
    w2 = 1 + delta * (b * 0.5)
    p_c = w0 / (w0 + w2)
    s = [1, 1, 0, 0]
    assert death_birth_step(PATH4, s, 1, p_c - 1e-9, b, c, delta)[1] == 1
    assert death_birth_step(PATH4, s, 1, p_c + 1e-9, b, c, delta)[1] == 0


def test_seed_determinism_and_batch_composition():
    g = generate(FamilySpec.of("star", n=5))
    cfg = SimulationConfig(b=3.0, delta=0.05, trials=3000, seed=11)
    a = estimate_fixation(g, cfg)
    assert a == estimate_fixation(g, cfg)
    first = estimate_fixation(g, SimulationConfig(b=3.0, delta=0.05, trials=1000, seed=11))
    rest = estimate_fixation(g, SimulationConfig(b=3.0, delta=0.05, trials=2000, seed=11),
                             first_trial=1000)
    assert first.fixation_count + rest.fixation_count == a.fixation_count
    other = estimate_fixation(g, SimulationConfig(b=3.0, delta=0.05, trials=3000, seed=12))
    assert other.fixation_count != a.fixation_count


def test_neutral_drift_gives_one_over_n():
    g = Graph.from_edges(5, [(i, (i + 1) % 5) for i in range(5)])
    r = estimate_fixation(g, SimulationConfig(b=2.0, delta=0.0, trials=100_000, seed=1))
    assert abs(r.rho_hat - 0.2) < 4 * r.std_err


@pytest.mark.parametrize("edges,n,b,delta", [
    ([(0, 1), (1, 2), (2, 3)], 4, 8.0, 0.1),
    ([(0, 1), (0, 2), (0, 3), (0, 4), (1, 2)], 5, 6.0, 0.15),
])
def test_strong_selection_matches_exact_chain(edges, n, b, delta):
    exact = oracles.fixation_exact(oracles.adjacency(n, edges), b, 1.0, delta)
    r = estimate_fixation(Graph.from_edges(n, edges),
                          SimulationConfig(b=b, delta=delta, trials=200_000, seed=3))
    assert abs(r.rho_hat - exact) < 4 * math.sqrt(exact * (1 - exact) / r.trials)


def test_step_cap_excludes_trials():
    g = generate(FamilySpec.of("star", n=20))
    r = estimate_fixation(g, SimulationConfig(b=2.0, trials=50, seed=0, max_steps=1))
    # a trial can still absorb in its single step when the lone cooperator dies
    assert r.capped + r.trials == 50
    assert r.capped > 40 and r.mean_steps == 1.0
    assert math.isnan(SimulationResult(fixation_count=0, trials=0, n=4, capped=5).rho_hat)


@pytest.mark.parametrize("kwargs", [
    dict(b=2.0, delta=-0.1), dict(b=2.0, trials=0), dict(b=float("inf")),
    dict(b=2.0, c=1.0, delta=2.0), dict(b=2.0, seed=-1), dict(b=2.0, max_steps=0),
])
def test_config_validation(kwargs):
    with pytest.raises(SimulationConfigError):
        SimulationConfig(**kwargs)


def test_rejects_disconnected_graph():
    with pytest.raises(GraphError):
        estimate_fixation(Graph.from_edges(4, [(0, 1), (2, 3)]), SimulationConfig(b=1.0))


def test_crossover_scan_needs_promoter():
    with pytest.raises(ValueError):
        crossover_scan(generate(FamilySpec.of("clique", n=5)), 0.01, 10, 0)
    g = Graph.from_edges(6, [(i, (i + 1) % 6) for i in range(6)])
    rows = crossover_scan(g, 0.01, 100, 0, factors=(0.5, 2.0))
    assert [b for b, _ in rows] == pytest.approx([2.0, 8.0])


def test_results_csv_and_config_dict():
    cfg = SimulationConfig(b=2.5, trials=10, seed=4)
    res = SimulationResult(fixation_count=3, trials=10, n=5)
    rows = list(csv.reader(io.StringIO(results_csv([(cfg, res)]))))
    assert tuple(rows[0]) == CSV_HEADER
    assert rows[1][:5] == ["2.5", "1", "0.01", "10", "3"]
    assert config_dict(cfg)["seed"] == 4
