import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from coopnet.coalescence import (NEVER, PROMOTER, SPITE, ConvergenceError, DegenerateGraphError,
                                 GameMatrix, bstar, bstar_db, general_game_favored,
                                 solve_coalescence, tau_moments, weak_selection_fixation)
from coopnet.families import FamilySpec, generate
from coopnet.graph import Graph


@st.composite
def connected_graphs(draw, lo=3, hi=9):
    n = draw(st.integers(lo, hi))
    # random spanning tree plus extra edges keeps the graph connected
    edges = {(draw(st.integers(0, v - 1)), v) for v in range(1, n)}
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    edges |= set(draw(st.lists(st.sampled_from(pairs), max_size=2 * n)))
    return Graph.from_edges(n, edges)


def _adj(g):
    return [list(a) for a in g.adjacency]


def test_meeting_times_match_dense_oracle_on_path():
    g = Graph.from_edges(4, [(0, 1), (1, 2), (2, 3)])
    sol = solve_coalescence(g, "direct")
    np.testing.assert_allclose(sol.tau_pair, oracles.meeting_times(_adj(g)), rtol=1e-11)
    assert np.all(np.diag(sol.tau_pair) == 0)


@pytest.mark.parametrize("method", ["direct", "sparse", "iterative", "exact"])
def test_backends_agree(method):
    g = generate(FamilySpec.parse("two_stars_via_broker:n1=3,n2=5"))
    ref = oracles.meeting_times(_adj(g))
    sol = solve_coalescence(g, method)
    np.testing.assert_allclose(sol.tau_pair, ref, rtol=1e-10)
    assert sol.method == method


@settings(max_examples=40, deadline=None)
@given(connected_graphs())
def test_direct_and_iterative_agree(g):
    a = solve_coalescence(g, "direct").tau_pair
    b = solve_coalescence(g, "iterative").tau_pair
    np.testing.assert_allclose(a, b, rtol=1e-9, atol=1e-9)


@settings(max_examples=40, deadline=None)
@given(connected_graphs(), st.randoms(use_true_random=False))
def test_bstar_isomorphism_invariant(g, rnd):
    perm = list(range(g.node_count))
    rnd.shuffle(perm)
    a, b = bstar(g), bstar(g.relabel(perm))
    assert a.classification == b.classification
    if a.classification != NEVER:
        assert b.b_star == pytest.approx(a.b_star, rel=1e-9)


@settings(max_examples=40, deadline=None)
@given(connected_graphs())
def test_bstar_equals_moment_ratio(g):
    sol = solve_coalescence(g)
    report = bstar_db(sol, g)
    m = tau_moments(sol, g)
    if report.classification == NEVER:
        assert m.b_star is None
    else:
        assert m.b_star == pytest.approx(report.b_star, rel=1e-8)


def test_clique_and_star_laws_exact():
    r = bstar(generate(FamilySpec.of("clique", n=7)), method="exact")
    assert (r.classification, r.b_star) == (SPITE, -6.0)
    s = bstar(generate(FamilySpec.of("star", n=9)), method="exact")
    assert s.classification == NEVER
    assert s.b_star is None and s.inv_b_star == 0.0 and s.denominator == 0.0


def test_cycle_bstar_known_value():
    g = Graph.from_edges(7, [(i, (i + 1) % 7) for i in range(7)])
    num, den = oracles.bstar_db(_adj(g))
    r = bstar(g)
    assert r.classification == PROMOTER
    assert r.b_star == pytest.approx(num / den, rel=1e-11)


def test_report_dict_fields():
    d = bstar(generate(FamilySpec.of("clique", n=4))).to_dict()
    assert set(d) == {"n", "mean_degree", "numerator", "denominator", "b_star", "inv_b_star",
                      "classification", "updating", "method", "residual"}
    assert d["inv_b_star"] == pytest.approx(1 / d["b_star"])


@pytest.mark.parametrize("edges,n", [([(0, 1)], 2), ([(0, 1), (2, 3)], 4)])
def test_degenerate_graphs_rejected(edges, n):
    with pytest.raises(DegenerateGraphError):
        solve_coalescence(Graph.from_edges(n, edges))


def test_unknown_method_and_rule():
    g = generate(FamilySpec.of("clique", n=4))
    with pytest.raises(ValueError):
        bstar(g, method="magic")
    with pytest.raises(ValueError):
        bstar(g, updating="bd")


def test_iterative_reports_non_convergence():
    g = generate(FamilySpec.parse("hierarchy_of_cliques:q=2,n=4"))
    with pytest.raises(ConvergenceError):
        solve_coalescence(g, "iterative", max_iter=2)


def test_im_matches_oracle_and_chain():
    g = Graph.from_edges(4, [(0, 1), (1, 2), (2, 3)])
    num, den = oracles.bstar_im(_adj(g))
    r = bstar(g, "im")
    assert r.b_star == pytest.approx(num / den, rel=1e-10)
    assert r.b_star == pytest.approx(oracles.bstar_from_chain(_adj(g), "im"), rel=1e-6)
    assert bstar(g, "im", method="exact").b_star == pytest.approx(r.b_star, rel=1e-12)


@pytest.mark.parametrize("edges,n", [
    ([(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)], 4),
    ([(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)], 5),
    ([(0, 1), (0, 2), (0, 3), (3, 4)], 5),
])
def test_db_matches_markov_chain_derivative(edges, n):
    adj = oracles.adjacency(n, edges)
    r = bstar(Graph.from_edges(n, edges))
    assert r.b_star == pytest.approx(oracles.bstar_from_chain(adj, "db"), rel=1e-6)


def test_weak_selection_prediction_against_exact_chain():
    edges = [(i, (i + 1) % 6) for i in range(6)]
    g = Graph.from_edges(6, edges)
    m = tau_moments(solve_coalescence(g), g)
    rho_c, rho_d = weak_selection_fixation(m, 6, 8.0, 1.0, 1e-4)
    exact = oracles.fixation_exact(oracles.adjacency(6, edges), 8.0, 1.0, 1e-4)
    assert rho_c - 1 / 6 == pytest.approx(exact - 1 / 6, rel=1e-3)
    assert rho_c + rho_d == pytest.approx(2 / 6)


def test_general_game_reduces_to_donation():
    r = bstar(Graph.from_edges(6, [(i, (i + 1) % 6) for i in range(6)]))  # b* = 4
    assert general_game_favored(r, GameMatrix.donation(4.5))
    assert not general_game_favored(r, GameMatrix.donation(3.5))
    with pytest.raises(ValueError):
        GameMatrix(1, float("nan"), 0, 0)


def test_all_small_graphs_have_finite_positive_meeting_times():
    for n in (3, 4):
        pairs = list(itertools.combinations(range(n), 2))
        for k in range(n - 1, len(pairs) + 1):
            for edges in itertools.combinations(pairs, k):
                g = Graph.from_edges(n, edges)
                try:
                    sol = solve_coalescence(g)
                except DegenerateGraphError:
                    continue
                off = sol.tau_pair[~np.eye(n, dtype=bool)]
                assert np.all(off > 0) and np.all(np.isfinite(off))
