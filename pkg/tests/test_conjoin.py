import csv
import io
import json

import networkx as nx
import numpy as np
import pytest

from coopnet.coalescence import NEVER, PROMOTER, bstar
from coopnet.conjoin import (MEDIAN_CONVENTION, SweepRow, attach_leaves, conjoin, connect_groups,
                             gate_sweep, summarize)
from coopnet.families import FamilySpec, generate
from coopnet.graph import Graph, GraphError, is_connected


def star(n):
    return generate(FamilySpec.of("star", n=n))


def test_conjoin_layout_and_counts():
    g = conjoin(star(2), star(3), 1, 0, brokers=2)
    assert g.node_count == 3 + 4 + 2
    assert g.edge_count == 2 + 3 + 3
    # g1 nodes first, then g2 nodes shifted by 3, then brokers 7, 8
    assert g.has_edge(1, 7) and g.has_edge(7, 8) and g.has_edge(8, 3)
    direct = conjoin(star(2), star(3), 1, 0)
    assert direct.has_edge(1, 3)
    with pytest.raises(ValueError):
        conjoin(star(2), star(3), 5, 0)
    with pytest.raises(ValueError):
        conjoin(star(2), star(3), 0, 0, brokers=-1)


def test_conjoin_is_symmetric_up_to_isomorphism():
    a, b = star(3), generate(FamilySpec.of("clique", n=4))
    g = conjoin(a, b, 2, 1, 1)
    h = conjoin(b, a, 1, 2, 1)
    assert nx.is_isomorphic(nx.Graph(g.edges()), nx.Graph(h.edges()))
    assert bstar(g).b_star == pytest.approx(bstar(h).b_star, rel=1e-10)


def test_attach_leaves_matches_family():
    k = generate(FamilySpec.of("clique", n=5))
    chain = attach_leaves(conjoin(k, k, 0, 0, 1), 10, 3)
    fam = generate(FamilySpec.parse("two_cliques_via_star:n=5,m_star=4"))
    assert nx.is_isomorphic(nx.Graph(chain.edges()), nx.Graph(fam.edges()))
    with pytest.raises(ValueError):
        attach_leaves(k, 0, 0)


def test_connect_groups_seeded_and_connected():
    groups = [generate(FamilySpec.of("clique", n=5))] * 3
    g = connect_groups(groups, 0.05, seed=4)
    assert is_connected(g)
    assert g.edges() == connect_groups(groups, 0.05, seed=4).edges()
    assert g.edge_count > 30
    with pytest.raises(ValueError):
        connect_groups(groups[:1], 0.1)


def test_two_star3_sweep_distinct_values():
    s = star(3)
    summary = gate_sweep(s, s, 0)
    assert summary.pair_count == 16
    values = {round(r.report.b_star, 9) for r in summary.rows}
    # hub-hub, hub-leaf (both orientations coincide), leaf-leaf
    assert len(values) == 3
    by_role = {}
    for r in summary.rows:
        by_role.setdefault(frozenset([("hub" if r.gate1 == 0 else "leaf", 1),
                                      ("hub" if r.gate2 == 0 else "leaf", 2)]), set()).add(
            round(r.report.b_star, 9))
    assert all(len(v) == 1 for v in by_role.values())


def test_sweep_outputs():
    s = star(2)
    summary = gate_sweep(s, s, 1)
    rows = list(csv.reader(io.StringIO(summary.to_csv())))
    assert rows[0] == ["gate1", "gate2", "b_star", "inv_b_star", "classification"]
    assert len(rows) == 10
    d = json.loads(summary.to_json())
    assert d["pair_count"] == 9 and d["brokers"] == 1
    assert d["median_convention"] == MEDIAN_CONVENTION
    inv = [r.report.inv_b_star for r in summary.rows]
    assert d["median_inv_b_star"] == pytest.approx(float(np.median(inv)))


def test_summary_counts_never_as_zero():
    never = bstar(star(4))
    promo = bstar(Graph.from_edges(6, [(i, (i + 1) % 6) for i in range(6)]))
    rows = [SweepRow(0, 0, never), SweepRow(0, 1, never), SweepRow(1, 0, promo)]
    s = summarize(rows, 0)
    assert s.median_inv_b_star == 0.0
    assert s.median_b_star is None
    assert s.classification_counts == {PROMOTER: 1, "SpitePromoter": 0, NEVER: 2}


def test_sweep_requires_connected_inputs():
    with pytest.raises(GraphError):
        gate_sweep(Graph.from_edges(4, [(0, 1), (2, 3)]), star(2))
