"""Composition operators for conjoined graphs and the gate-pair sweep.

Node layout of every composite: the nodes of ``g1``, then those of ``g2``
shifted by ``N1``, then any fresh nodes (brokers along the chain, or leaves).
"""
from __future__ import annotations

import csv
import io
import json
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .coalescence import NEVER, PROMOTER, SPITE, BStarReport, bstar
from .graph import Graph, GraphError, disjoint_union, is_connected
from .random_graphs import GenerationError, stream

CONNECT_MAX_ATTEMPTS = 1_000
MEDIAN_CONVENTION = (
    "median over gate pairs of 1/b*, with NeverFavored counted as 1/b* = 0; "
    "median_b_star is its reciprocal")


def _check_node(g: Graph, x: int, what: str) -> None:
    if not 0 <= x < g.node_count:
        raise GraphError(f"{what}={x} is not a node of a {g.node_count}-node graph")


def conjoin(g1: Graph, g2: Graph, gate1: int, gate2: int, brokers: int = 0) -> Graph:
    """Join ``gate1`` of ``g1`` to ``gate2`` of ``g2`` through a path of ``brokers`` fresh nodes.

    ``brokers = 0`` adds the single edge between the gates.
    """
    _check_node(g1, gate1, "gate1")
    _check_node(g2, gate2, "gate2")
    if brokers < 0:
        raise ValueError("brokers must be non-negative")
    union, (_, off) = disjoint_union([g1, g2])
    n = union.node_count
    path = [gate1] + list(range(n, n + brokers)) + [gate2 + off]
    return Graph.from_edges(n + brokers, union.edges() + list(zip(path, path[1:])))


def attach_leaves(g: Graph, node: int, m: int) -> Graph:
    """Attach ``m`` fresh degree-one nodes to ``node``."""
    _check_node(g, node, "node")
    if m < 1:
        raise ValueError("m must be at least 1")
    n = g.node_count
    return Graph.from_edges(n + m, g.edges() + [(node, n + i) for i in range(m)])


def connect_groups(graphs: Sequence[Graph], p_between: float, seed=0) -> Graph:
    """Union of ``graphs`` plus independent cross-group links with probability ``p_between``.

    The cross links are redrawn until the composite is connected, at most
    10^3 times.
    """
    if len(graphs) < 2:
        raise ValueError("need at least two groups")
    if not 0.0 < p_between <= 1.0:
        raise ValueError(f"p_between must lie in (0, 1], got {p_between}")
    union, _ = disjoint_union(graphs)
    group = np.repeat(np.arange(len(graphs)), [h.node_count for h in graphs])
    iu, ju = np.triu_indices(union.node_count, 1)
    cross = group[iu] != group[ju]
    iu, ju = iu[cross], ju[cross]
    rng = stream(seed)
    base = union.edges()
    for _ in range(CONNECT_MAX_ATTEMPTS):
        keep = rng.random(len(iu)) < p_between
        g = Graph.from_edges(union.node_count,
                             base + list(zip(iu[keep].tolist(), ju[keep].tolist())))
        if is_connected(g):
            return g
    raise GenerationError(
        f"no connected composite with p_between={p_between} in {CONNECT_MAX_ATTEMPTS} attempts")


@dataclass(frozen=True)
class SweepRow:
    gate1: int
    gate2: int
    report: BStarReport


@dataclass(frozen=True)
class SweepSummary:
    """b* over every way of conjoining two graphs.

    Aggregates use ``1/b*``, which is bounded and monotone in the benefit
    needed; NeverFavored composites count as 0.
    """

    brokers: int
    rows: tuple[SweepRow, ...]
    median_inv_b_star: float
    quantiles: dict[str, float]
    classification_counts: dict[str, int]

    @property
    def pair_count(self) -> int:
        return len(self.rows)

    @property
    def median_b_star(self) -> float | None:
        m = self.median_inv_b_star
        return None if m == 0 else 1.0 / m

    def to_dict(self) -> dict:
        return {
            "pair_count": self.pair_count,
            "brokers": self.brokers,
            "median_inv_b_star": self.median_inv_b_star,
            "median_b_star": self.median_b_star,
            "quantiles_inv_b_star": self.quantiles,
            "classification_counts": self.classification_counts,
            "median_convention": MEDIAN_CONVENTION,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_csv(self) -> str:
        out = io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["gate1", "gate2", "b_star", "inv_b_star", "classification"])
        for r in self.rows:
            b = "" if r.report.b_star is None else f"{r.report.b_star:.12g}"
            w.writerow([r.gate1, r.gate2, b, f"{r.report.inv_b_star:.12g}",
                        r.report.classification])
        return out.getvalue()


def summarize(rows: Sequence[SweepRow], brokers: int) -> SweepSummary:
    inv = np.array([r.report.inv_b_star for r in rows])
    q = np.quantile(inv, [0.10, 0.25, 0.75, 0.90])
    counts = Counter(r.report.classification for r in rows)
    return SweepSummary(
        brokers=brokers,
        rows=tuple(rows),
        median_inv_b_star=float(np.median(inv)),
        quantiles={"q10": float(q[0]), "q25": float(q[1]), "q75": float(q[2]), "q90": float(q[3])},
        classification_counts={c: counts.get(c, 0) for c in (PROMOTER, SPITE, NEVER)},
    )


def gate_sweep(g1: Graph, g2: Graph, brokers: int = 0, method: str = "auto",
               pairs: Sequence[tuple[int, int]] | None = None) -> SweepSummary:
    """Evaluate death-birth b* for every gate pair ``(u, v)``, ``u`` in ``g1``, ``v`` in ``g2``.

    Rows are in lexicographic gate order. ``pairs`` restricts the sweep to a
    subset of gate pairs.
    """
    if not (is_connected(g1) and is_connected(g2)):
        raise GraphError("both graphs must be connected")
    if pairs is None:
        pairs = [(u, v) for u in range(g1.node_count) for v in range(g2.node_count)]
    rows = [SweepRow(u, v, bstar(conjoin(g1, g2, u, v, brokers), "db", method))
            for u, v in pairs]
    return summarize(rows, brokers)
