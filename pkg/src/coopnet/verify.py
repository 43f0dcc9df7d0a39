"""Fixture table and closed-form grid used by ``coopnet verify-families``."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Iterable

from .coalescence import NEVER, bstar
from .conjoin import conjoin
from .families import (SCHEMA, FamilyParameterError, FamilySpec, closed_form_bstar,
                       expected_counts, generate)
from .graph import Graph

FIXTURE_REL_TOL = 0.005
GRID_REL_TOL = 1e-9

# families with an exact closed form somewhere in the 2..8 grid
GRID_FAMILIES = (
    "star", "complete_bipartite", "clique", "two_cliques_direct", "extended_star",
    "imperfect_extended_star", "three_layer_extended_star", "two_stars_hub_hub",
    "two_stars_via_broker", "ring_of_stars", "star_of_stars", "imperfect_star_of_stars",
    "star_of_cliques", "hierarchy_of_cliques", "two_bipartite",
)


def _family(text: str) -> Callable[[], Graph]:
    return lambda: generate(FamilySpec.parse(text))


def _stars_chain(brokers: int) -> Callable[[], Graph]:
    def build():
        s = generate(FamilySpec.of("star", n=50))
        return conjoin(s, s, 0, 0, brokers)
    return build


@dataclass(frozen=True)
class Fixture:
    name: str
    build: Callable[[], Graph]
    expected: float
    source: str
    rel_tol: float = FIXTURE_REL_TOL


FIXTURES: tuple[Fixture, ...] = (
    Fixture("two Star{50} hub-hub", _stars_chain(0), 2.5352, "identical two-star formula"),
    Fixture("two Star{50} via 1 broker", _stars_chain(1), 2.9907, "identical via-broker formula"),
    Fixture("two Star{50} via 2 brokers", _stars_chain(2), 2.7809, "dense brute-force solve"),
    Fixture("imperfect star of stars (15,5,10)",
            _family("imperfect_star_of_stars:n=15,n_g=5,n_d=10"), 2.15, "reference value, 2 d.p."),
    Fixture("star of stars (5,5)", _family("star_of_stars:n=5,n_d=5"), 2.32, "reference value, 2 d.p."),
    Fixture("ring of stars (5,20)", _family("ring_of_stars:L=5,n=20"), 1.84, "reference value, 2 d.p."),
    Fixture("star of cliques (4,10)", _family("star_of_cliques:m=4,n=10"), 19.56,
            "reference value, 2 d.p."),
    Fixture("two K10 via broker + 4 leaves", _family("two_cliques_via_star:n=10,m_star=5"),
            13.21, "reference value, 2 d.p."),
    Fixture("ring of cliques (4,20)", _family("ring_of_cliques:L=4,n=20"), 35.90,
            "reference value, 2 d.p."),
    Fixture("hierarchy of cliques (3,5)", _family("hierarchy_of_cliques:q=3,n=5"), 4.80,
            "reference value, 2 d.p."),
    Fixture("two rich clubs (5,50)", _family("two_rich_clubs:n_c=5,n_p=50"), 19.66,
            "reference value, 2 d.p."),
    Fixture("two bipartite (10,10)", _family("two_bipartite:n_x=10,n_y=10"), 19.29,
            "reference value, 2 d.p."),
)


@dataclass(frozen=True)
class CheckRow:
    label: str
    expected: float | None
    value: float | None
    rel_err: float
    passed: bool


def _rel(expected, value) -> float:
    if expected is None or value is None:
        return 0.0 if expected is value else float("inf")
    return abs(value - expected) / abs(expected)


def run_fixtures(fixtures: Iterable[Fixture] = FIXTURES) -> list[CheckRow]:
    rows = []
    for f in fixtures:
        value = bstar(f.build()).b_star
        err = _rel(f.expected, value)
        rows.append(CheckRow(f.name, f.expected, value, err, err <= f.rel_tol))
    return rows


def clique_law(sizes: Iterable[int] = range(3, 21)) -> list[CheckRow]:
    rows = []
    for n in sizes:
        value = bstar(generate(FamilySpec.of("clique", n=n))).b_star
        err = _rel(-(n - 1), value)
        rows.append(CheckRow(f"clique:n={n}", -(n - 1), value, err, err <= GRID_REL_TOL))
    return rows


def grid_specs(kinds: Iterable[str] = GRID_FAMILIES, lo: int = 2,
               hi: int = 8) -> Iterable[FamilySpec]:
    """Every in-bounds parameter combination in ``lo..hi`` that has a closed form.

    Graphs with fewer than 3 nodes are skipped: b* is 0/0 there.
    """
    for kind in kinds:
        names, _ = SCHEMA[kind]
        for vals in itertools.product(range(lo, hi + 1), repeat=len(names)):
            spec = FamilySpec(kind, tuple(zip(names, vals)))
            try:
                spec.check_bounds()
            except FamilyParameterError:
                continue
            if expected_counts(spec)[0] >= 3 and closed_form_bstar(spec) is not None:
                yield spec


def check_closed_form(spec: FamilySpec, method: str = "auto") -> CheckRow:
    cf = closed_form_bstar(spec)
    report = bstar(generate(spec), method=method)
    if cf.never_favored:
        ok = report.classification == NEVER
        return CheckRow(str(spec), None, report.b_star, 0.0 if ok else float("inf"), ok)
    expected = float(cf.value)
    err = _rel(expected, report.b_star)
    return CheckRow(str(spec), expected, report.b_star, err, err <= GRID_REL_TOL)


def closed_form_grid(kinds: Iterable[str] = GRID_FAMILIES, lo: int = 2,
                     hi: int = 8) -> list[CheckRow]:
    return [check_closed_form(s) for s in grid_specs(kinds, lo, hi)]


def format_rows(rows: Iterable[CheckRow]) -> str:
    def num(v):
        return "never" if v is None else f"{v:.12g}"
    lines = []
    for r in rows:
        lines.append(f"{'PASS' if r.passed else 'FAIL'}  {r.label:<42} expected={num(r.expected):<16}"
                     f" got={num(r.value):<16} rel_err={r.rel_err:.3g}")
    return "\n".join(lines)
