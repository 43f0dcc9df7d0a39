"""Structured graph families with closed-form and asymptotic b* values.

Each family is addressed by a :class:`FamilySpec` such as
``ring_of_stars:L=5,n=20``. ``generate`` builds the graph with a fixed node
order (hubs and gates first, then peripheral nodes) so edge lists are
byte-stable. ``closed_form_bstar`` evaluates known exact expressions in
rational arithmetic; ``asymptotic_bstar`` evaluates large-size expansions and
accepts ``inf`` for the parameters that are sent to infinity.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Mapping

import mpmath

from .graph import Graph

# name -> (parameter names, lower bounds)
SCHEMA: dict[str, tuple[tuple[str, ...], tuple[int, ...]]] = {
    "star": (("n",), (1,)),
    "extended_star": (("n",), (1,)),
    "imperfect_extended_star": (("n", "n_g"), (1, 1)),
    "three_layer_extended_star": (("n",), (1,)),
    "star_of_stars": (("n", "n_d"), (1, 1)),
    "imperfect_star_of_stars": (("n", "n_g", "n_d"), (1, 1, 1)),
    "two_stars_hub_hub": (("n1", "n2"), (1, 1)),
    "two_stars_via_broker": (("n1", "n2"), (1, 1)),
    "ring_of_stars": (("L", "n"), (3, 1)),
    "clique": (("n",), (1,)),
    "two_cliques_direct": (("n",), (1,)),
    "two_cliques_brokers": (("n", "L_brokers"), (1, 0)),
    "star_of_cliques": (("m", "n"), (3, 1)),
    "two_cliques_via_star": (("n", "m_star"), (1, 1)),
    "ring_of_cliques": (("L", "n"), (3, 1)),
    "hierarchy_of_cliques": (("q", "n"), (1, 1)),
    "rich_club": (("n_c", "n_p"), (1, 1)),
    "two_rich_clubs": (("n_c", "n_p"), (1, 1)),
    "complete_bipartite": (("n_x", "n_y"), (1, 1)),
    "two_bipartite": (("n_x", "n_y"), (1, 1)),
}

INF = math.inf


class FamilyParameterError(ValueError):
    pass


class AsymptoticRegimeError(ValueError):
    """The requested expansion has a pole or does not apply at these parameters."""


@dataclass(frozen=True)
class FamilySpec:
    """A family name plus its integer size parameters (``inf`` allowed for limits)."""

    kind: str
    params: tuple[tuple[str, float], ...]

    def __post_init__(self):
        if self.kind not in SCHEMA:
            raise FamilyParameterError(
                f"unknown family {self.kind!r}; known: {', '.join(sorted(SCHEMA))}")
        names, _ = SCHEMA[self.kind]
        given = [k for k, _ in self.params]
        if sorted(given) != sorted(names):
            raise FamilyParameterError(
                f"{self.kind} takes parameters {', '.join(names)}; got {', '.join(given) or 'none'}")
        ordered = []
        lookup = dict(self.params)
        for name in names:
            v = lookup[name]
            if v != INF:
                if isinstance(v, float) and not v.is_integer():
                    raise FamilyParameterError(f"{name} must be an integer, got {v}")
                v = int(v)
            ordered.append((name, v))
        object.__setattr__(self, "params", tuple(ordered))

    @classmethod
    def of(cls, kind: str, **params) -> "FamilySpec":
        return cls(kind, tuple(params.items()))

    @classmethod
    def parse(cls, text: str) -> "FamilySpec":
        """Parse ``kind:name=value,...``; values are integers or ``inf``."""
        kind, _, rest = text.strip().partition(":")
        params = []
        for item in filter(None, (s.strip() for s in rest.split(","))):
            name, eq, val = item.partition("=")
            if not eq:
                raise FamilyParameterError(f"expected name=value, got {item!r}")
            val = val.strip()
            if val.lower() in ("inf", "infinity"):
                params.append((name.strip(), INF))
                continue
            try:
                params.append((name.strip(), int(val)))
            except ValueError:
                raise FamilyParameterError(f"{name} must be an integer, got {val!r}") from None
        return cls(kind.strip(), tuple(params))

    def __getitem__(self, name: str):
        return dict(self.params)[name]

    def __str__(self) -> str:
        body = ",".join(f"{k}={'inf' if v == INF else v}" for k, v in self.params)
        return f"{self.kind}:{body}"

    def replace(self, **changes) -> "FamilySpec":
        d = dict(self.params)
        d.update(changes)
        return FamilySpec(self.kind, tuple(d.items()))

    def check_bounds(self) -> None:
        names, lows = SCHEMA[self.kind]
        for (name, v), low in zip(self.params, lows):
            if v == INF:
                raise FamilyParameterError(f"{name} must be finite to build a graph")
            if v < low:
                raise FamilyParameterError(f"{self.kind}: {name}={v} violates {name} >= {low}")
        if self.kind in ("imperfect_extended_star", "imperfect_star_of_stars"):
            if self["n_g"] > self["n"]:
                raise FamilyParameterError(f"{self.kind}: n_g={self['n_g']} violates n_g <= n")


# ---------------------------------------------------------------------------
# generators


class _Builder:
    def __init__(self):
        self.n = 0
        self.edges: list[tuple[int, int]] = []

    def nodes(self, count: int) -> list[int]:
        out = list(range(self.n, self.n + count))
        self.n += count
        return out

    def link(self, u: int, v: int) -> None:
        self.edges.append((u, v))

    def clique(self, members: list[int]) -> None:
        for i, u in enumerate(members):
            for v in members[i + 1:]:
                self.link(u, v)

    def graph(self) -> Graph:
        return Graph.from_edges(self.n, self.edges)


def _gen_star(p):
    b = _Builder()
    hub, = b.nodes(1)
    for leaf in b.nodes(p["n"]):
        b.link(hub, leaf)
    return b.graph()


def _spokes(b, gates, per_gate):
    """Attach ``per_gate`` fresh leaves to every gate, gate by gate."""
    for gate in gates:
        for leaf in b.nodes(per_gate):
            b.link(gate, leaf)


def _gen_imperfect_star_of_stars(n, n_g, n_d):
    # hub, gates, plain leaves of the hub, then the gates' leaves grouped by gate
    b = _Builder()
    hub, = b.nodes(1)
    gates = b.nodes(n_g)
    plain = b.nodes(n - n_g)
    for v in gates + plain:
        b.link(hub, v)
    _spokes(b, gates, n_d)
    return b.graph()


def _gen_three_layer(p):
    n = p["n"]
    b = _Builder()
    hub, = b.nodes(1)
    first, second, third = b.nodes(n), b.nodes(n), b.nodes(n)
    for i in range(n):
        b.link(hub, first[i])
        b.link(first[i], second[i])
        b.link(second[i], third[i])
    return b.graph()


def _gen_two_stars(n1, n2, brokers):
    b = _Builder()
    h1, h2 = b.nodes(2)
    chain = [h1] + b.nodes(brokers) + [h2]
    for u, v in zip(chain, chain[1:]):
        b.link(u, v)
    for leaf in b.nodes(n1):
        b.link(h1, leaf)
    for leaf in b.nodes(n2):
        b.link(h2, leaf)
    return b.graph()


def _gen_ring_of_stars(p):
    L, n = p["L"], p["n"]
    b = _Builder()
    hubs = b.nodes(L)
    for i in range(L):
        b.link(hubs[i], hubs[(i + 1) % L])
    _spokes(b, hubs, n)
    return b.graph()


def _gen_clique(p):
    b = _Builder()
    b.clique(b.nodes(p["n"]))
    return b.graph()


def _gen_two_cliques(n, brokers, extra_leaves=0):
    # gates, brokers, leaves on the middle broker, then the two cliques' commoners
    b = _Builder()
    g1, g2 = b.nodes(2)
    mid = b.nodes(brokers)
    chain = [g1] + mid + [g2]
    for u, v in zip(chain, chain[1:]):
        b.link(u, v)
    if extra_leaves:
        for leaf in b.nodes(extra_leaves):
            b.link(mid[0], leaf)
    b.clique([g1] + b.nodes(n - 1))
    b.clique([g2] + b.nodes(n - 1))
    return b.graph()


def _gen_star_of_cliques(p):
    m, n = p["m"], p["n"]
    b = _Builder()
    hub, = b.nodes(1)
    gates = b.nodes(m)
    for g in gates:
        b.link(hub, g)
    for g in gates:
        b.clique([g] + b.nodes(n - 1))
    return b.graph()


def _gen_ring_of_cliques(p):
    L, n = p["L"], p["n"]
    b = _Builder()
    gates = b.nodes(L)
    for i in range(L):
        b.link(gates[i], gates[(i + 1) % L])
    for g in gates:
        b.clique([g] + b.nodes(n - 1))
    return b.graph()


def _gen_hierarchy(p):
    q, n = p["q"], p["n"]
    b = _Builder()
    base, = b.nodes(1)
    middles = b.nodes(q)
    gates = b.nodes(q * q)
    for i, mnode in enumerate(middles):
        b.link(base, mnode)
        for g in gates[i * q:(i + 1) * q]:
            b.link(mnode, g)
    for g in gates:
        b.clique([g] + b.nodes(n - 1))
    return b.graph()


def _rich_club(b, core, n_p):
    b.clique(core)
    for leaf in b.nodes(n_p):
        for c in core:
            b.link(c, leaf)


def _gen_rich_club(p):
    b = _Builder()
    _rich_club(b, b.nodes(p["n_c"]), p["n_p"])
    return b.graph()


def _gen_two_rich_clubs(p):
    n_c, n_p = p["n_c"], p["n_p"]
    b = _Builder()
    g1, g2 = b.nodes(2)
    b.link(g1, g2)
    _rich_club(b, [g1] + b.nodes(n_c - 1), n_p)
    _rich_club(b, [g2] + b.nodes(n_c - 1), n_p)
    return b.graph()


def _bipartite(b, xs, n_y):
    for y in b.nodes(n_y):
        for x in xs:
            b.link(x, y)


def _gen_complete_bipartite(p):
    b = _Builder()
    _bipartite(b, b.nodes(p["n_x"]), p["n_y"])
    return b.graph()


def _gen_two_bipartite(p):
    n_x, n_y = p["n_x"], p["n_y"]
    b = _Builder()
    g1, g2 = b.nodes(2)
    b.link(g1, g2)
    _bipartite(b, [g1] + b.nodes(n_x - 1), n_y)
    _bipartite(b, [g2] + b.nodes(n_x - 1), n_y)
    return b.graph()


_GENERATORS: dict[str, Callable[[Mapping], Graph]] = {
    "star": _gen_star,
    "extended_star": lambda p: _gen_imperfect_star_of_stars(p["n"], p["n"], 1),
    "imperfect_extended_star": lambda p: _gen_imperfect_star_of_stars(p["n"], p["n_g"], 1),
    "three_layer_extended_star": _gen_three_layer,
    "star_of_stars": lambda p: _gen_imperfect_star_of_stars(p["n"], p["n"], p["n_d"]),
    "imperfect_star_of_stars": lambda p: _gen_imperfect_star_of_stars(p["n"], p["n_g"], p["n_d"]),
    "two_stars_hub_hub": lambda p: _gen_two_stars(p["n1"], p["n2"], 0),
    "two_stars_via_broker": lambda p: _gen_two_stars(p["n1"], p["n2"], 1),
    "ring_of_stars": _gen_ring_of_stars,
    "clique": _gen_clique,
    "two_cliques_direct": lambda p: _gen_two_cliques(p["n"], 0),
    "two_cliques_brokers": lambda p: _gen_two_cliques(p["n"], p["L_brokers"]),
    "star_of_cliques": _gen_star_of_cliques,
    "two_cliques_via_star": lambda p: _gen_two_cliques(p["n"], 1, p["m_star"] - 1),
    "ring_of_cliques": _gen_ring_of_cliques,
    "hierarchy_of_cliques": _gen_hierarchy,
    "rich_club": _gen_rich_club,
    "two_rich_clubs": _gen_two_rich_clubs,
    "complete_bipartite": _gen_complete_bipartite,
    "two_bipartite": _gen_two_bipartite,
}


def generate(spec: FamilySpec) -> Graph:
    """Build the graph described by ``spec``.

    Node order per family:

    * star: hub, leaves.
    * extended / imperfect star, star of stars: hub, gates, the hub's plain
      leaves, then each gate's leaves in gate order.
    * three-layer star: hub, first layer, second layer, third layer (spoke i
      uses index i in every layer).
    * two stars: hub 1, hub 2, broker (if any), leaves of star 1, leaves of star 2.
    * ring of stars / cliques: hubs or gates around the ring, then each
      block's peripheral nodes in ring order.
    * two cliques (direct, brokers, via star): gate 1, gate 2, brokers along
      the chain, star leaves on the first broker, commoners of clique 1, then
      of clique 2.
    * star of cliques: hub, gates, commoners clique by clique.
    * hierarchy: base, middle nodes, gates (gate j hangs off middle j // q),
      commoners clique by clique.
    * rich club: core, periphery. Two rich clubs: gate 1, gate 2, core and
      periphery of club 1, then of club 2.
    * bipartite: x side, y side. Two bipartite graphs: gate 1, gate 2 (both on
      the x side), remaining x and y nodes of graph 1, then of graph 2.
    """
    spec.check_bounds()
    return _GENERATORS[spec.kind](dict(spec.params))


def expected_counts(spec: FamilySpec) -> tuple[int, int]:
    """Node and edge counts implied by the family's construction."""
    p = dict(spec.params)
    c2 = lambda k: k * (k - 1) // 2  # noqa: E731
    k = spec.kind
    if k == "star":
        return p["n"] + 1, p["n"]
    if k == "extended_star":
        return 2 * p["n"] + 1, 2 * p["n"]
    if k == "imperfect_extended_star":
        return p["n"] + p["n_g"] + 1, p["n"] + p["n_g"]
    if k == "three_layer_extended_star":
        return 3 * p["n"] + 1, 3 * p["n"]
    if k == "star_of_stars":
        return 1 + p["n"] * (1 + p["n_d"]), p["n"] * (1 + p["n_d"])
    if k == "imperfect_star_of_stars":
        return 1 + p["n"] + p["n_g"] * p["n_d"], p["n"] + p["n_g"] * p["n_d"]
    if k in ("two_stars_hub_hub", "two_stars_via_broker"):
        extra = k == "two_stars_via_broker"
        return p["n1"] + p["n2"] + 2 + extra, p["n1"] + p["n2"] + 1 + extra
    if k == "ring_of_stars":
        return p["L"] * (p["n"] + 1), p["L"] * (p["n"] + 1)
    if k == "clique":
        return p["n"], c2(p["n"])
    if k == "two_cliques_direct":
        return 2 * p["n"], 2 * c2(p["n"]) + 1
    if k == "two_cliques_brokers":
        return 2 * p["n"] + p["L_brokers"], 2 * c2(p["n"]) + p["L_brokers"] + 1
    if k == "star_of_cliques":
        return 1 + p["m"] * p["n"], p["m"] * (c2(p["n"]) + 1)
    if k == "two_cliques_via_star":
        return 2 * p["n"] + p["m_star"], 2 * c2(p["n"]) + p["m_star"] + 1
    if k == "ring_of_cliques":
        return p["L"] * p["n"], p["L"] * (c2(p["n"]) + 1)
    if k == "hierarchy_of_cliques":
        q, n = p["q"], p["n"]
        return 1 + q + q * q * n, q + q * q + q * q * c2(n)
    if k == "rich_club":
        return p["n_c"] + p["n_p"], c2(p["n_c"]) + p["n_c"] * p["n_p"]
    if k == "two_rich_clubs":
        return 2 * (p["n_c"] + p["n_p"]), 2 * (c2(p["n_c"]) + p["n_c"] * p["n_p"]) + 1
    if k == "complete_bipartite":
        return p["n_x"] + p["n_y"], p["n_x"] * p["n_y"]
    if k == "two_bipartite":
        return 2 * (p["n_x"] + p["n_y"]), 2 * p["n_x"] * p["n_y"] + 1
    raise AssertionError(k)


# ---------------------------------------------------------------------------
# closed forms

EXACT = "exact"
LEADING = "asymptotic-leading"
CORRECTED = "asymptotic-with-corrections"


@dataclass(frozen=True)
class ClosedFormResult:
    """A formula value for b*.

    ``value`` is a ``Fraction`` for rational exact forms and a float otherwise.
    It is ``None`` when the formula's denominator vanishes, i.e. cooperation
    is never favoured.
    """

    value: Fraction | float | None
    form: str
    numerator: Fraction | float | None = None
    denominator: Fraction | float | None = None

    @property
    def never_favored(self) -> bool:
        return self.value is None

    def __float__(self) -> float:
        if self.value is None:
            raise ValueError("cooperation is never favored: b* is undefined")
        return float(self.value)


def _ratio(num, den, form=EXACT) -> ClosedFormResult:
    value = None if den == 0 else num / den
    return ClosedFormResult(value, form, num, den)


def _poly2(coef: list[list[int]], a: Fraction, b: Fraction) -> Fraction:
    """``sum coef[i][j] a**i b**j``."""
    return sum((Fraction(c) * a ** i * b ** j
                for i, row in enumerate(coef) for j, c in enumerate(row) if c), Fraction(0))


# coefficient of n**i * n_g**j
_IMPERFECT_EXT_NUM = [
    [0, 0, 0, 0, 0],
    [0, -7, -20, 9, 2],
    [-7, -325, 108, 56, 0],
    [-225, -365, 438, 0, 0],
    [96, 712, 0, 0, 0],
    [136, 0, 0, 0, 0],
]
_IMPERFECT_EXT_DEN = [
    [0, 0, 0, 11, -3],
    [0, -28, 106, -41, -1],
    [0, -445, 141, -12, 0],
    [0, -269, 185, 0, 0],
    [0, 356, 0, 0, 0],
]

# coefficient of m**i * n**j
_STAR_CLIQUES_NUM = [
    [0, 0, 2, -5, 4, -2, 2, -1, 0, 0],
    [0, 0, 2, -9, 22, -22, 1, 3, -5, 0],
    [0, 0, -8, 26, -31, 20, -9, 8, 0, 2],
]
_STAR_CLIQUES_DEN = [
    [0, -4, 18, -36, 46, -42, 24, -6, 0],
    [-8, 32, -74, 112, -99, 55, -25, 9, -4],
    [8, -44, 88, -72, 13, 9, -4, 2, 2],
]

# coefficient of n**i * q**j
_HIER_NUM = [
    [0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
    [0, 0, 0, -32, -80, 48, 192, 32, -112, -48],
    [0, 0, 16, 224, 412, -532, -1268, 116, 1064, 416],
    [0, 32, 12, -610, -930, 2026, 3558, -1488, -4272, -1592],
    [0, -120, -168, 871, 982, -4400, -5652, 5289, 10158, 3680],
    [4, 110, 154, -540, 410, 6546, 5245, -10821, -16333, -5815],
    [-20, 93, 288, -86, -2494, -7219, -2896, 13858, 18330, 6562],
    [40, -160, -572, 294, 3689, 6888, 995, -12290, -14872, -5452],
    [-40, -57, 430, 188, -3357, -5751, 332, 8622, 9035, 3398],
    [20, 170, -407, -911, 1702, 3253, -996, -4385, -3719, -1527],
    [-4, -69, 328, 539, -695, -379, 2282, 2535, 1281, 566],
    [0, -4, -197, -468, -713, -1400, -1666, -678, -144, -170],
    [0, -3, 26, 160, 602, 1235, 1204, 518, 176, 98],
    [0, 0, -6, -61, -230, -349, -184, -2, -28, -36],
    [0, 0, 0, 0, 6, 26, 54, 70, 52, 16],
]
_HIER_DEN = [
    [0, 0, 0, 0, 0, 32, 80, 0, -80, -32],
    [0, 0, 0, 0, -48, -248, -280, 400, 768, 272],
    [0, 0, 0, -16, 184, 624, -200, -2612, -3124, -1032],
    [0, 0, 32, 68, -360, -586, 2572, 7482, 7348, 2364],
    [0, 0, -120, -62, 456, -462, -5714, -11956, -11046, -3648],
    [0, 12, 72, -234, -84, 1501, 4335, 9459, 10319, 3892],
    [0, -50, 266, 762, -684, -265, 4176, 872, -4844, -2833],
    [0, 62, -460, -665, 1151, -2571, -12452, -10140, -981, 1264],
    [0, 20, 184, -421, -1095, 4334, 13630, 11894, 3627, -117],
    [0, -120, 96, 1260, 914, -3815, -9143, -7795, -2917, -216],
    [0, 118, -92, -1190, -1310, 1128, 3660, 3406, 1464, 152],
    [0, -50, -10, 311, 328, -207, -564, -562, -268, -2],
    [0, 8, 22, 97, 272, 293, 136, 80, 24, -20],
    [0, 0, -24, -116, -190, -98, 50, 86, 52, 16],
]

# two stars joined hub to hub: coefficient of n1**i * n2**j
_TWO_STARS_NUM = [
    [0, 50, 175, 227, 129, 27],
    [50, 450, 1065, 1042, 437, 60],
    [175, 1065, 2066, 1686, 551, 41],
    [227, 1042, 1686, 1170, 307, 8],
    [129, 437, 551, 307, 64, 0],
    [27, 60, 41, 8, 0, 0],
]
_TWO_STARS_DEN = [
    [0, 0, 0, 0, 0],
    [0, 100, 240, 188, 48],
    [0, 240, 636, 544, 148],
    [0, 188, 544, 480, 128],
    [0, 48, 148, 128, 32],
]


def _cf_clique(n):
    return _ratio(Fraction(-(n - 1)), Fraction(1))


def _cf_star(n):
    # tau_x = 4n/(n+1) on every node and the denominator cancels identically
    return _ratio(Fraction(4 * n * (n - 1), n + 1), Fraction(0))


def _cf_complete_bipartite(nx, ny):
    tau = Fraction(4 * nx * ny, nx + ny)
    edges = 2 * nx * ny
    return _ratio(tau * edges - 2 * edges, Fraction(0))


def _cf_two_cliques_direct(n):
    n = Fraction(n)
    d = n * (n + 1) * (n ** 3 + 2 * n - 1) - 2
    return _ratio(n * n * d - 2 * n ** 3 * (n - 2), d)


def _cf_one_broker(n):
    n = Fraction(n)
    num = 8 * n**9 - 10 * n**8 + 37 * n**7 - 32 * n**6 + 34 * n**5 - 76 * n**4 + 81 * n**3 - 26 * n**2
    den = 20 * n**7 - 42 * n**6 + 104 * n**5 - 100 * n**4 - 100 * n**3 + 222 * n**2 - 116 * n + 16
    return _ratio(num, den)


def _cf_extended_star(n):
    n = Fraction(n)
    return _ratio(56 * n * n - 39 * n - 1, 22 * n * n - 20 * n - 2)


def _cf_imperfect_extended_star(n, ng):
    n, ng = Fraction(n), Fraction(ng)
    return _ratio(_poly2(_IMPERFECT_EXT_NUM, n, ng), _poly2(_IMPERFECT_EXT_DEN, n, ng))


def _cf_three_layer(n):
    n = Fraction(n)
    # constant term is -6: at n = 1 this is the 4-node path, b* = 4
    return _ratio(106940 * n**3 - 52194 * n**2 - 4820 * n - 6,
                  41723 * n**3 - 18453 * n**2 - 10790 * n)


def _cf_two_stars_hub_hub(n1, n2):
    a, b = Fraction(n1), Fraction(n2)
    return _ratio(_poly2(_TWO_STARS_NUM, a, b), _poly2(_TWO_STARS_DEN, a, b))


def _cf_two_stars_via_broker_identical(n):
    n = Fraction(n)
    return _ratio((n + 1) * (36 * n * n + 90 * n + 19), 4 * n * (3 * n * n + 11 * n + 9))


def _cf_star_of_stars(n, nd):
    n, d = Fraction(n), Fraction(nd)
    num = (n * n * (12 * d**3 + 47 * d**2 + 44 * d + 9)
           - n * (6 * d**3 + 31 * d**2 + 33 * d + 8) - (d + 1))
    den = 2 * d * (n - 1) * (2 + n * (3 * d + 8) * (d + 1))
    return _ratio(num, den)


def _cf_imperfect_star_of_stars(n, ng, nd):
    n, g, d = Fraction(n), Fraction(ng), Fraction(nd)
    alpha = (
        n**5 * (16 * d**3 + 82 * d**2 + 120 * d + 54)
        + n**4 * (g * (112 * d**4 + 460 * d**3 + 600 * d**2 + 252 * d)
                  + 16 * d**4 + 74 * d**3 + 92 * d**2 + 22 * d - 12)
        + n**3 * (g**2 * (48 * d**5 + 256 * d**4 + 390 * d**3 + 182 * d**2)
                  + g * (-32 * d**5 - 138 * d**4 - 256 * d**3 - 227 * d**2 - 77 * d)
                  - 16 * d**4 - 90 * d**3 - 171 * d**2 - 135 * d - 38)
        + n**2 * (g**3 * (22 * d**5 + 56 * d**4 + 34 * d**3)
                  + g**2 * (28 * d**5 + 80 * d**4 + 80 * d**3 + 28 * d**2)
                  + g * (-16 * d**5 - 108 * d**4 - 238 * d**3 - 217 * d**2 - 71 * d)
                  - 3 * d**2 - 7 * d - 4)
        + n * (g**4 * (2 * d**5 + 2 * d**4)
               + g**3 * (4 * d**5 + 9 * d**4 + 5 * d**3)
               + g**2 * (-2 * d**5 - 11 * d**4 - 18 * d**3 - 9 * d**2)
               + g * (-3 * d**3 - 7 * d**2 - 4 * d))
    )
    beta = (
        n**4 * (g * (64 * d**4 + 256 * d**3 + 296 * d**2 + 96 * d))
        + n**3 * (g**2 * (32 * d**5 + 148 * d**4 + 162 * d**3 + 28 * d**2)
                  + g * (-32 * d**5 - 148 * d**4 - 226 * d**3 - 124 * d**2 - 8 * d))
        + n**2 * (g**3 * (4 * d**5 - 6 * d**4 - 22 * d**3)
                  + g**2 * (28 * d**5 + 98 * d**4 + 108 * d**3 + 48 * d**2)
                  + g * (-32 * d**5 - 180 * d**4 - 342 * d**3 - 264 * d**2 - 72 * d))
        + n * (g**4 * (-2 * d**4)
               + g**3 * (-12 * d**5 - 42 * d**4 - 28 * d**3)
               + g**2 * (12 * d**5 + 60 * d**4 + 96 * d**3 + 44 * d**2)
               + g * (-12 * d**3 - 28 * d**2 - 16 * d))
        + g**4 * (-2 * d**5 - 4 * d**4) + g**3 * (2 * d**5 + 12 * d**4 + 8 * d**3)
    )
    return _ratio(alpha, beta)


def _cf_ring_of_stars(L, n):
    # lam and R are irrational, so evaluate at high precision; only R**-L and
    # R**-2L enter after dividing numerator and denominator by R**2L
    with mpmath.workdps(60):
        n = mpmath.mpf(n)
        lam = mpmath.sqrt((n + 1) * (n + 3))
        R = n + 2 + lam
        u = R ** (-L)
        u2 = u * u
        alpha = (n + 2) ** 2 * (
            L * (n + 1) * (-2 * (n * (2 * n + 11) + 13) * u + (n * (lam + 2 * n + 9) + 11)
                           + (2 * n ** 2 - lam * n + 9 * n + 11) * u2)
            + 2 * u * (n ** 2 * (n + 9) + 28 * n + 26)
            - (n ** 2 * (n + 9) + n * (lam + 24) + 22)
            + (-n ** 3 - 9 * n ** 2 + lam * n - 24 * n - 22) * u2)
        beta = 2 * (
            L * (n + 1) * (-2 * (n**4 + 7 * n**3 + 19 * n**2 + 24 * n + 13) * u
                           + (n**4 + 7 * n**3 + 17 * n**2 + (lam + 20) * n + 11)
                           + (n**4 + 7 * n**3 + 17 * n**2 - lam * n + 20 * n + 11) * u2)
            + 2 * (n + 2) * (n**4 + 9 * n**3 + 30 * n**2 + 44 * n + 26) * u
            - (n**5 + 11 * n**4 + 46 * n**3 + 94 * n**2 + (lam + 98) * n + 44)
            + (-n**5 - 11 * n**4 - 46 * n**3 - 94 * n**2 + lam * n - 98 * n - 44) * u2)
        return _ratio(float(alpha), float(beta))


def _cf_star_of_cliques(m, n):
    m, n = Fraction(m), Fraction(n)
    return _ratio(_poly2(_STAR_CLIQUES_NUM, m, n), _poly2(_STAR_CLIQUES_DEN, m, n))


def _cf_hierarchy(q, n):
    q, n = Fraction(q), Fraction(n)
    return _ratio(_poly2(_HIER_NUM, n, q), _poly2(_HIER_DEN, n, q))


def _cf_two_bipartite(nx, ny):
    # a is the gate side (x), b the other side; the last term of alpha carries
    # a factor b, which makes n_x = 1 reduce to two identical stars hub to hub
    a, b = Fraction(nx), Fraction(ny)
    alpha = a * (b + 1) ** 2 * (
        2 * a**4 * b * (b + 1) * (3 * b + 2) * (3 * b + 4) * (8 * b - 1)
        + a**3 * b * (42 * b**4 + 474 * b**3 + 945 * b**2 + 623 * b + 126)
        - a**2 * (36 * b**5 + 235 * b**4 + 263 * b**3 + 24 * b**2 - 24 * b + 12)
        - a * (3 * b + 2) * (6 * b**3 + 43 * b**2 + 25 * b - 6)
        - 2 * b * (b**2 + 9 * b + 6))
    beta = (
        4 * a**5 * b * (b + 1) * (3 * b + 2) * (3 * b + 4) * (b * (b + 2) + 2)
        + 2 * a**4 * (18 * b**7 + 102 * b**6 + 274 * b**5 + 435 * b**4 + 429 * b**3
                      + 316 * b**2 + 204 * b + 64)
        + a**3 * (24 * b**7 + 84 * b**6 + 20 * b**5 - 155 * b**4 - 240 * b**3 - 467 * b**2
                  - 538 * b - 192)
        + a**2 * (8 * b**6 - 89 * b**5 - 531 * b**4 - 848 * b**3 - 412 * b**2 + 56 * b + 60)
        + a * (34 * b**5 + 127 * b**4 + 138 * b**3 + 39 * b**2 + 2 * b + 4)
        + 2 * b * (b + 1) * (3 * b * (b + 3) + 4))
    return _ratio(alpha, beta)


def closed_form_bstar(spec: FamilySpec) -> ClosedFormResult | None:
    """Exact b* for families with a known closed form, else ``None``.

    Rational forms are evaluated with ``Fraction``; the ring of stars involves
    ``sqrt((n+1)(n+3))`` and is evaluated with 60-digit ``mpmath``.
    """
    p = dict(spec.params)
    if any(v == INF for v in p.values()):
        raise FamilyParameterError("closed forms need finite parameters; use asymptotic_bstar")
    k = spec.kind
    if k == "star":
        return _cf_star(p["n"])
    if k == "complete_bipartite":
        return _cf_complete_bipartite(p["n_x"], p["n_y"])
    if k == "clique":
        return _cf_clique(p["n"])
    if k == "two_cliques_direct":
        return _cf_two_cliques_direct(p["n"])
    if k == "two_cliques_brokers":
        if p["L_brokers"] == 0:
            return _cf_two_cliques_direct(p["n"])
        if p["L_brokers"] == 1:
            return _cf_one_broker(p["n"])
        return None
    if k == "two_cliques_via_star" and p["m_star"] == 1:
        return _cf_one_broker(p["n"])
    if k == "extended_star":
        return _cf_extended_star(p["n"])
    if k == "imperfect_extended_star":
        return _cf_imperfect_extended_star(p["n"], p["n_g"])
    if k == "three_layer_extended_star":
        return _cf_three_layer(p["n"])
    if k == "two_stars_hub_hub":
        return _cf_two_stars_hub_hub(p["n1"], p["n2"])
    if k == "two_stars_via_broker" and p["n1"] == p["n2"]:
        return _cf_two_stars_via_broker_identical(p["n1"])
    if k == "ring_of_stars":
        return _cf_ring_of_stars(p["L"], p["n"])
    if k == "star_of_stars":
        return _cf_star_of_stars(p["n"], p["n_d"])
    if k == "imperfect_star_of_stars":
        return _cf_imperfect_star_of_stars(p["n"], p["n_g"], p["n_d"])
    if k == "star_of_cliques":
        return _cf_star_of_cliques(p["m"], p["n"])
    if k == "hierarchy_of_cliques":
        return _cf_hierarchy(p["q"], p["n"])
    if k == "two_bipartite":
        return _cf_two_bipartite(p["n_x"], p["n_y"])
    return None


# ---------------------------------------------------------------------------
# asymptotics


def _inv(x) -> float:
    return 0.0 if x == INF else 1.0 / x


def _result(value: float, corrected: bool) -> ClosedFormResult:
    return ClosedFormResult(float(value), CORRECTED if corrected else LEADING)


def _pole(msg: str):
    raise AsymptoticRegimeError(msg)


def asymptotic_bstar(spec: FamilySpec) -> ClosedFormResult | None:
    """Large-size expansion of b*, or ``None`` when the family has none.

    Parameters may be ``inf``. The regime of each expansion is noted inline;
    parameter values at a pole of the expansion raise
    :class:`AsymptoticRegimeError`.
    """
    p = dict(spec.params)
    k = spec.kind

    if k == "extended_star":
        return _result(28 / 11, False)

    if k == "imperfect_extended_star":
        # n_g << n
        n, g = p["n"], p["n_g"]
        if g == INF:
            _pole("imperfect_extended_star expansion needs finite n_g")
        lead = 34 / (89 * g) * n
        return _result(lead + (28539 * g + 8845) / (15842 * g), True)

    if k == "three_layer_extended_star":
        return _result(106940 / 41723 - 204326442 / 1740808729 * _inv(p["n"]), True)

    if k == "star_of_stars":
        # n << n_d
        n, d = p["n"], p["n_d"]
        if n == 1:
            _pole("star_of_stars expansion has a pole at n = 1")
        return _result(2 + _inv(n - 1) + (0.5 - _inv(n - 1)) * _inv(d), True)

    if k == "imperfect_star_of_stars":
        # n_g << n << n_d
        g = p["n_g"]
        if g == 1:
            _pole("imperfect_star_of_stars expansion has a pole at n_g = 1")
        return _result(1.5 + 0.5 * _inv(g - 1), False)

    if k == "two_stars_hub_hub":
        n1, n2 = p["n1"], p["n2"]
        if n1 == n2:
            return _result(2.5 + 7 / 4 * _inv(n1), True)
        if INF in (n1, n2):
            _pole("two_stars_hub_hub with one infinite side has no expansion")
        a = n2 / n1
        return _result(2 + 1 / (4 * a) + a / 4
                       + (a + 1) * (9 * a * a + 10 * a + 9) / (32 * a * a * n1), True)

    if k == "two_stars_via_broker":
        n1, n2 = p["n1"], p["n2"]
        if n1 == n2:
            return _result(3 - 0.5 * _inv(n1), True)
        if INF in (n1, n2):
            _pole("two_stars_via_broker with one infinite side has no expansion")
        lam = n2 / n1
        # correction sign fixed so that lam = 1 reproduces 3 - 1/(2n)
        return _result(2.5 + 1 / (4 * lam) + lam / 4
                       - (lam + 1) * (lam + 3) * (3 * lam + 1) / (64 * lam * lam * n1), True)

    if k == "ring_of_stars":
        L, n = p["L"], p["n"]
        if L != INF and L < 3:
            _pole("ring_of_stars needs L >= 3")
        if L == INF:
            return _result(1.5 + _inv(n) - 0.75 * _inv(n) ** 2, True)
        v = ((3 * L - 1) / (2 * L - 2) + (2 * L * L + L + 3) / (2 * (L - 1) ** 2) * _inv(n)
             - (3 * L**3 - 6 * L**2 - 15 * L - 18) / (4 * (L - 1) ** 3) * _inv(n) ** 2)
        return _result(v, True)

    if k == "two_cliques_direct":
        n = p["n"]
        if n == INF:
            return _result(INF, False)
        return _result(n * n - 2 / n + 6 / n**2, True)

    if k == "two_cliques_brokers":
        n, L = p["n"], p["L_brokers"]
        if n == INF:
            return _result(INF, False)
        if L == 0:
            return _result(n * n - 2 / n + 6 / n**2, True)
        if L == 1:
            return _result(0.4 * n * n + 0.34 * n + 121 / 250, True)
        if L == 2:
            return _result(4 * n - 224 / 5 + 42304 / (75 * n), True)
        if L == INF:
            _pole("two_cliques_brokers chains need L << n")
        return _result(4 * n / (L - 1), False)

    if k == "two_cliques_via_star":
        n, m = p["n"], p["m_star"]
        if m == INF:
            _pole("two_cliques_via_star expansion needs m_star << n")
        if n == INF:
            return _result(INF, False)
        if m == 1:
            return _result(0.4 * n * n + 0.34 * n + 121 / 250, True)
        lead = (m + 4) * (m + 1) / (m * m + m - 2)
        const = ((m + 1) * (15 * m**4 + 178 * m**3 + 579 * m**2 + 776 * m + 452)
                 / (2 * (3 * m + 5) * (m * m + m - 2) ** 2))
        # negative constant; it gives the -51 of the m_star = 2 case
        return _result(lead * n - const, True)

    if k == "star_of_cliques":
        m, n = p["m"], p["n"]
        if m == INF:
            _pole("star_of_cliques expansion needs finite m")
        if m <= 2:
            _pole("star_of_cliques expansion has a pole at m = 2")
        if n == INF:
            return _result(INF, False)
        v = (m / (m - 2) * n - (m + 8) * (m - 1) / (m - 2) ** 2
             + (14 * m**4 + 11 * m**3 - 14 * m**2 - 50 * m + 44) / (2 * m * (m - 2) ** 3 * n))
        return _result(v, True)

    if k == "ring_of_cliques":
        L, n = p["L"], p["n"]
        if L != INF and L <= 2:
            _pole("ring_of_cliques expansion has a pole at L = 2")
        if n == INF:
            return _result(INF, False)
        if L == INF:
            return _result(n - 1, True)
        return _result(L / (L - 2) * n - ((L + 1) ** 2 - 5) / (L - 2) ** 2, True)

    if k == "hierarchy_of_cliques":
        q, n = p["q"], p["n"]
        if q == INF:
            _pole("hierarchy expansion needs finite q")
        if n == INF:
            return _result(INF, False)
        lead = q * q * (2 * q * q + q + 1) / (q * q * (2 * q * q + q + 3) - 6 * q - 4)
        top = (-16 * q**11 - 60 * q**10 - 152 * q**9 - 307 * q**8 - 689 * q**7 - 1105 * q**6
               - 523 * q**5 + 827 * q**4 + 1226 * q**3 + 619 * q**2 + 136 * q + 12)
        bottom = (q + 1) ** 2 * (4 * q + 3) * (q * (q * (2 * q * q + q + 3) - 6) - 4) ** 2
        return _result(lead * n + top / bottom, True)

    if k == "rich_club":
        m, npp = p["n_c"], p["n_p"]
        if m == 1:
            _pole("rich_club expansion has a pole at n_c = 1 (the star)")
        if m == INF:
            _pole("rich_club expansion needs finite n_c")
        N = m + npp
        return _result(-(2 * N / 3) * (2 * m - 1) / (m - 1)
                       + (8 * m + 39 + 20 / (m - 1)) / 18, True)

    if k == "two_rich_clubs":
        c, npp = p["n_c"], p["n_p"]
        if c == INF:
            _pole("two_rich_clubs expansion needs finite n_c")
        corr = 4 * c * c - 47 * c / 4 - 1 / (4 * c) - 45 / (3 * c + 2) + 75 / 4
        return _result(4 * c - 1.5 + corr * _inv(npp), True)

    if k == "two_bipartite":
        nx, ny = p["n_x"], p["n_y"]
        if nx == ny:
            if nx == INF:
                return _result(INF, False)
            return _result(2 * nx - 1 + 3 / nx, True)
        if nx == INF:
            _pole("two_bipartite expansion needs n_x << n_y")
        corr = 14 - 1 / (4 * nx) + nx - 4 * nx * nx - 45 / (3 * nx + 2)
        return _result(4 * nx - 1.5 + corr * _inv(ny), True)

    return None
