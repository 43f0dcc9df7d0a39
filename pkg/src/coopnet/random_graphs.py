"""Seeded random-graph models and edge rewiring.

Every generator is a pure function of its parameters and seed. Seeds are
64-bit unsigned integers; ensembles derive one independent stream per task
with :func:`stream`, so results do not depend on how tasks are scheduled.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .graph import Graph, GraphError, Partition, is_connected

ER_MAX_ATTEMPTS = 10_000
REWIRE_MAX_ATTEMPTS = 1_000


class GenerationError(RuntimeError):
    """Rejection sampling hit its attempt cap."""


@dataclass(frozen=True)
class RngSeed:
    """Master seed plus task index; each pair names an independent stream."""

    seed: int
    task: int = 0

    def __post_init__(self):
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.task < 0:
            raise ValueError("task index must be non-negative")

    def generator(self) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(
            np.random.SeedSequence(self.seed, spawn_key=(self.task,))))


def stream(seed: int | RngSeed | np.random.Generator, task: int = 0) -> np.random.Generator:
    """Generator for ``(seed, task)``; an existing Generator is passed through."""
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, RngSeed):
        return seed.generator()
    return RngSeed(int(seed), task).generator()


def _check_prob(name: str, p: float) -> None:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {p}")


def _bernoulli_pairs(rng: np.random.Generator, n: int, prob: np.ndarray) -> list[tuple[int, int]]:
    iu, ju = np.triu_indices(n, 1)
    keep = rng.random(len(iu)) < prob[iu, ju]
    return list(zip(iu[keep].tolist(), ju[keep].tolist()))


def erdos_renyi(n: int, p: float, seed=0, require_connected: bool = False) -> Graph:
    """G(n, p): every unordered pair is linked independently with probability ``p``.

    With ``require_connected`` the graph is redrawn until connected, at most
    10^4 times.
    """
    if n < 1:
        raise ValueError("n must be positive")
    _check_prob("p", p)
    rng = stream(seed)
    prob = np.full((n, n), p)
    for _ in range(ER_MAX_ATTEMPTS if require_connected else 1):
        g = Graph.from_edges(n, _bernoulli_pairs(rng, n, prob))
        if not require_connected or is_connected(g):
            return g
    raise GenerationError(
        f"no connected G({n}, {p}) sample in {ER_MAX_ATTEMPTS} attempts")


def sbm(sizes: Sequence[int], p_within: float, p_between: float,
        seed=0) -> tuple[Graph, Partition]:
    """Stochastic block model with blocks laid out in order; returns the planted partition."""
    if not sizes or any(s < 1 for s in sizes):
        raise ValueError("block sizes must be positive")
    _check_prob("p_within", p_within)
    _check_prob("p_between", p_between)
    labels = np.repeat(np.arange(len(sizes)), sizes)
    n = len(labels)
    prob = np.where(labels[:, None] == labels[None, :], p_within, p_between)
    g = Graph.from_edges(n, _bernoulli_pairs(stream(seed), n, prob))
    return g, Partition(tuple(labels.tolist()))


def preferential_attachment(n: int, m_links: int, attractiveness: float = 0.0,
                            seed=0) -> Graph:
    """Growth with linear preferential attachment and initial attractiveness.

    The seed graph is the complete graph on ``m_links + 1`` nodes. Each later
    node attaches to ``m_links`` distinct existing nodes drawn with probability
    proportional to ``degree + attractiveness``. The edge count is
    ``C(m_links + 1, 2) + m_links * (n - m_links - 1)``.
    """
    if m_links < 1:
        raise ValueError("m_links must be at least 1")
    if attractiveness < 0:
        raise ValueError("attractiveness must be non-negative")
    if n <= m_links:
        raise ValueError(f"n={n} must exceed m_links={m_links}")
    rng = stream(seed)
    core = m_links + 1
    edges = [(u, v) for u in range(min(core, n)) for v in range(u + 1, min(core, n))]
    weight = np.zeros(n)
    weight[:min(core, n)] = min(core, n) - 1 + attractiveness
    for new in range(core, n):
        w = weight[:new]
        targets = rng.choice(new, size=m_links, replace=False, p=w / w.sum())
        for t in targets.tolist():
            edges.append((t, new))
            weight[t] += 1
        weight[new] = m_links + attractiveness
    return Graph.from_edges(n, edges)


def rewire(g: Graph, p: float, seed=0) -> Graph:
    """Replace each edge with probability ``p`` by a uniformly random non-edge.

    Both endpoints are resampled, so the edge count is preserved exactly.
    Selected edges are removed first, then each is replaced in turn by a
    non-edge of the current graph. Disconnected results are redrawn, at most
    10^3 times. On a complete graph nothing can move and ``g`` is returned.
    """
    _check_prob("p", p)
    n = g.node_count
    base = g.edges()
    if p == 0.0 or len(base) == n * (n - 1) // 2:
        return g
    rng = stream(seed)
    for _ in range(REWIRE_MAX_ATTEMPTS):
        picked = rng.random(len(base)) < p
        present = {e for e, moved in zip(base, picked) if not moved}
        for _ in range(int(picked.sum())):
            while True:
                u, v = rng.choice(n, size=2, replace=False).tolist()
                e = (min(u, v), max(u, v))
                if e not in present:
                    present.add(e)
                    break
        h = Graph.from_edges(n, present)
        if is_connected(h):
            return h
    raise GenerationError(f"no connected rewiring with p={p} in {REWIRE_MAX_ATTEMPTS} attempts")


def parse_model(text: str) -> tuple[str, dict]:
    """Split ``"er:n=40,p=0.3,seed=7"`` into the model name and typed parameters."""
    kind, _, rest = text.strip().partition(":")
    params: dict = {}
    for item in filter(None, (s.strip() for s in rest.split(","))):
        name, eq, val = item.partition("=")
        if not eq:
            raise ValueError(f"expected name=value, got {item!r}")
        val = val.strip()
        try:
            params[name.strip()] = int(val)
        except ValueError:
            try:
                params[name.strip()] = float(val)
            except ValueError:
                raise ValueError(f"{name}: not a number: {val!r}") from None
    return kind.strip(), params


def generate_model(text: str) -> Graph:
    """Build a graph from a model string such as ``er:n=40,p=0.3,seed=7``.

    Models: ``er`` (n, p, seed, connected=0|1), ``pa`` (n, m, a, seed) and
    ``sbm`` (n1, n2, ..., p_in, p_out, seed).
    """
    kind, p = parse_model(text)
    seed = int(p.pop("seed", 0))
    try:
        if kind == "er":
            return erdos_renyi(int(p["n"]), float(p["p"]), seed,
                               require_connected=bool(p.get("connected", 0)))
        if kind == "pa":
            return preferential_attachment(int(p["n"]), int(p["m"]), float(p.get("a", 0.0)), seed)
        if kind == "sbm":
            sizes = [int(p[k]) for k in sorted((k for k in p if k.startswith("n")),
                                               key=lambda k: int(k[1:]))]
            return sbm(sizes, float(p["p_in"]), float(p["p_out"]), seed)[0]
    except KeyError as exc:
        raise ValueError(f"model {kind!r} needs parameter {exc.args[0]}") from None
    raise GraphError(f"unknown random model {kind!r}; known: er, pa, sbm")
