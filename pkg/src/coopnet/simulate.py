"""Monte Carlo death-birth dynamics for the donation game.

A trial starts from all defectors, turns one uniformly random node into a
cooperator and runs until absorption. Each step a uniformly random node dies
and copies neighbour ``y`` with probability proportional to
``1 + delta * pi_y``, where ``pi_y = -c * s_y + b * (cooperating fraction of
y's neighbours)`` is y's edge-averaged payoff.

Every trial draws from its own splitmix64 stream keyed by ``(seed, trial)``,
so counts do not depend on how trials are batched.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numba as nb
import numpy as np

from .coalescence import PROMOTER, bstar_db, solve_coalescence
from .graph import Graph, GraphError, is_connected

DEFAULT_MAX_STEPS = 100_000_000
DEFAULT_FACTORS = (0.9, 0.95, 1.0, 1.05, 1.1)
CSV_HEADER = ("b", "c", "delta", "trials", "fixations", "rho_hat", "std_err", "n_rho",
              "capped")


class SimulationConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SimulationConfig:
    b: float
    c: float = 1.0
    delta: float = 0.01
    trials: int = 100_000
    seed: int = 0
    max_steps: int = DEFAULT_MAX_STEPS

    def __post_init__(self):
        if not (math.isfinite(self.b) and math.isfinite(self.c) and math.isfinite(self.delta)):
            raise SimulationConfigError("b, c and delta must be finite")
        if self.delta < 0:
            raise SimulationConfigError("delta must be non-negative")
        if self.trials < 1:
            raise SimulationConfigError("trials must be positive")
        if self.max_steps < 1:
            raise SimulationConfigError("max_steps must be positive")
        if not 0 <= self.seed < 2**64:
            raise SimulationConfigError("seed must be a 64-bit unsigned integer")
        # payoffs range over -c*s + b*f with s in {0, 1} and f in [0, 1]
        worst = min(0.0, self.b) + min(0.0, -self.c)
        if 1.0 + self.delta * worst <= 0.0:
            raise SimulationConfigError(
                f"replacement weight 1 + delta*pi can reach {1 + self.delta * worst:g} <= 0")


@dataclass(frozen=True)
class SimulationResult:
    """Fixation statistics over the trials that absorbed within the step cap."""

    fixation_count: int
    trials: int
    n: int
    capped: int = 0
    mean_steps: float = field(default=0.0, compare=False)

    @property
    def rho_hat(self) -> float:
        return self.fixation_count / self.trials if self.trials else math.nan

    @property
    def std_err(self) -> float:
        r = self.rho_hat
        return math.sqrt(r * (1.0 - r) / self.trials) if self.trials else math.nan

    @property
    def n_rho(self) -> float:
        return self.n * self.rho_hat


@nb.njit(inline="always")
def _splitmix(x):
    x = x + np.uint64(0x9E3779B97F4A7C15)
    z = x
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return x, z ^ (z >> np.uint64(31))


@nb.njit(cache=True)
def _step(indptr, nbr, s, nc, count, i, u, b, c, delta):
    """Death of node ``i`` with uniform draw ``u``; returns the new cooperator count.

    ``nc[y]`` is the number of cooperating neighbours of ``y`` and is updated
    in place together with ``s``.
    """
    wc = 0.0
    wt = 0.0
    for jj in range(indptr[i], indptr[i + 1]):
        j = nbr[jj]
        w = 1.0 + delta * (-c * s[j] + b * nc[j] / (indptr[j + 1] - indptr[j]))
        wt += w
        if s[j]:
            wc += w
    new = 1 if u * wt < wc else 0
    if new != s[i]:
        s[i] = new
        d = 1 if new else -1
        count += d
        for jj in range(indptr[i], indptr[i + 1]):
            nc[nbr[jj]] += d
    return count


@nb.njit(cache=True)
def _trial(indptr, nbr, b, c, delta, state, max_steps):
    n = len(indptr) - 1
    s = np.zeros(n, np.uint8)
    nc = np.zeros(n, np.int64)
    state, r = _splitmix(state)
    first = int(r % np.uint64(n))
    s[first] = 1
    for jj in range(indptr[first], indptr[first + 1]):
        nc[nbr[jj]] += 1
    count = 1
    steps = 0
    while 0 < count < n:
        if steps == max_steps:
            return -1, steps
        steps += 1
        state, r = _splitmix(state)
        i = int(r % np.uint64(n))
        state, r = _splitmix(state)
        u = (r >> np.uint64(11)) * (1.0 / 9007199254740992.0)
        count = _step(indptr, nbr, s, nc, count, i, u, b, c, delta)
    return (1 if count == n else 0), steps


@nb.njit(cache=True)
def _run(indptr, nbr, b, c, delta, key, first, count, max_steps):
    fixed = 0
    capped = 0
    total_steps = 0
    for t in range(first, first + count):
        x = key ^ (np.uint64(t) * np.uint64(0xD1B54A32D192ED03))
        x, _ = _splitmix(x)
        out, steps = _trial(indptr, nbr, b, c, delta, x, max_steps)
        if out < 0:
            capped += 1
        else:
            fixed += out
            total_steps += steps
    return fixed, capped, total_steps


def _csr(g: Graph) -> tuple[np.ndarray, np.ndarray]:
    indptr = np.zeros(g.node_count + 1, dtype=np.int64)
    indptr[1:] = np.cumsum(g.degree)
    nbr = np.fromiter((y for a in g.adjacency for y in a), dtype=np.int64, count=indptr[-1])
    return indptr, nbr


def _key(seed: int) -> np.uint64:
    return np.uint64(np.random.SeedSequence(seed).generate_state(1, np.uint64)[0])


def death_birth_step(g: Graph, strategies: Sequence[int], node: int, u: float,
                     b: float, c: float = 1.0, delta: float = 0.01) -> list[int]:
    """One update with a given dying ``node`` and uniform draw ``u``; pure helper for tests."""
    indptr, nbr = _csr(g)
    s = np.array(strategies, dtype=np.uint8)
    nc = np.array([int(s[list(a)].sum()) for a in g.adjacency], dtype=np.int64)
    _step(indptr, nbr, s, nc, int(s.sum()), node, u, b, c, delta)
    return s.tolist()


def estimate_fixation(g: Graph, cfg: SimulationConfig, first_trial: int = 0) -> SimulationResult:
    """Fixation frequency of a single random cooperator over ``cfg.trials`` trials.

    Trials that hit ``cfg.max_steps`` are reported in ``capped`` and left out
    of ``trials``. ``first_trial`` offsets the trial streams, so two runs
    covering ``[0, k)`` and ``[k, m)`` add up to one run over ``[0, m)``.
    """
    if g.node_count < 2 or not is_connected(g):
        raise GraphError("simulation needs a connected graph with at least 2 nodes")
    indptr, nbr = _csr(g)
    fixed, capped, steps = _run(indptr, nbr, float(cfg.b), float(cfg.c), float(cfg.delta),
                                _key(cfg.seed), first_trial, cfg.trials, cfg.max_steps)
    done = cfg.trials - capped
    return SimulationResult(fixation_count=int(fixed), trials=done, n=g.node_count,
                            capped=int(capped), mean_steps=steps / done if done else math.nan)


def crossover_scan(g: Graph, delta: float, trials: int, seed: int,
                   factors: Sequence[float] = DEFAULT_FACTORS, c: float = 1.0,
                   max_steps: int = DEFAULT_MAX_STEPS) -> list[tuple[float, SimulationResult]]:
    """Simulate at ``b = factor * b*`` for each factor; the graph must be a Promoter."""
    report = bstar_db(solve_coalescence(g), g)
    if report.classification != PROMOTER:
        raise ValueError(f"crossover scan needs a Promoter graph, got {report.classification}")
    out = []
    for f in factors:
        b = f * report.b_star * c
        cfg = SimulationConfig(b=b, c=c, delta=delta, trials=trials, seed=seed,
                               max_steps=max_steps)
        out.append((b, estimate_fixation(g, cfg)))
    return out


def results_csv(rows: Sequence[tuple[SimulationConfig, SimulationResult]]) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for cfg, r in rows:
        w.writerow([f"{cfg.b:.12g}", f"{cfg.c:.12g}", f"{cfg.delta:.12g}", r.trials,
                    r.fixation_count, f"{r.rho_hat:.12g}", f"{r.std_err:.12g}",
                    f"{r.n_rho:.12g}", r.capped])
    return out.getvalue()


def config_dict(cfg: SimulationConfig) -> dict:
    return asdict(cfg)
