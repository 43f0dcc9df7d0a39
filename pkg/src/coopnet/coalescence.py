"""Coalescing random walks and the critical benefit-to-cost ratio.

Two random walkers started at ``x`` and ``y`` step alternately until they
meet. Their expected meeting times ``tau[x, y]`` solve a linear system with one
unknown per unordered pair of distinct nodes::

    tau[x, y] = 1 + 1/2 * sum_z P[x, z] tau[z, y] + 1/2 * sum_z P[y, z] tau[x, z]

with ``tau[x, x] = 0``. ``P`` is the replacement kernel of the update rule:
``1/k_x`` over neighbours for death-birth (DB) and ``1/(k_x + 1)`` over the
closed neighbourhood for imitation (IM).

Four backends are offered. ``direct`` diagonalises the kernel: for a
reversible ``P = D^-1 S`` the pair operator acts elementwise in the
eigenbasis, leaving one dense ``(N+1) x (N+1)`` solve for the diagonal
constraints (``O(N^4)`` work overall). ``sparse`` is an LU solve of the
``N(N-1)/2`` pair system, ``iterative`` preconditioned conjugate gradients
on the ``N x N`` matrix and ``exact`` a rational solve. The exact path
first lumps pairs into the coarsest equitable partition of the system, so
highly symmetric graphs (stars, bipartite graphs) stay small, and then solves
the quotient over the rationals with FLINT.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Literal

import flint
import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .graph import Graph, GraphError, is_connected

Method = Literal["auto", "direct", "sparse", "iterative", "exact"]

ZERO_TOL = 1e-9
DIRECT_MAX_NODES = 200
EXACT_MAX_CLASSES = 1500

PROMOTER = "Promoter"
SPITE = "SpitePromoter"
NEVER = "NeverFavored"


class DegenerateGraphError(GraphError):
    """The graph is too small or disconnected for finite meeting times."""


class ConvergenceError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# kernels


@dataclass(frozen=True)
class _Kernel:
    """Row-sparse transition kernel with exact entries ``1/denom[x]``."""

    indptr: np.ndarray
    index: np.ndarray
    denom: np.ndarray  # per source node; every entry of row x equals 1/denom[x]

    @property
    def n(self) -> int:
        return len(self.indptr) - 1

    def row(self, x: int) -> np.ndarray:
        return self.index[self.indptr[x]:self.indptr[x + 1]]

    def to_sparse(self) -> sp.csr_matrix:
        data = np.repeat(1.0 / self.denom, np.diff(self.indptr))
        return sp.csr_matrix((data, self.index, self.indptr), shape=(self.n, self.n))

    def to_fractions(self) -> list[list[Fraction]]:
        out = [[Fraction(0)] * self.n for _ in range(self.n)]
        for x in range(self.n):
            for z in self.row(x):
                out[x][int(z)] += Fraction(1, int(self.denom[x]))
        return out


def _db_kernel(g: Graph) -> _Kernel:
    rows = g.adjacency
    indptr = np.zeros(len(rows) + 1, dtype=np.int64)
    indptr[1:] = np.cumsum([len(r) for r in rows])
    index = np.fromiter((z for r in rows for z in r), dtype=np.int64, count=indptr[-1])
    return _Kernel(indptr, index, np.array(g.degree, dtype=np.int64))


def _im_kernel(g: Graph) -> _Kernel:
    rows = [tuple(sorted(r + (x,))) for x, r in enumerate(g.adjacency)]
    indptr = np.zeros(len(rows) + 1, dtype=np.int64)
    indptr[1:] = np.cumsum([len(r) for r in rows])
    index = np.fromiter((z for r in rows for z in r), dtype=np.int64, count=indptr[-1])
    return _Kernel(indptr, index, np.array(g.degree, dtype=np.int64) + 1)


def _check_graph(g: Graph) -> None:
    if g.node_count < 3:
        raise DegenerateGraphError(
            f"need at least 3 nodes, got {g.node_count}: b* is 0/0 on a single edge")
    if not is_connected(g):
        raise DegenerateGraphError("graph is disconnected: meeting times are infinite")


# ---------------------------------------------------------------------------
# pair system


def _pair_index(n: int) -> np.ndarray:
    idx = -np.ones((n, n), dtype=np.int64)
    iu, ju = np.triu_indices(n, 1)
    idx[iu, ju] = np.arange(len(iu))
    idx[ju, iu] = idx[iu, ju]
    return idx


def _pair_rows(kern: _Kernel):
    """Yield ``(i, x, y, diag, [(j, coef), ...])`` with exact coefficients.

    Coefficients are ``(num, den)`` integer pairs so the caller can choose
    float or rational arithmetic.
    """
    n = kern.n
    idx = _pair_index(n)
    dn = kern.denom
    for x in range(n - 1):
        for y in range(x + 1, n):
            i = idx[x, y]
            # self-loop terms stay on the diagonal: tau[x, y] reappears
            diag = Fraction(1)
            off: dict[int, Fraction] = {}
            for z in kern.row(x):
                z = int(z)
                if z == x:
                    diag -= Fraction(1, 2 * int(dn[x]))
                elif z != y:
                    j = int(idx[z, y])
                    off[j] = off.get(j, 0) - Fraction(1, 2 * int(dn[x]))
            for z in kern.row(y):
                z = int(z)
                if z == y:
                    diag -= Fraction(1, 2 * int(dn[y]))
                elif z != x:
                    j = int(idx[x, z])
                    off[j] = off.get(j, 0) - Fraction(1, 2 * int(dn[y]))
            if i in off:
                diag += off.pop(i)
            yield i, x, y, diag, off


def _assemble_sparse(kern: _Kernel) -> sp.csc_matrix:
    n = kern.n
    idx = _pair_index(n)
    iu, ju = np.triu_indices(n, 1)
    m = len(iu)
    rows, cols, vals = [np.arange(m)], [np.arange(m)], [np.ones(m)]
    half = 0.5 / kern.denom
    # walker at x moves to z while y stays
    for a, b in ((iu, ju), (ju, iu)):
        counts = kern.indptr[a + 1] - kern.indptr[a]
        src = np.repeat(np.arange(m), counts)
        starts = np.repeat(kern.indptr[a], counts)
        offs = np.arange(counts.sum()) - np.repeat(np.cumsum(counts) - counts, counts)
        z = kern.index[starts + offs]
        other = np.repeat(b, counts)
        w = np.repeat(half[a], counts)
        keep = z != other  # tau[y, y] = 0
        rows.append(src[keep])
        cols.append(idx[z[keep], other[keep]])
        vals.append(-w[keep])
    A = sp.csc_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                      shape=(m, m))
    A.sum_duplicates()
    return A


def _unpack(t: np.ndarray, n: int) -> np.ndarray:
    T = np.zeros((n, n))
    iu, ju = np.triu_indices(n, 1)
    T[iu, ju] = t
    T[ju, iu] = t
    return T


def _residual(kern: _Kernel, T: np.ndarray) -> float:
    P = kern.to_sparse()
    PT = np.asarray(P @ T)
    R = T - 1.0 - 0.5 * (PT + PT.T)
    np.fill_diagonal(R, 0.0)
    return float(np.abs(R).max()) if T.size > 1 else 0.0


def _solve_spectral(kern: _Kernel) -> np.ndarray:
    """Solve ``T - (P T + T P')/2 = J - I`` with ``T_zz = 0`` in P's eigenbasis.

    ``P = D^-1 S`` with ``S`` symmetric, so ``P = U diag(lam) W`` with real
    ``lam`` and ``W = U^-1``. The pair equations hold off the diagonal only;
    on the diagonal an unknown slack ``s_z`` is added to the right-hand side
    and fixed by ``T_zz = 0``. The operator is singular along the stationary
    direction (``lam_0 = 1``), whose coefficient ``c`` is the extra unknown and
    whose solvability condition is the extra equation.
    """
    n = kern.n
    d = kern.denom.astype(np.float64)
    S = kern.to_sparse().toarray() * d[:, None]
    r = 1.0 / np.sqrt(d)
    lam, V = np.linalg.eigh(r[:, None] * S * r[None, :])
    top = int(np.argmax(lam))
    order = np.r_[top, np.delete(np.arange(n), top)]
    lam, V = lam[order], V[:, order]
    U = r[:, None] * V
    W = (V * np.sqrt(d)[:, None]).T
    G = 1.0 - 0.5 * (lam[:, None] + lam[None, :])
    G[0, 0] = np.inf
    H = 1.0 / G
    Y0 = W @ (np.ones((n, n)) - np.eye(n)) @ W.T
    base = np.einsum("zi,zj,ij->z", U, U, Y0 * H)
    # M[z, s] = diagonal entry z of the response to a unit slack at s
    M = np.zeros((n, n))
    for i in range(n):
        M += (U[:, i:i + 1] * U) @ ((W[i][None, :] * W) * H[i][:, None])
    A = np.zeros((n + 1, n + 1))
    rhs = np.zeros(n + 1)
    A[:n, :n] = M
    A[:n, n] = U[:, 0] ** 2
    rhs[:n] = -base
    A[n, :n] = W[0] ** 2
    rhs[n] = -Y0[0, 0]
    sol = np.linalg.solve(A, rhs)
    Y = Y0 + (W * sol[None, :n]) @ W.T
    X = Y * H
    X[0, 0] = sol[n]
    T = U @ X @ U.T
    T = 0.5 * (T + T.T)
    np.fill_diagonal(T, 0.0)
    return T


def _solve_sparse(kern: _Kernel) -> np.ndarray:
    A = _assemble_sparse(kern)
    t = spla.spsolve(A, np.ones(A.shape[0]))
    return _unpack(np.asarray(t), kern.n)


def _solve_iterative(kern: _Kernel, tol: float, max_iter: int) -> np.ndarray:
    """Jacobi-preconditioned conjugate gradients on the symmetrised pair system.

    Scaling the equation of pair ``(x, y)`` by ``d_x d_y`` makes the system
    symmetric positive definite: the coefficient linking ``(x, y)`` and
    ``(z, y)`` becomes ``-S[x, z] d_y / 2`` in both rows. Iterates are
    symmetric matrices with a zero diagonal. Stops once the max equation
    residual is at most ``tol * max(1, max tau)``.
    """
    n = kern.n
    d = kern.denom.astype(np.float64)
    S = sp.csr_matrix(kern.to_sparse().multiply(d[:, None]))
    loops = np.asarray(S.diagonal())
    dd = d[:, None] * d[None, :]

    def apply(X):
        SXd = np.asarray(S @ X) * d[None, :]
        Y = dd * X - 0.5 * (SXd + SXd.T)
        np.fill_diagonal(Y, 0.0)
        return Y

    precond = dd - 0.5 * (loops[:, None] * d[None, :] + d[:, None] * loops[None, :])
    np.fill_diagonal(precond, 1.0)
    T = np.zeros((n, n))
    R = dd.copy()
    np.fill_diagonal(R, 0.0)
    Z = R / precond
    D = Z.copy()
    rz = float((R * Z).sum())
    for it in range(1, max_iter + 1):
        AD = apply(D)
        step = rz / float((D * AD).sum())
        T += step * D
        R -= step * AD
        Z = R / precond
        rz_new = float((R * Z).sum())
        if it % 10 == 0 or rz_new == 0.0:
            if _residual(kern, T) <= tol * max(1.0, float(T.max())):
                return T
            if rz_new == 0.0:
                break
        D = Z + (rz_new / rz) * D
        rz = rz_new
    raise ConvergenceError(f"conjugate gradients did not reach tol={tol:g} in {it} steps")


# ---------------------------------------------------------------------------
# exact path


def _equitable_classes(rows: list[tuple[Fraction, dict[int, Fraction]]]) -> list[int]:
    """Coarsest equitable partition of the pair unknowns.

    Two unknowns share a class when their diagonal coefficients agree and, for
    every class, their total off-diagonal coefficient into that class agrees.
    The unique solution of the system is constant on such classes.
    """
    color = [0] * len(rows)
    count = 1
    while True:
        sigs = {}
        new = []
        for i, (diag, off) in enumerate(rows):
            into: dict[int, Fraction] = {}
            for j, c in off.items():
                into[color[j]] = into.get(color[j], 0) + c
            sig = (color[i], diag, tuple(sorted(into.items())))
            new.append(sigs.setdefault(sig, len(sigs)))
        if len(sigs) == count:
            return new
        color, count = new, len(sigs)


def _solve_exact(kern: _Kernel) -> list[list[Fraction]]:
    n = kern.n
    rows: list[tuple[Fraction, dict[int, Fraction]]] = []
    where = []
    for _, x, y, diag, off in _pair_rows(kern):
        rows.append((diag, off))
        where.append((x, y))
    cls = _equitable_classes(rows)
    q = max(cls) + 1
    if q > EXACT_MAX_CLASSES:
        raise ValueError(
            f"exact solve needs {q} symmetry classes (limit {EXACT_MAX_CLASSES}); "
            "use method='direct'")
    rep = [-1] * q
    for i, c in enumerate(cls):
        if rep[c] < 0:
            rep[c] = i
    A = flint.fmpq_mat(q, q)
    B = flint.fmpq_mat(q, 1)
    for c, i in enumerate(rep):
        diag, off = rows[i]
        acc = [Fraction(0)] * q
        acc[c] += diag
        for j, v in off.items():
            acc[cls[j]] += v
        for d, v in enumerate(acc):
            if v:
                A[c, d] = flint.fmpq(v.numerator, v.denominator)
        B[c, 0] = 1
    X = A.solve(B)
    vals = [Fraction(int(X[c, 0].p), int(X[c, 0].q)) for c in range(q)]
    T = [[Fraction(0)] * n for _ in range(n)]
    for (x, y), c in zip(where, cls):
        T[x][y] = T[y][x] = vals[c]
    return T


# ---------------------------------------------------------------------------
# public types


@dataclass(frozen=True)
class CoalescenceSolution:
    """Death-birth meeting times on a graph.

    ``tau_pair`` is the full symmetric matrix with a zero diagonal. When the
    exact backend was used, ``exact`` holds the same quantities as fractions
    (``(p, tau_pair, tau_node)``).
    """

    p: np.ndarray
    tau_pair: np.ndarray
    tau_node: np.ndarray
    residual: float
    method: str
    exact: tuple | None = None

    @property
    def n(self) -> int:
        return len(self.p)


@dataclass(frozen=True)
class BStarReport:
    n: int
    mean_degree: float
    numerator: float
    denominator: float
    b_star: float | None
    inv_b_star: float
    classification: str
    updating: str
    method: str
    residual: float

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "mean_degree": self.mean_degree,
            "numerator": self.numerator,
            "denominator": self.denominator,
            "b_star": self.b_star,
            "inv_b_star": self.inv_b_star,
            "classification": self.classification,
            "updating": self.updating,
            "method": self.method,
            "residual": self.residual,
        }


@dataclass(frozen=True)
class TauMoments:
    tau1: float
    tau2: float
    tau3: float
    pi: np.ndarray

    @property
    def b_star(self) -> float | None:
        """``tau2 / (tau3 - tau1)``; None when cooperation is never favoured."""
        gap = self.tau3 - self.tau1
        if abs(gap) <= ZERO_TOL * max(1.0, abs(self.tau3)):
            return None
        return self.tau2 / gap


@dataclass(frozen=True)
class GameMatrix:
    """Symmetric 2x2 game: C vs C gets R, C vs D gets S, D vs C gets T, D vs D gets P."""

    R: float
    S: float
    T: float
    P: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.R, self.S, self.T, self.P)):
            raise ValueError("payoffs must be finite")

    @classmethod
    def donation(cls, b: float, c: float = 1.0) -> "GameMatrix":
        return cls(R=b - c, S=-c, T=b, P=0.0)


# ---------------------------------------------------------------------------
# solving


def _resolve_method(method: str, n: int) -> str:
    if method == "auto":
        return "direct" if n <= DIRECT_MAX_NODES else "iterative"
    if method not in ("direct", "sparse", "iterative", "exact"):
        raise ValueError(f"unknown method {method!r}")
    return method


def _solve_kernel(kern: _Kernel, method: str, tol: float, max_iter: int):
    """Return ``(T float matrix, T fractions or None, residual)``."""
    if method == "exact":
        Tq = _solve_exact(kern)
        T = np.array([[float(v) for v in row] for row in Tq])
        return T, Tq, _residual(kern, T)
    if method == "direct":
        T = _solve_spectral(kern)
    elif method == "sparse":
        T = _solve_sparse(kern)
    else:
        T = _solve_iterative(kern, tol, max_iter)
    return T, None, _residual(kern, T)


def solve_coalescence(g: Graph, method: Method = "auto", tol: float = 1e-12,
                      max_iter: int = 100_000) -> CoalescenceSolution:
    """Solve the death-birth meeting-time system on ``g``.

    ``method`` is ``direct`` (dense eigenbasis solve), ``sparse`` (LU on the
    pair system), ``iterative`` (conjugate gradients until the max equation
    residual is at most ``tol * max(1, max tau)``), ``exact`` (rational
    arithmetic) or ``auto`` (direct up to 200 nodes, iterative beyond).
    """
    _check_graph(g)
    method = _resolve_method(method, g.node_count)
    kern = _db_kernel(g)
    T, Tq, res = _solve_kernel(kern, method, tol, max_iter)
    k = np.array(g.degree, dtype=float)
    inv_k = 1.0 / k
    p = np.array([inv_k[list(a)].sum() for a in g.adjacency]) * inv_k
    tau_node = 1.0 + np.array([T[list(a), x].sum() for x, a in enumerate(g.adjacency)]) * inv_k
    exact = None
    if Tq is not None:
        kq = g.degree
        pq = [sum(Fraction(1, kq[y]) for y in a) / kq[x] for x, a in enumerate(g.adjacency)]
        tq = [1 + sum(Tq[y][x] for y in a) / kq[x] for x, a in enumerate(g.adjacency)]
        exact = (tuple(pq), Tq, tuple(tq))
    return CoalescenceSolution(p=p, tau_pair=T, tau_node=tau_node, residual=res,
                               method=method, exact=exact)


def _classify(num, den, scale, exact: bool) -> tuple[str, float | None, float]:
    if exact:
        zero = den == 0
    else:
        zero = abs(den) <= ZERO_TOL * scale
    if zero:
        return NEVER, None, 0.0
    return (PROMOTER if den > 0 else SPITE), float(num / den), float(den / num)


def bstar_db(sol: CoalescenceSolution, g: Graph) -> BStarReport:
    """Critical benefit-to-cost ratio for death-birth updating.

    ``b* = (sum tau_x k_x - 2 N kbar) / (sum p_x tau_x k_x - 2 N kbar)``.
    The denominator is the coefficient of ``b`` in the favourability
    condition; when it vanishes cooperation is never favoured.
    """
    k = np.array(g.degree, dtype=float)
    total = 2.0 * float(k.sum())  # 2 N kbar
    if sol.exact is not None:
        pq, _, tq = sol.exact
        kq = g.degree
        numq = sum(t * d for t, d in zip(tq, kq)) - 2 * sum(kq)
        denq = sum(pp * t * d for pp, t, d in zip(pq, tq, kq)) - 2 * sum(kq)
        cls, b, inv = _classify(numq, denq, total, exact=True)
        num, den = float(numq), float(denq)
    else:
        num = float((sol.tau_node * k).sum() - total)
        den = float((sol.p * sol.tau_node * k).sum() - total)
        cls, b, inv = _classify(num, den, total, exact=False)
    return BStarReport(n=g.node_count, mean_degree=g.mean_degree, numerator=num,
                       denominator=den, b_star=b, inv_b_star=inv, classification=cls,
                       updating="db", method=sol.method, residual=sol.residual)


def bstar(g: Graph, updating: str = "db", method: Method = "auto") -> BStarReport:
    """Convenience wrapper: solve and report for either update rule."""
    if updating == "db":
        return bstar_db(solve_coalescence(g, method), g)
    if updating == "im":
        return bstar_im(g, method)
    raise ValueError(f"unknown updating rule {updating!r}")


def tau_moments(sol: CoalescenceSolution, g: Graph) -> TauMoments:
    """Reproductive-value weighted remeeting moments used by the weak-selection expansion."""
    k = np.array(g.degree, dtype=float)
    pi = k / k.sum()
    tau1 = float((pi * sol.tau_node).sum() - 1.0)
    tau3 = float((pi * sol.tau_node * (1.0 + sol.p)).sum() - 3.0)
    return TauMoments(tau1=tau1, tau2=tau1 - 1.0, tau3=tau3, pi=pi)


def weak_selection_fixation(m: TauMoments, n: int, b: float, c: float,
                            delta: float) -> tuple[float, float]:
    """First-order fixation probabilities ``(rho_C, rho_D)`` of a single mutant.

    Only the linear term in ``delta`` is kept, so the prediction is meaningful
    for ``delta`` small compared with ``1 / max(|b|, |c|)``. ``rho_D`` uses the
    first-order antisymmetry ``rho_D - 1/N = -(rho_C - 1/N)``.
    """
    inc = delta / (2 * n) * (-c * m.tau2 + b * (m.tau3 - m.tau1))
    return 1.0 / n + inc, 1.0 / n - inc


def _walk_sum(w: np.ndarray, M: np.ndarray, T: np.ndarray) -> float:
    return float((w[:, None] * M * T).sum())


def bstar_im(g: Graph, method: Method = "auto") -> BStarReport:
    """Critical benefit-to-cost ratio for imitation updating.

    Meeting times use the replacement kernel ``P`` (uniform over the closed
    neighbourhood), games are played along the interaction kernel ``Q``
    (uniform over neighbours) and node ``x`` carries weight ``k_x + 1``.
    With ``t(M) = sum_x w_x sum_y M[x, y] tau[x, y]``::

        b* = t(P P) / (t(P P Q) - t(Q))
    """
    _check_graph(g)
    method = _resolve_method(method, g.node_count)
    kern = _im_kernel(g)
    T, Tq, res = _solve_kernel(kern, method, 1e-12, 100_000)
    n = g.node_count
    if Tq is not None:
        P = kern.to_fractions()
        Q = _db_kernel(g).to_fractions()
        w = [d + 1 for d in g.degree]

        def mul(A, B):
            return [[sum(A[i][t] * B[t][j] for t in range(n) if A[i][t]) for j in range(n)]
                    for i in range(n)]

        def tsum(M):
            return sum(w[x] * M[x][y] * Tq[x][y] for x in range(n) for y in range(n) if M[x][y])

        PP = mul(P, P)
        numq = tsum(PP)
        denq = tsum(mul(PP, Q)) - tsum(Q)
        cls, b, inv = _classify(numq, denq, float(sum(w)), exact=True)
        num, den = float(numq), float(denq)
    else:
        P = kern.to_sparse().toarray()
        Q = _db_kernel(g).to_sparse().toarray()
        w = np.array(g.degree, dtype=float) + 1.0
        PP = P @ P
        num = _walk_sum(w, PP, T)
        den = _walk_sum(w, PP @ Q, T) - _walk_sum(w, Q, T)
        cls, b, inv = _classify(num, den, float(w.sum()), exact=False)
    return BStarReport(n=n, mean_degree=g.mean_degree, numerator=num, denominator=den,
                       b_star=b, inv_b_star=inv, classification=cls, updating="im",
                       method=method, residual=res)


def general_game_favored(report: BStarReport, game: GameMatrix) -> bool:
    """Whether selection favours C in a general 2x2 game on this graph.

    Condition: ``(T - S) < (R - P) (b* + 1) / (b* - 1)``.
    """
    if report.b_star is None:
        raise ValueError("condition is undefined when cooperation is never favored")
    b = report.b_star
    return (game.T - game.S) < (game.R - game.P) * (b + 1) / (b - 1)
