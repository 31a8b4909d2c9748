"""Minimal viable alignment of a finite information structure.

The misaligned adviser can make every message uninformative exactly when some
garbling ``G = alpha I + (1 - alpha) B`` of the signal matrix has identical rows
after composition; the largest such ``alpha`` is a small linear program.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .errors import InputError, SolverError

ROW_SUM_TOL = 1e-12
RANK_RTOL = 1e-9
CERT_TOL = 1e-8
_HIGHS = {"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10}


@dataclass(frozen=True, eq=False)
class SignalMatrix:
    """Row-stochastic ``N x K`` matrix, ``entries[i, j] = P(signal j | state i)``."""

    entries: np.ndarray

    def __post_init__(self):
        e = np.array(self.entries, dtype=float)
        if e.ndim != 2:
            raise InputError("signal matrix must be two-dimensional")
        if e.shape[1] < 2:
            raise InputError("signal matrix needs at least two signals (columns)")
        if not np.all(np.isfinite(e)) or np.any(e < 0):
            raise InputError("signal matrix entries must be finite and nonnegative")
        if np.max(np.abs(e.sum(axis=1) - 1.0)) > ROW_SUM_TOL:
            raise InputError("every row of the signal matrix must sum to 1")
        e.setflags(write=False)
        object.__setattr__(self, "entries", e)

    @property
    def shape(self):
        return self.entries.shape

    def to_dict(self) -> dict:
        return {"entries": self.entries.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "SignalMatrix":
        return cls(d["entries"])

    def __eq__(self, other):
        if not isinstance(other, SignalMatrix):
            return NotImplemented
        return self.shape == other.shape and np.array_equal(self.entries, other.entries)


@dataclass(frozen=True, eq=False)
class MvaSolution:
    alpha_star: float
    garbling: np.ndarray
    adversary: np.ndarray | None
    rank: int
    row_difference: np.ndarray
    columns: tuple  # original column indices merged into each LP signal
    near_degenerate: bool = False

    def to_dict(self) -> dict:
        return {"alpha_star": self.alpha_star, "garbling": self.garbling.tolist(),
                "adversary": None if self.adversary is None else self.adversary.tolist(),
                "rank": self.rank, "row_difference": self.row_difference.tolist(),
                "columns": [list(c) for c in self.columns],
                "near_degenerate": self.near_degenerate}

    @classmethod
    def from_dict(cls, d: dict) -> "MvaSolution":
        adv = d.get("adversary")
        return cls(float(d["alpha_star"]), np.array(d["garbling"], dtype=float),
                   None if adv is None else np.array(adv, dtype=float), int(d["rank"]),
                   np.array(d["row_difference"], dtype=float).reshape(-1, len(d["garbling"])),
                   tuple(tuple(int(i) for i in c) for c in d["columns"]),
                   bool(d.get("near_degenerate", False)))

    def __eq__(self, other):
        if not isinstance(other, MvaSolution):
            return NotImplemented
        same = lambda a, b: (a is None and b is None) or (
            a is not None and b is not None and a.shape == b.shape and np.allclose(a, b, 0, 1e-12))
        return (abs(self.alpha_star - other.alpha_star) <= 1e-12 and self.rank == other.rank
                and same(self.garbling, other.garbling) and same(self.adversary, other.adversary)
                and same(self.row_difference, other.row_difference)
                and self.columns == other.columns and self.near_degenerate == other.near_degenerate)


def _merge_proportional(pi: np.ndarray, tol: float = 1e-12):
    """Group columns that are positive multiples of one another (signals inducing
    the same posterior) and sum each group. Zero columns are dropped."""
    groups, reps = [], []
    for j in range(pi.shape[1]):
        col = pi[:, j]
        norm = col.sum()
        if norm <= 0:
            continue
        unit = col / norm
        for g, r in zip(groups, reps):
            if np.max(np.abs(unit - r)) <= tol:
                g.append(j)
                break
        else:
            groups.append([j])
            reps.append(unit)
    merged = np.column_stack([pi[:, g].sum(axis=1) for g in groups])
    return merged, tuple(tuple(g) for g in groups)


def numerical_rank(pi: np.ndarray, rtol: float = RANK_RTOL) -> tuple[int, bool]:
    """Rank with singular values below ``rtol * s_max`` treated as zero; the flag
    marks singular values within three decades of that threshold."""
    s = np.linalg.svd(pi, compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0, False
    rel = s / s[0]
    rank = int(np.sum(rel > rtol))
    near = bool(np.any((rel > rtol) & (rel < 1e3 * rtol)))
    return rank, near


def solve_mva(pi: SignalMatrix | np.ndarray, merge_duplicates: bool = True) -> MvaSolution:
    """Largest ``alpha`` such that some stochastic ``G`` with ``G_kk >= alpha``
    makes ``Pi G`` uninformative (all rows equal).

    With ``merge_duplicates`` signals inducing the same posterior are pooled first;
    this never changes the optimum's economic meaning and keeps the LP small.
    """
    if not isinstance(pi, SignalMatrix):
        pi = SignalMatrix(pi)
    p = pi.entries
    if merge_duplicates:
        p, columns = _merge_proportional(p)
    else:
        columns = tuple((j,) for j in range(p.shape[1]))
    n, k = p.shape
    rank, near = numerical_rank(p)
    d = p[1:] - p[0]

    if k == 1:
        g = np.ones((1, 1))
        return MvaSolution(1.0, g, None, rank, d, columns, near)

    nv = k * k + 1  # G row-major, then alpha
    ia = k * k
    c = np.zeros(nv)
    c[ia] = -1.0
    a_ub = np.zeros((k, nv))
    for i in range(k):
        a_ub[i, ia] = 1.0
        a_ub[i, i * k + i] = -1.0
    rows = []
    for i in range(k):
        r = np.zeros(nv)
        r[i * k:(i + 1) * k] = 1.0
        rows.append(r)
    for drow in d:
        for j in range(k):
            r = np.zeros(nv)
            r[np.arange(k) * k + j] = drow  # (D G)_{.j} = sum_m D_m G_mj
            rows.append(r)
    a_eq = np.array(rows)
    b_eq = np.concatenate([np.ones(k), np.zeros(len(rows) - k)])
    bounds = [(0.0, None)] * (k * k) + [(0.0, 1.0)]
    res = linprog(c, A_ub=a_ub, b_ub=np.zeros(k), A_eq=a_eq, b_eq=b_eq, bounds=bounds,
                  method="highs", options=_HIGHS)
    if res.status != 0:
        raise SolverError(f"MVA linear program failed: {res.message}")
    alpha = float(res.x[ia])
    g = res.x[:ia].reshape(k, k)
    resid = max(np.max(np.abs(g.sum(axis=1) - 1.0)), np.max(np.abs(d @ g)) if d.size else 0.0,
                max(0.0, alpha - np.min(np.diag(g))), max(0.0, -np.min(g)))
    if resid > CERT_TOL:
        raise SolverError(f"MVA certificate residual {resid:.3e} exceeds {CERT_TOL}",
                          residuals=(resid,))
    adversary = None
    if alpha < 1.0 - 1e-12:
        adversary = (g - alpha * np.eye(k)) / (1.0 - alpha)
        adversary = np.clip(adversary, 0.0, None)
        adversary /= adversary.sum(axis=1, keepdims=True)
    return MvaSolution(alpha, g, adversary, rank, d, columns, near)


def construct_target_mva(n_states: int, k_signals: int, delta: float) -> SignalMatrix:
    """Signal matrix whose minimal viable alignment is ``1 / (2 + delta (K - 3))``.

    Valid for ``N >= 3``, ``4 <= K <= N + 1`` and ``delta`` in
    ``[(K - 4)/(K - 3), 1]``; sweeping ``K`` and ``delta`` covers ``[1/N, 1/2]``.
    """
    n, k, delta = int(n_states), int(k_signals), float(delta)
    if n < 3:
        raise InputError(f"n_states = {n} must be at least 3")
    if not 4 <= k <= n + 1:
        raise InputError(f"k_signals = {k} must lie in [4, n_states + 1] = [4, {n + 1}]")
    low = (k - 4) / (k - 3)
    if not low <= delta <= 1.0:
        raise InputError(f"delta = {delta} must lie in [(K-4)/(K-3), 1] = [{low:.6g}, 1]")
    pi = np.full((n, k), 1.0 / k)
    for i in range(1, k - 2):  # 0-based rows 1..K-3, i.e. states 2..K-2
        pi[i, i] += 1.0 / k
        pi[i, 0] -= 1.0 / k
    r = k - 2  # state K-1
    pi[r, r] += 1.0 / k
    pi[r, 0] -= delta / k
    pi[r, k - 1] -= (1.0 - delta) / k
    return SignalMatrix(np.clip(pi, 0.0, None))


def target_mva(k_signals: int, delta: float) -> float:
    return 1.0 / (2.0 + delta * (k_signals - 3))


def signal_matrix_from_posteriors(posteriors, probs, prior=None) -> SignalMatrix:
    """``Pi[i, j] = mu_j(i) tau_j / mu0(i)`` from ``K`` posteriors over ``N`` states."""
    mu = np.asarray(posteriors, dtype=float)
    tau = np.asarray(probs, dtype=float)
    if mu.ndim != 2 or tau.shape != (mu.shape[0],):
        raise InputError("posteriors must be K x N with one probability per posterior")
    mu0 = tau @ mu if prior is None else np.asarray(prior, dtype=float)
    if prior is not None and np.max(np.abs(tau @ mu - mu0)) > 1e-10:
        raise InputError("posteriors average to a belief different from the prior")
    if np.any(mu0 <= 0):
        raise InputError("every state needs positive prior probability")
    pi = (mu * tau[:, None]).T / mu0[:, None]
    pi /= pi.sum(axis=1, keepdims=True)  # remove rounding drift
    return SignalMatrix(pi)
