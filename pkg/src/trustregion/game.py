"""Exact saddle points of the finite agent-versus-misaligned-adviser game.

Both players' problems are linear programs. The agent's guaranteed payoff is
concave piecewise linear in the agent's strategy because the misaligned adviser's best
response decomposes belief by belief into a minimum over messages; the adviser's
side is a transportation-style LP over where each belief's mass is sent.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

from .errors import InputError, SolverError

BAYES_TOL = 1e-10
EXPLOIT_TOL = 1e-8
_HIGHS = {"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10}


@dataclass(frozen=True, eq=False)
class FiniteGame:
    """``payoff[a, w, t]`` is the agent's payoff from action ``a`` in state ``w``
    when the agent's private type is ``t``; ``type_likelihood[w, t] = f(t | w)``.

    Message ``m`` is the adviser's report of the posterior ``beliefs[m]``, which the
    aligned adviser holds with probability ``probs[m]``.
    """

    prior: np.ndarray
    beliefs: np.ndarray
    probs: np.ndarray
    type_likelihood: np.ndarray
    payoff: np.ndarray
    alpha: float
    states: tuple = ()
    actions: tuple = ()
    types: tuple = ()

    def __post_init__(self):
        arr = lambda x: np.array(x, dtype=float)
        prior, mu, tau = arr(self.prior), arr(self.beliefs), arr(self.probs)
        f, u = arr(self.type_likelihood), arr(self.payoff)
        if mu.ndim != 2 or mu.shape[0] == 0:
            raise InputError("game needs at least one message (beliefs must be M x N)")
        if u.ndim != 3 or u.shape[0] == 0:
            raise InputError("game needs at least one action (payoff must be A x N x T)")
        m, n = mu.shape
        if prior.shape != (n,) or tau.shape != (m,):
            raise InputError("prior must have one entry per state and probs one per message")
        if f.ndim != 2 or f.shape[0] != n or u.shape[1:] != (n, f.shape[1]):
            raise InputError("type_likelihood must be N x T and payoff A x N x T")
        for name, x in (("prior", prior), ("beliefs", mu), ("probs", tau),
                        ("type_likelihood", f), ("payoff", u)):
            if not np.all(np.isfinite(x)):
                raise InputError(f"{name} has non-finite entries")
        if np.any(prior < 0) or abs(prior.sum() - 1) > BAYES_TOL:
            raise InputError("prior must be a probability vector")
        if np.any(mu < 0) or np.max(np.abs(mu.sum(axis=1) - 1)) > BAYES_TOL:
            raise InputError("every message belief must be a probability vector")
        if np.any(tau <= 0) or abs(tau.sum() - 1) > BAYES_TOL:
            raise InputError("message probabilities must be positive and sum to 1")
        if np.max(np.abs(tau @ mu - prior)) > BAYES_TOL:
            raise InputError("message beliefs do not average to the prior (Bayes plausibility)")
        if np.any(f < 0) or np.max(np.abs(f.sum(axis=1) - 1)) > BAYES_TOL:
            raise InputError("each row of type_likelihood must sum to 1")
        alpha = float(self.alpha)
        if not 0.0 <= alpha <= 1.0:
            raise InputError(f"alpha = {alpha} is outside [0, 1]")
        for name, x in (("prior", prior), ("beliefs", mu), ("probs", tau),
                        ("type_likelihood", f), ("payoff", u)):
            x.setflags(write=False)
            object.__setattr__(self, name, x)
        object.__setattr__(self, "alpha", alpha)

    @property
    def n_messages(self) -> int:
        return self.beliefs.shape[0]

    @property
    def n_types(self) -> int:
        return self.type_likelihood.shape[1]

    @property
    def n_actions(self) -> int:
        return self.payoff.shape[0]

    def with_alpha(self, alpha: float) -> "FiniteGame":
        return FiniteGame(self.prior, self.beliefs, self.probs, self.type_likelihood,
                          self.payoff, alpha, self.states, self.actions, self.types)

    def coefficients(self) -> np.ndarray:
        """``C[k, t, a] = sum_w beliefs[k, w] f(t | w) payoff[a, w, t]``."""
        return np.einsum("kw,wt,awt->kta", self.beliefs, self.type_likelihood, self.payoff)

    def to_dict(self) -> dict:
        return {"states": list(self.states) or list(range(self.prior.size)),
                "prior": self.prior.tolist(),
                "messages": [{"belief": b.tolist(), "prob": float(p)}
                             for b, p in zip(self.beliefs, self.probs)],
                "types": list(self.types) or list(range(self.n_types)),
                "type_likelihood": self.type_likelihood.tolist(),
                "actions": list(self.actions) or list(range(self.n_actions)),
                "axis_order": ["a", "omega", "theta"],
                "payoff": self.payoff.ravel().tolist(),
                "alpha": self.alpha}

    @classmethod
    def from_dict(cls, d: dict) -> "FiniteGame":
        try:
            if list(d.get("axis_order", ["a", "omega", "theta"])) != ["a", "omega", "theta"]:
                raise InputError("payoff axis_order must be [a, omega, theta]")
            msgs = d["messages"]
            beliefs = [m["belief"] for m in msgs]
            probs = [float(m["prob"]) for m in msgs]
            prior = np.array(d["prior"], dtype=float)
            n = prior.size
            f = np.array(d.get("type_likelihood", np.ones((n, 1))), dtype=float)
            actions = d["actions"]
            payoff = np.array(d["payoff"], dtype=float).reshape(len(actions), n, f.shape[1])
            return cls(prior, beliefs, probs, f, payoff, float(d["alpha"]),
                       tuple(d.get("states", ())), tuple(actions), tuple(d.get("types", ())))
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, InputError):
                raise
            raise InputError(f"malformed game document: {exc}") from exc

    @classmethod
    def load(cls, path) -> "FiniteGame":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))

    def save(self, path):
        Path(path).write_text(json.dumps(self.to_dict(), indent=1), encoding="utf-8")

    def __eq__(self, other):
        if not isinstance(other, FiniteGame):
            return NotImplemented
        return self.to_dict() == other.to_dict()


@dataclass(frozen=True, eq=False)
class SaddleSolution:
    value: float
    agent_strategy: np.ndarray      # [message, type, action]
    adversary_strategy: np.ndarray  # [true posterior k, message m] = beta(m | k)
    induced_posteriors: np.ndarray  # [message, state]; nan off path
    exploitability: tuple[float, float]
    minimax_value: float = float("nan")
    off_path: tuple = ()

    def to_dict(self) -> dict:
        return {"value": self.value, "minimax_value": self.minimax_value,
                "agent_strategy": self.agent_strategy.tolist(),
                "adversary_strategy": self.adversary_strategy.tolist(),
                "induced_posteriors": [[None if np.isnan(x) else x for x in row]
                                       for row in self.induced_posteriors.tolist()],
                "exploitability": list(self.exploitability), "off_path": list(self.off_path)}

    @classmethod
    def from_dict(cls, d: dict) -> "SaddleSolution":
        post = np.array([[np.nan if x is None else x for x in row]
                         for row in d["induced_posteriors"]], dtype=float)
        return cls(float(d["value"]), np.array(d["agent_strategy"], dtype=float),
                   np.array(d["adversary_strategy"], dtype=float), post,
                   tuple(float(e) for e in d["exploitability"]),
                   float(d.get("minimax_value", float("nan"))),
                   tuple(int(i) for i in d.get("off_path", ())))

    def __eq__(self, other):
        if not isinstance(other, SaddleSolution):
            return NotImplemented
        close = lambda a, b: a.shape == b.shape and np.allclose(a, b, 0, 1e-12, equal_nan=True)
        return (abs(self.value - other.value) <= 1e-12
                and close(self.agent_strategy, other.agent_strategy)
                and close(self.adversary_strategy, other.adversary_strategy)
                and close(self.induced_posteriors, other.induced_posteriors)
                and self.off_path == other.off_path)


def _normalize_rows(x: np.ndarray) -> np.ndarray:
    x = np.clip(x, 0.0, None)
    s = x.sum(axis=-1, keepdims=True)
    return x / np.where(s > 0, s, 1.0)


def _maximin_lp(game: FiniteGame, c: np.ndarray):
    m, t, a = c.shape
    ta = t * a
    n_sigma = m * ta
    alpha, tau = game.alpha, game.probs
    obj = np.concatenate([-(alpha * tau[:, None] * c.reshape(m, ta)).ravel(),
                          -(1 - alpha) * tau])
    # z_k - <C_k, sigma_j> <= 0 for every (k, j)
    k_idx, j_idx = np.meshgrid(np.arange(m), np.arange(m), indexing="ij")
    k_idx, j_idx = k_idx.ravel(), j_idx.ravel()
    rows = np.arange(m * m)
    sig_cols = (j_idx[:, None] * ta + np.arange(ta)[None, :]).ravel()
    sig_rows = np.repeat(rows, ta)
    sig_data = -c.reshape(m, ta)[k_idx].ravel()
    a_ub = sparse.csr_matrix(
        (np.concatenate([np.ones(m * m), sig_data]),
         (np.concatenate([rows, sig_rows]), np.concatenate([n_sigma + k_idx, sig_cols]))),
        shape=(m * m, n_sigma + m))
    eq_rows = np.repeat(np.arange(m * t), a)
    a_eq = sparse.csr_matrix((np.ones(n_sigma), (eq_rows, np.arange(n_sigma))),
                             shape=(m * t, n_sigma + m))
    bounds = [(0.0, None)] * n_sigma + [(None, None)] * m
    res = linprog(obj, A_ub=a_ub, b_ub=np.zeros(m * m), A_eq=a_eq, b_eq=np.ones(m * t),
                  bounds=bounds, method="highs", options=_HIGHS)
    if res.status != 0:
        raise SolverError(f"agent-side LP failed: {res.message}")
    return -res.fun, _normalize_rows(res.x[:n_sigma].reshape(m, t, a))


def _minimax_lp(game: FiniteGame, c: np.ndarray):
    m, t, a = c.shape
    alpha, tau = game.alpha, game.probs
    nx = m * m  # x[k, m] = tau_k beta(m | k)
    n_rows = m * t * a
    # row (msg, th, act): (1 - alpha) sum_k C[k, th, act] x[k, msg] - y[msg, th] <= -alpha tau_msg C[msg, th, act]
    msg, th, act = (g.ravel() for g in np.meshgrid(np.arange(m), np.arange(t), np.arange(a),
                                                    indexing="ij"))
    row_ids = np.arange(n_rows)
    x_rows = np.repeat(row_ids, m)
    ks = np.tile(np.arange(m), n_rows)
    x_cols = ks * m + np.repeat(msg, m)
    x_data = (1 - alpha) * c[ks, np.repeat(th, m), np.repeat(act, m)]
    y_cols = nx + msg * t + th
    a_ub = sparse.csr_matrix(
        (np.concatenate([x_data, -np.ones(n_rows)]),
         (np.concatenate([x_rows, row_ids]), np.concatenate([x_cols, y_cols]))),
        shape=(n_rows, nx + m * t))
    b_ub = -alpha * tau[msg] * c[msg, th, act]
    a_eq = sparse.csr_matrix((np.ones(nx), (np.repeat(np.arange(m), m), np.arange(nx))),
                             shape=(m, nx + m * t))
    obj = np.concatenate([np.zeros(nx), np.ones(m * t)])
    bounds = [(0.0, None)] * nx + [(None, None)] * (m * t)
    res = linprog(obj, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=tau, bounds=bounds,
                  method="highs", options=_HIGHS)
    if res.status != 0:
        raise SolverError(f"adviser-side LP failed: {res.message}")
    x = np.clip(res.x[:nx].reshape(m, m), 0.0, None)
    beta = _normalize_rows(x)
    return res.fun, beta


def maximin_value(game: FiniteGame) -> float:
    return _maximin_lp(game, game.coefficients())[0]


def minimax_value(game: FiniteGame) -> float:
    return _minimax_lp(game, game.coefficients())[0]


def payoff(game: FiniteGame, sigma: np.ndarray, beta: np.ndarray, c=None) -> float:
    """Agent's expected payoff when the agent plays ``sigma`` and the misaligned adviser
    reports according to ``beta``."""
    c = game.coefficients() if c is None else c
    inner = np.einsum("kta,jta->kj", c, sigma)  # <C_k, sigma_j>
    tau, alpha = game.probs, game.alpha
    return float(tau @ (alpha * np.diag(inner) + (1 - alpha) * np.sum(beta * inner, axis=1)))


def guaranteed_payoff(game: FiniteGame, sigma: np.ndarray, c=None) -> float:
    """Worst case of ``payoff`` over misaligned reporting strategies."""
    c = game.coefficients() if c is None else c
    inner = np.einsum("kta,jta->kj", c, sigma)
    tau, alpha = game.probs, game.alpha
    return float(tau @ (alpha * np.diag(inner) + (1 - alpha) * inner.min(axis=1)))


def message_weights(game: FiniteGame, beta: np.ndarray, c=None) -> np.ndarray:
    """``W[m, t, a]``: unnormalized expected payoff of action ``a`` after message
    ``m`` and type ``t`` under reporting strategy ``beta``."""
    c = game.coefficients() if c is None else c
    x = game.probs[:, None] * beta
    return game.alpha * game.probs[:, None, None] * c + (1 - game.alpha) * np.einsum(
        "km,kta->mta", x, c)


def best_response_value(game: FiniteGame, beta: np.ndarray, c=None) -> float:
    return float(message_weights(game, beta, c).max(axis=2).sum())


def induced_posteriors(game: FiniteGame, beta: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Posterior over states after each message and each message's total probability."""
    x = game.probs[:, None] * beta
    weight = game.alpha * game.probs + (1 - game.alpha) * x.sum(axis=0)
    joint = game.alpha * game.probs[:, None] * game.beliefs \
        + (1 - game.alpha) * x.T @ game.beliefs
    with np.errstate(invalid="ignore", divide="ignore"):
        post = np.where(weight[:, None] > 0, joint / weight[:, None], np.nan)
    return post, weight


def prior_optimal_actions(game: FiniteGame) -> np.ndarray:
    """Per type, the lowest-index action maximizing expected payoff at the prior."""
    w = np.einsum("w,wt,awt->ta", game.prior, game.type_likelihood, game.payoff)
    return np.argmax(w, axis=1)


def no_adviser_value(game: FiniteGame) -> float:
    w = np.einsum("w,wt,awt->ta", game.prior, game.type_likelihood, game.payoff)
    return float(w.max(axis=1).sum())


def solve_saddle(game: FiniteGame, tol: float = EXPLOIT_TOL) -> SaddleSolution:
    """Saddle point from the agent-side and adviser-side LPs.

    Off-path messages are given the prior-optimal action unless that would let
    the adviser profit by sending them, in which case the LP's play is kept.
    """
    c = game.coefficients()
    value, sigma = _maximin_lp(game, c)
    mm_value, beta = _minimax_lp(game, c)
    post, weight = induced_posteriors(game, beta)
    off = tuple(int(i) for i in np.flatnonzero(weight <= 0.0))
    if off:
        candidate = sigma.copy()
        fallback = np.zeros((game.n_types, game.n_actions))
        fallback[np.arange(game.n_types), prior_optimal_actions(game)] = 1.0
        candidate[list(off)] = fallback
        if guaranteed_payoff(game, candidate, c) >= guaranteed_payoff(game, sigma, c) - 1e-12:
            sigma = candidate
    u_star = payoff(game, sigma, beta, c)
    exploit = (u_star - guaranteed_payoff(game, sigma, c),
               best_response_value(game, beta, c) - u_star)
    if max(exploit) > tol or abs(value - mm_value) > tol:
        raise SolverError(f"saddle certificate failed: exploitability {exploit}, "
                          f"maximin {value!r} vs minimax {mm_value!r}", residuals=exploit)
    return SaddleSolution(value, sigma, beta, post, exploit, mm_value, off)


def adviser_value(game: FiniteGame, sol: SaddleSolution | None = None) -> tuple[float, float, float]:
    """``(u_star, u_0, v)``: saddle value, value without the adviser, and their gap."""
    sol = solve_saddle(game) if sol is None else sol
    u0 = no_adviser_value(game)
    return sol.value, u0, sol.value - u0


@dataclass
class MessageCheck:
    message: int
    on_path: bool
    margin: float       # conditional best-response gain, >= 0
    passed: bool
    projection_gap: float | None = None


@dataclass
class StructureReport:
    checks: list = field(default_factory=list)
    trust_bounds: tuple | None = None

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks if c.on_path)

    @property
    def worst_margin(self) -> float:
        return max((c.margin for c in self.checks if c.on_path), default=0.0)


def verify_trs_structure(game: FiniteGame, sol: SaddleSolution, tol: float = 1e-7,
                         projection_tol: float | None = None) -> StructureReport:
    """Check that the agent's play after every on-path message is a Bayes best
    response to the posterior induced by the reported adviser strategy.

    Margins are conditional payoff gaps (per unit of message probability). For
    two-state games the report also records the empirical trust interval, the
    range of messages whose induced posterior equals the message itself, and for
    messages outside it the gap between the induced posterior and the nearer end;
    with ``projection_tol`` set, that gap is part of the pass criterion.
    """
    c = game.coefficients()
    w = message_weights(game, sol.adversary_strategy, c)
    post, weight = induced_posteriors(game, sol.adversary_strategy)
    best = w.max(axis=2)
    got = np.sum(w * sol.agent_strategy, axis=2)
    report = StructureReport()

    bounds = None
    binary = game.prior.size == 2
    if binary:
        trusted = [k for k in range(game.n_messages) if weight[k] > 0
                   and abs(post[k, 1] - game.beliefs[k, 1]) <= 1e-6]
        if trusted:
            bounds = (float(min(game.beliefs[trusted, 1])), float(max(game.beliefs[trusted, 1])))
        report.trust_bounds = bounds

    for k in range(game.n_messages):
        on = bool(weight[k] > 0)
        margin = float(np.sum(best[k] - got[k]) / weight[k]) if on else 0.0
        gap = None
        if on and bounds is not None:
            mk = game.beliefs[k, 1]
            if mk < bounds[0]:
                gap = abs(post[k, 1] - bounds[0])
            elif mk > bounds[1]:
                gap = abs(post[k, 1] - bounds[1])
        ok = margin <= tol
        if projection_tol is not None and gap is not None:
            ok = ok and gap <= projection_tol
        report.checks.append(MessageCheck(k, on, margin, ok, gap))
    return report
