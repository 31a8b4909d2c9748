"""Certifying misaligned-adviser strategies for the binary-state trust interval.

The misaligned adviser's report is a monotone quantile coupling between a
"deviation mass" on its own beliefs and a matching mass on the messages it
imitates, chosen so that every message's Bayes posterior lands exactly where
the trust-interval policy acts.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .binary_trust import RESIDUAL_TOL, TrustInterval, psi_residuals
from .core import BeliefDensity, UtilityCurve, curvature_cutoff
from .errors import InputError, PreconditionError
from .quadrature import bisect_root

INVERSE_TOL = 1e-12
_BISECT_STEPS = 64
_JSON_KNOTS = 65


def _bisect_inf(pred, lo, hi, steps=_BISECT_STEPS, tol=INVERSE_TOL):
    """Vectorized ``inf{x in [lo, hi]: pred(x)}`` for a predicate monotone in ``x``;
    callers guarantee ``pred(hi)`` holds."""
    lo = np.array(lo, dtype=float, copy=True)
    hi = np.array(hi, dtype=float, copy=True)
    for _ in range(steps):
        if np.all(hi - lo <= tol):
            break
        mid = 0.5 * (lo + hi)
        ok = pred(mid)
        hi = np.where(ok, mid, hi)
        lo = np.where(ok, lo, mid)
    return hi


@dataclass(frozen=True, eq=False)
class QuantilePiece:
    """Monotone map from ``source`` onto ``target``.

    Both ends carry a linear weight ``k0 + k1 * mu`` against ``tau``; a belief is
    sent to the target point whose cumulative weighted mass (from the left) first
    reaches the source's cumulative mass at that belief.
    """

    source: tuple[float, float]
    target: tuple[float, float]
    source_weight: tuple[float, float]
    target_weight: tuple[float, float]
    tau: BeliefDensity = field(repr=False)

    kind = "quantile"

    def _cumulative(self, weight, start, x):
        k0, k1 = weight
        return k0 * self.tau.mass(start, x) + k1 * self.tau.moment(start, x)

    def source_cdf(self, x):
        return self._cumulative(self.source_weight, self.source[0], x)

    def target_cdf(self, y):
        return self._cumulative(self.target_weight, self.target[0], y)

    def source_mass(self) -> float:
        return float(self.source_cdf(self.source[1]))

    def target_mass(self) -> float:
        return float(self.target_cdf(self.target[1]))

    def target_quantile(self, q):
        """Generalized inverse ``inf{y : F_target(y) >= q}``, capped at the target's
        upper end when ``q`` exceeds the target's total mass."""
        q = np.asarray(q, dtype=float)
        c, d = self.target
        total = self.target_mass()
        qq = np.minimum(q, total)
        out = _bisect_inf(lambda y: self.target_cdf(y) >= qq,
                          np.full(q.shape, c), np.full(q.shape, d))
        return np.where(q <= 0.0, c, out)

    def __call__(self, x):
        x = np.clip(np.asarray(x, dtype=float), *self.source)
        out = self.target_quantile(self.source_cdf(x))
        return float(out) if out.ndim == 0 else out

    def to_dict(self) -> dict:
        xs = np.linspace(*self.source, _JSON_KNOTS)
        return {"kind": self.kind, "source": list(self.source), "target": list(self.target),
                "source_weight": list(self.source_weight),
                "target_weight": list(self.target_weight),
                "knots": np.column_stack([xs, self(xs)]).tolist()}

    def same_as(self, other) -> bool:
        return (isinstance(other, QuantilePiece) and self.source == other.source
                and self.target == other.target and self.source_weight == other.source_weight
                and self.target_weight == other.target_weight)


@dataclass(frozen=True, eq=False)
class AtomPiece:
    """Every belief in ``source`` sends the single message ``target``."""

    source: tuple[float, float]
    target: float

    kind = "atom"

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.full(x.shape, self.target)
        return float(out) if out.ndim == 0 else out

    def to_dict(self) -> dict:
        return {"kind": self.kind, "source": list(self.source), "target": self.target}

    def same_as(self, other) -> bool:
        return isinstance(other, AtomPiece) and self.source == other.source \
            and self.target == other.target


@dataclass(frozen=True, eq=False)
class TransportMap:
    """Misaligned adviser's report as a function of the adviser's belief.

    ``pieces`` partition ``[0, 1]`` into half-open source intervals (the last one
    closed), so the map is right-continuous at piece boundaries.
    """

    regime: str
    alpha: float
    prior: float
    lo: float
    hi: float
    cutoff: float
    pieces: tuple
    tau: BeliefDensity = field(repr=False)
    mu_low: float | None = None
    mu_high: float | None = None

    def piece_for(self, mu: float):
        for i, p in enumerate(self.pieces):
            a, b = p.source
            last = i == len(self.pieces) - 1
            if a <= mu < b or (last and mu == b):
                return p
        raise InputError(f"belief {mu} is not covered by the map")

    def __call__(self, mu):
        mu = np.asarray(mu, dtype=float)
        out = np.array([self.piece_for(m)(m) for m in mu.ravel()]).reshape(mu.shape)
        return float(out) if out.ndim == 0 else out

    def mass_gaps(self) -> list[float]:
        return [abs(p.source_mass() - p.target_mass())
                for p in self.pieces if isinstance(p, QuantilePiece)]

    @classmethod
    def send_all_to(cls, tau, alpha, trust: TrustInterval, message: float) -> "TransportMap":
        """A (generally uncertified) map reporting ``message`` for every belief."""
        return cls("constant", float(alpha), tau.prior, trust.lo, trust.hi, trust.cutoff,
                   (AtomPiece((0.0, 1.0), float(message)),), tau)

    def to_dict(self) -> dict:
        return {"regime": self.regime, "alpha": self.alpha, "prior": self.prior,
                "lo": self.lo, "hi": self.hi, "cutoff": self.cutoff,
                "mu_low": self.mu_low, "mu_high": self.mu_high,
                "tau": self.tau.to_dict(), "pieces": [p.to_dict() for p in self.pieces]}

    @classmethod
    def from_dict(cls, d: dict) -> "TransportMap":
        tau = BeliefDensity.from_dict(d["tau"])
        pieces = []
        for p in d["pieces"]:
            src = tuple(float(s) for s in p["source"])
            if p["kind"] == "atom":
                pieces.append(AtomPiece(src, float(p["target"])))
            elif p["kind"] == "quantile":
                pieces.append(QuantilePiece(src, tuple(float(t) for t in p["target"]),
                                            tuple(float(w) for w in p["source_weight"]),
                                            tuple(float(w) for w in p["target_weight"]), tau))
            else:
                raise InputError(f"unknown piece kind {p['kind']!r}")
        opt = lambda k: None if d.get(k) is None else float(d[k])
        return cls(d["regime"], float(d["alpha"]), float(d["prior"]), float(d["lo"]),
                   float(d["hi"]), float(d["cutoff"]), tuple(pieces), tau,
                   opt("mu_low"), opt("mu_high"))

    def __eq__(self, other):
        if not isinstance(other, TransportMap):
            return NotImplemented
        scalars = ("regime", "alpha", "prior", "lo", "hi", "cutoff", "mu_low", "mu_high")
        return (all(getattr(self, s) == getattr(other, s) for s in scalars)
                and self.tau == other.tau and len(self.pieces) == len(other.pieces)
                and all(p.same_as(q) for p, q in zip(self.pieces, other.pieces)))


def low_alpha_thresholds(tau: BeliefDensity, alpha: float) -> tuple[float, float]:
    """``(mu_L, mu_H)`` at which the outer tails' deviation mass, scaled by
    ``1 - alpha``, balances ``alpha`` times the aligned deviation on each side of
    the prior."""
    mu0 = tau.prior
    dev = lambda a, b: mu0 * tau.mass(a, b) - tau.moment(a, b)
    half = dev(0.0, mu0)  # equals the upper-side deviation by Bayes plausibility
    target = alpha / (1 - alpha) * half
    mu_l = bisect_root(lambda x: dev(0.0, x) - target, 0.0, mu0)
    mu_h = bisect_root(lambda x: -dev(x, 1.0) - target, mu0, 1.0)
    return mu_l, mu_h


def build_tre_map(u: UtilityCurve, tau: BeliefDensity, alpha: float, trust: TrustInterval,
                  strict: bool = True) -> TransportMap:
    """Adversary strategy certifying the trust interval ``trust``.

    With ``strict`` the interval must solve the balancing system for
    ``(u, tau, alpha)``; ``strict=False`` builds the same construction for an
    arbitrary interval, which is how corrupted artifacts are diagnosed.
    """
    alpha = float(alpha)
    if not 0.0 <= alpha <= 1.0:
        raise InputError(f"alpha = {alpha} is outside [0, 1]")
    if tau.kind != "grid":
        raise PreconditionError("transport maps need a full-support density on [0, 1]")
    lo, hi, mu0 = float(trust.lo), float(trust.hi), tau.prior
    if strict and alpha > 0.5:
        psi = psi_residuals(u, tau, alpha, lo, hi)
        if max(abs(psi[0]), abs(psi[1])) > RESIDUAL_TOL:
            raise PreconditionError(f"trust interval [{lo}, {hi}] leaves balancing residuals "
                                    f"{psi[0]:.3e}, {psi[1]:.3e}")
    if strict and alpha <= 0.5 and not lo == hi == mu0:
        raise PreconditionError("for alpha <= 1/2 the trust interval must be the prior")

    if alpha == 1.0:
        return TransportMap("high-alpha", alpha, mu0, lo, hi, curvature_cutoff(u, lo, hi),
                            (), tau)
    if alpha > 0.5:
        b = curvature_cutoff(u, lo, hi)
        up = QuantilePiece((0.0, b), (hi, 1.0), ((1 - alpha) * hi, -(1 - alpha)),
                           (-alpha * hi, alpha), tau)
        down = QuantilePiece((b, 1.0), (0.0, lo), (-(1 - alpha) * lo, 1 - alpha),
                             (alpha * lo, -alpha), tau)
        pieces = tuple(p for p in (up, down) if p.source[1] > p.source[0])
        return TransportMap("high-alpha", alpha, mu0, lo, hi, b, pieces, tau)

    mu_l, mu_h = low_alpha_thresholds(tau, alpha)
    left = QuantilePiece((0.0, mu_l), (mu0, 1.0), ((1 - alpha) * mu0, -(1 - alpha)),
                         (-alpha * mu0, alpha), tau)
    mid = AtomPiece((mu_l, mu_h), mu0)
    right = QuantilePiece((mu_h, 1.0), (0.0, mu0), (-(1 - alpha) * mu0, 1 - alpha),
                          (alpha * mu0, -alpha), tau)
    pieces = tuple(p for p in (left, mid, right) if p.source[1] > p.source[0])
    return TransportMap("low-alpha", alpha, mu0, mu0, mu0, mu0, pieces, tau, mu_l, mu_h)


@dataclass(frozen=True)
class ConsistencyReport:
    max_deviation: float
    worst_cell: tuple[float, float] | None
    n_checked: int
    skipped: tuple
    cells: tuple  # (y0, y1, posterior, required)

    def passed(self, tol: float = 1e-6) -> bool:
        return self.max_deviation <= tol


def _preimage_bound(piece, y, closed_top):
    """``inf{x in source : piece(x) >= y}``, or the source's upper end when no
    belief reaches ``y`` (or when the cell is closed at the top)."""
    a, b = piece.source
    y = np.atleast_1d(np.asarray(y, dtype=float))
    reach = np.asarray(piece(np.full(y.shape, b))) >= y
    out = _bisect_inf(lambda x: np.asarray(piece(x)) >= y, np.full(y.shape, a),
                      np.full(y.shape, b))
    out = np.where(reach, out, b)
    # beliefs before the source start never reach below piece(a)
    out = np.where(np.asarray(piece(np.full(y.shape, a))) >= y, a, out)
    if closed_top is not None:
        out = np.where(closed_top, b, out)
    return out


def verify_posterior_consistency(tmap: TransportMap, tau: BeliefDensity, alpha: float,
                                 trust: TrustInterval, n_cells: int = 200) -> ConsistencyReport:
    """Worst deviation of Bayes posteriors from where the policy acts.

    Messages are binned into ``n_cells`` equal cells, further split at the trust
    interval's ends and the prior. A cell's posterior mixes the aligned mass of the
    cell with the misaligned mass the map sends there. It must equal ``hi`` above the
    interval, ``lo`` below it, and the aligned conditional mean inside it (no
    misaligned mass); with a degenerate interval at the prior it must equal the
    prior. Each atom message forms its own cell.
    """
    alpha = float(alpha)
    lo, hi, mu0 = float(trust.lo), float(trust.hi), tau.prior
    if n_cells < 1:
        raise InputError("n_cells must be positive")
    edges = np.unique(np.concatenate([np.linspace(0.0, 1.0, n_cells + 1), [lo, hi, mu0]]))
    y0, y1 = edges[:-1], edges[1:]
    top = np.zeros(y0.shape, dtype=bool)
    top[-1] = True

    m0 = alpha * np.asarray(tau.mass(y0, y1), dtype=float)
    m1 = alpha * np.asarray(tau.moment(y0, y1), dtype=float)
    atoms = []
    for p in tmap.pieces:
        if isinstance(p, AtomPiece):
            atoms.append((p.target, (1 - alpha) * tau.mass(*p.source),
                          (1 - alpha) * tau.moment(*p.source)))
            continue
        c, d = p.target
        sel = (y1 > c) & (y0 <= d)
        if not np.any(sel):
            continue
        xa = _preimage_bound(p, np.maximum(y0[sel], c), None)
        xb = _preimage_bound(p, np.minimum(y1[sel], 1.0), top[sel] | (y1[sel] > d))
        xb = np.maximum(xa, xb)
        m0[sel] += (1 - alpha) * np.asarray(tau.mass(xa, xb))
        m1[sel] += (1 - alpha) * np.asarray(tau.moment(xa, xb))

    degenerate = lo == hi

    def required(a, b, mean_aligned):
        if degenerate:
            return mu0
        if a >= hi:
            return hi
        if b <= lo:
            return lo
        return mean_aligned

    rows, skipped = [], []
    worst, worst_cell = 0.0, None
    for a, b, w0, w1 in zip(y0, y1, m0, m1):
        if w0 <= 0.0:
            skipped.append((float(a), float(b)))
            continue
        aligned = tau.moment(a, b) / tau.mass(a, b) if tau.mass(a, b) > 0 else float("nan")
        post, req = w1 / w0, required(a, b, aligned)
        rows.append((float(a), float(b), float(post), float(req)))
        if abs(post - req) > worst:
            worst, worst_cell = abs(post - req), (float(a), float(b))
    for t, w0, w1 in atoms:
        if w0 <= 0.0:
            skipped.append((t, t))
            continue
        req = mu0 if degenerate else (hi if t >= hi else lo if t <= lo else t)
        post = w1 / w0
        rows.append((t, t, float(post), float(req)))
        if abs(post - req) > worst:
            worst, worst_cell = abs(post - req), (t, t)
    return ConsistencyReport(float(worst), worst_cell, len(rows), tuple(skipped), tuple(rows))
