"""Beliefs, indirect utility curves, adviser-posterior densities and the Bregman
machinery shared by every solver.

Binary-state beliefs are plain floats ``mu = Pr(state = 1)``; multi-state beliefs
are 1-d numpy arrays on the probability simplex.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from numpy.polynomial import Polynomial

from .errors import InputError
from .quadrature import PiecewiseLinear

SIMPLEX_TOL = 1e-12
NORMALIZATION_TOL = 1e-10
LOG_CLAMP = 1e-12

# When U'(hi) - U'(lo) is this small relative to the slopes, the antiderivative
# form of the curvature integrals loses too many digits; integrate U'' directly.
_CANCEL = 1e-3
_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)


# ---------------------------------------------------------------------------
# beliefs

def check_binary_belief(mu, name: str = "belief") -> float:
    mu = float(mu)
    if not (0.0 <= mu <= 1.0) or math.isnan(mu):
        raise InputError(f"{name} = {mu!r} is outside [0, 1]")
    return mu


def check_simplex_belief(p, name: str = "belief") -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or p.size < 2:
        raise InputError(f"{name} must be a 1-d probability vector")
    if np.any(p < -SIMPLEX_TOL) or abs(p.sum() - 1.0) > SIMPLEX_TOL:
        raise InputError(f"{name} = {p.tolist()} is not on the probability simplex")
    return p


# ---------------------------------------------------------------------------
# utility curves

@dataclass(frozen=True, eq=False)
class UtilityCurve:
    """Strictly convex indirect utility ``U(mu)`` of a binary-state problem.

    ``value``, ``slope`` and ``curvature`` are ``U``, ``U'`` and ``U''``. Use the
    classmethod constructors rather than building one by hand.
    """

    value: Callable
    slope: Callable
    curvature: Callable
    kind: str
    params: dict = field(default_factory=dict)
    _grid: Optional[PiecewiseLinear] = None

    # -- constructors --------------------------------------------------------
    @classmethod
    def quadratic_loss(cls, scale: float = 1.0) -> "UtilityCurve":
        """Indirect utility of ``-(a - state)**2``: ``U(mu) = -scale * mu (1 - mu)``.

        Its Bregman distance is ``scale * (m - m')**2``.
        """
        s = float(scale)
        if s <= 0:
            raise InputError("scale must be positive")
        return cls(value=lambda m: -s * m * (1 - m),
                   slope=lambda m: s * (2 * m - 1),
                   curvature=_scalarize(lambda m: 2 * s + 0 * np.asarray(m, dtype=float)),
                   kind="quadratic-loss", params={"scale": s})

    @classmethod
    def weighted_quadratic_loss(cls, gamma: float) -> "UtilityCurve":
        """Squared loss with the state-1 loss multiplied by ``gamma``.

        ``U(mu) = -gamma mu (1 - mu) / (1 + (gamma - 1) mu)``, curvature
        ``2 gamma**2 / (1 + (gamma - 1) mu)**3``.
        """
        g = float(gamma)
        if g <= 0:
            raise InputError("gamma must be positive")

        def value(m):
            return -g * m * (1 - m) / (1 + (g - 1) * m)

        def slope(m):
            return g * ((g - 1) * m ** 2 + 2 * m - 1) / (1 + (g - 1) * m) ** 2

        def curvature(m):
            return 2 * g ** 2 / (1 + (g - 1) * np.asarray(m, dtype=float)) ** 3

        return cls(value=value, slope=slope, curvature=_scalarize(curvature),
                   kind="quadratic-loss", params={"gamma": g})

    @classmethod
    def log_score(cls) -> "UtilityCurve":
        """Negative Shannon entropy; its Bregman distance is the KL divergence.

        Beliefs are clamped to ``[1e-12, 1 - 1e-12]`` before evaluation.
        """
        def clamp(m):
            return np.clip(m, LOG_CLAMP, 1 - LOG_CLAMP)

        def value(m):
            m = clamp(m)
            return m * np.log(m) + (1 - m) * np.log1p(-m)

        def slope(m):
            m = clamp(m)
            return np.log(m) - np.log1p(-m)

        def curvature(m):
            m = clamp(m)
            return 1.0 / (m * (1 - m))

        return cls(value=_scalarize(value), slope=_scalarize(slope),
                   curvature=_scalarize(curvature), kind="log-score")

    @classmethod
    def polynomial_curvature(cls, coefficients: Sequence[float]) -> "UtilityCurve":
        """Utility whose curvature is the polynomial ``sum c_k mu**k``.

        ``U'`` and ``U`` are anchored at ``U'(0) = U(0) = 0``.
        """
        d2 = Polynomial(np.asarray(coefficients, dtype=float))
        probe = d2(np.linspace(0.0, 1.0, 1001))
        if np.any(probe <= 0):
            raise InputError("curvature polynomial must be positive on [0, 1]")
        d1 = d2.integ()
        d0 = d1.integ()
        return cls(value=_scalarize(d0), slope=_scalarize(d1), curvature=_scalarize(d2),
                   kind="polynomial", params={"coefficients": [float(c) for c in d2.coef]})

    @classmethod
    def from_curvature_grid(cls, knots, curvature_values) -> "UtilityCurve":
        """Utility from sampled ``U''`` on a grid spanning ``[0, 1]``.

        ``U''`` is linearly interpolated; ``U'`` and ``U`` are its exact cumulative
        integrals anchored at ``mu = 0``.
        """
        grid = PiecewiseLinear(knots, curvature_values)
        if grid.lower > 0.0 or grid.upper < 1.0:
            raise InputError("curvature grid must span [0, 1]")
        if np.any(grid.values <= 0):
            raise InputError("sampled curvature must be strictly positive")

        def slope(m):
            return grid.integral(0.0, m)

        def value(m):
            return np.asarray(m) * grid.integral(0.0, m) - grid.moment(0.0, m)

        return cls(value=_scalarize(value), slope=_scalarize(slope), curvature=grid,
                   kind="custom-grid",
                   params={"knots": grid.knots.tolist(), "values": grid.values.tolist()},
                   _grid=grid)

    # -- curvature integrals ------------------------------------------------
    def _closed_form_ok(self, lo: float, hi: float) -> bool:
        # the antiderivative route subtracts U'(hi) - U'(lo); accept it unless that
        # difference is a thousand times smaller than the slopes themselves
        d = abs(self.slope(hi) - self.slope(lo))
        return d > _CANCEL * max(abs(self.slope(lo)), abs(self.slope(hi)), 1.0)

    def _gauss(self, f, lo: float, hi: float) -> float:
        half, mid = 0.5 * (hi - lo), 0.5 * (hi + lo)
        return float(half * np.sum(_GL_W * np.array([f(mid + half * x) for x in _GL_X])))

    def curvature_mass(self, lo: float, hi: float) -> float:
        """``∫_lo^hi U''``."""
        if self._grid is not None:
            return self._grid.integral(lo, hi)
        if hi <= lo:
            return 0.0
        if self._closed_form_ok(lo, hi):
            return float(self.slope(hi) - self.slope(lo))
        return self._gauss(self.curvature, lo, hi)

    def curvature_moment(self, lo: float, hi: float) -> float:
        """``∫_lo^hi mu U''(mu) dmu`` (integration by parts on the closed forms)."""
        if self._grid is not None:
            return self._grid.moment(lo, hi)
        if hi <= lo:
            return 0.0
        if self._closed_form_ok(lo, hi):
            return float(hi * self.slope(hi) - lo * self.slope(lo)
                         - (self.value(hi) - self.value(lo)))
        return self._gauss(lambda m: m * self.curvature(m), lo, hi)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "params": dict(self.params)}

    @classmethod
    def from_dict(cls, d: dict) -> "UtilityCurve":
        kind, params = d["kind"], d.get("params", {})
        if kind == "quadratic-loss":
            if "gamma" in params:
                return cls.weighted_quadratic_loss(params["gamma"])
            return cls.quadratic_loss(params.get("scale", 1.0))
        if kind == "log-score":
            return cls.log_score()
        if kind == "polynomial":
            return cls.polynomial_curvature(params["coefficients"])
        if kind == "custom-grid":
            return cls.from_curvature_grid(params["knots"], params["values"])
        raise InputError(f"unknown utility kind {kind!r}")

    def __eq__(self, other):
        if not isinstance(other, UtilityCurve):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    def __repr__(self):
        return f"UtilityCurve(kind={self.kind!r}, params={self.params!r})"


def _scalarize(fn):
    def wrapped(m):
        out = fn(m)
        return float(out) if np.ndim(out) == 0 else out
    return wrapped


# ---------------------------------------------------------------------------
# adviser-posterior distributions

class BeliefDensity:
    """Distribution of the aligned adviser's posterior.

    Three variants share one interface (``mass``, ``moment``, ``pdf``):

    * ``"grid"``: piecewise-linear density on ``[0, 1]``, strictly positive;
    * ``"radial"``: piecewise-linear density of a radius on ``[0, r0]``;
    * ``"atoms"``: finitely many posteriors with probabilities.
    """

    def __init__(self, kind: str, *, density: Optional[PiecewiseLinear] = None,
                 points=None, probs=None, prior: Optional[float] = None):
        self.kind = kind
        self.density = density
        if kind in ("grid", "radial"):
            if density is None:
                raise InputError(f"{kind} density needs a piecewise-linear density")
            if np.any(density.values < 0):
                raise InputError("density values must be nonnegative")
            if abs(density.total() - 1.0) > NORMALIZATION_TOL:
                raise InputError(f"density integrates to {density.total():.12g}, not 1")
            if kind == "grid":
                if density.lower != 0.0 or density.upper != 1.0:
                    raise InputError("grid density must be supported on exactly [0, 1]")
                if np.any(density.values <= 0):
                    raise InputError("grid density must be strictly positive (full support)")
            elif density.lower != 0.0:
                raise InputError("radial density must start at r = 0")
            self.points = self.probs = None
            mean = density.moment(density.lower, density.upper)
        elif kind == "atoms":
            pts = np.asarray(points, dtype=float)
            pr = np.asarray(probs, dtype=float)
            if pts.ndim != 1 or pts.shape != pr.shape or pts.size == 0:
                raise InputError("atoms need equal-length 1-d points and probs")
            if np.any(pr < 0) or abs(pr.sum() - 1.0) > NORMALIZATION_TOL:
                raise InputError("atom probabilities must be nonnegative and sum to 1")
            if np.any((pts < 0) | (pts > 1)):
                raise InputError("atom beliefs must lie in [0, 1]")
            order = np.argsort(pts, kind="stable")
            self.points, self.probs = pts[order], pr[order]
            mean = float(np.dot(self.points, self.probs))
        else:
            raise InputError(f"unknown density kind {kind!r}")
        self.mean = float(mean)
        if prior is not None and abs(float(prior) - self.mean) > NORMALIZATION_TOL:
            raise InputError(f"prior {prior} differs from the distribution mean {self.mean:.12g}"
                             " (posteriors must be Bayes plausible)")
        self.prior = self.mean if prior is None else float(prior)

    # -- constructors --------------------------------------------------------
    @classmethod
    def uniform(cls) -> "BeliefDensity":
        return cls("grid", density=PiecewiseLinear([0.0, 1.0], [1.0, 1.0]))

    @classmethod
    def from_grid(cls, knots, values, normalize: bool = True, prior=None) -> "BeliefDensity":
        pwl = PiecewiseLinear(knots, values)
        if normalize:
            pwl = PiecewiseLinear(pwl.knots, pwl.values / pwl.total())
        return cls("grid", density=pwl, prior=prior)

    @classmethod
    def from_function(cls, f: Callable, n_knots: int = 4097) -> "BeliefDensity":
        """Sample a density on ``[0, 1]`` and interpolate linearly."""
        x = np.linspace(0.0, 1.0, n_knots)
        return cls.from_grid(x, [f(t) for t in x])

    @classmethod
    def radial(cls, knots, values, normalize: bool = True) -> "BeliefDensity":
        pwl = PiecewiseLinear(knots, values)
        if normalize:
            pwl = PiecewiseLinear(pwl.knots, pwl.values / pwl.total())
        return cls("radial", density=pwl)

    @classmethod
    def uniform_radial(cls, r0: float) -> "BeliefDensity":
        r0 = float(r0)
        if r0 <= 0:
            raise InputError("r0 must be positive")
        return cls("radial", density=PiecewiseLinear([0.0, r0], [1.0 / r0, 1.0 / r0]))

    @classmethod
    def from_atoms(cls, points, probs, prior=None) -> "BeliefDensity":
        return cls("atoms", points=points, probs=probs, prior=prior)

    # -- queries -------------------------------------------------------------
    @property
    def support(self) -> tuple[float, float]:
        if self.kind == "atoms":
            return 0.0, 1.0
        return self.density.lower, self.density.upper

    def pdf(self, x):
        if self.kind == "atoms":
            raise InputError("atomic distributions have no density")
        return self.density(x)

    def mass(self, lo, hi):
        """Probability of ``[lo, hi]`` (closed interval for atoms)."""
        if self.kind == "atoms":
            return float(self.probs[(self.points >= lo) & (self.points <= hi)].sum())
        return self.density.integral(lo, hi)

    def moment(self, lo, hi):
        """``∫_lo^hi mu dtau(mu)``."""
        if self.kind == "atoms":
            sel = (self.points >= lo) & (self.points <= hi)
            return float(np.dot(self.points[sel], self.probs[sel]))
        return self.density.moment(lo, hi)

    def to_dict(self) -> dict:
        if self.kind == "atoms":
            return {"kind": "atoms", "points": self.points.tolist(),
                    "probs": self.probs.tolist()}
        return {"kind": self.kind, "knots": self.density.knots.tolist(),
                "values": self.density.values.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "BeliefDensity":
        kind = d["kind"]
        if kind == "atoms":
            return cls.from_atoms(d["points"], d["probs"])
        if kind == "uniform":
            return cls.uniform()
        if kind == "grid":
            return cls.from_grid(d["knots"], d["values"], normalize=d.get("normalize", False))
        if kind == "radial":
            return cls.radial(d["knots"], d["values"], normalize=d.get("normalize", False))
        raise InputError(f"unknown density kind {kind!r}")

    def __eq__(self, other):
        if not isinstance(other, BeliefDensity):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    def __repr__(self):
        return f"BeliefDensity(kind={self.kind!r}, prior={self.prior:.6g})"


def density_moments(tau: BeliefDensity, lo: float, hi: float) -> tuple[float, float]:
    """Mass of ``[lo, hi]`` under ``tau`` and the conditional mean there.

    The mean is ``nan`` when the interval carries no mass.
    """
    lo, hi = float(lo), float(hi)
    a, b = tau.support
    if not (a <= lo <= hi <= b):
        raise InputError(f"need {a} <= lo <= hi <= {b}, got lo={lo}, hi={hi}")
    mass = tau.mass(lo, hi)
    if mass <= 0.0:
        return 0.0, float("nan")
    return float(mass), float(tau.moment(lo, hi) / mass)


# ---------------------------------------------------------------------------
# Bregman distance

def bregman_distance(u, m, mprime) -> float:
    """``D_U(m, m') = U(m) - U(m') - grad U(m') . (m - m')``.

    ``u`` is a :class:`UtilityCurve` with scalar beliefs, or any object exposing
    ``value`` and ``gradient`` over simplex vectors (e.g. a radial utility).
    """
    if isinstance(u, UtilityCurve):
        m = check_binary_belief(m, "m")
        mp = check_binary_belief(mprime, "m'")
        if m == mp:
            return 0.0
        d = u.value(m) - u.value(mp) - u.slope(mp) * (m - mp)
        return max(float(d), 0.0)
    m = check_simplex_belief(m, "m")
    mp = check_simplex_belief(mprime, "m'")
    if m.shape != mp.shape:
        raise InputError("beliefs have different dimensions")
    if np.array_equal(m, mp):
        return 0.0
    d = u.value(m) - u.value(mp) - float(np.dot(u.gradient(mp), m - mp))
    return max(float(d), 0.0)


def _interval_bounds(trust):
    if hasattr(trust, "lo") and hasattr(trust, "hi"):
        return float(trust.lo), float(trust.hi)
    if isinstance(trust, tuple) and len(trust) == 2 and np.ndim(trust[0]) == 0:
        return float(trust[0]), float(trust[1])
    return None


def curvature_cutoff(u: UtilityCurve, lo: float, hi: float) -> float:
    """Curvature-weighted mean of ``[lo, hi]``; ``lo`` when the interval is a point."""
    if hi <= lo:
        return lo
    mass = u.curvature_mass(lo, hi)
    b = u.curvature_moment(lo, hi) / mass
    return min(max(b, lo), hi)


def worst_case_report(u, trust, mu):
    """A report in ``trust`` at maximal Bregman distance from the belief ``mu``.

    ``trust`` is an interval (``(lo, hi)`` or an object with ``lo``/``hi``) or a
    finite collection of candidate beliefs. For intervals the adversary reports the
    upper end when ``mu`` is below the curvature cutoff and the lower end otherwise;
    ties go to the lower end (or to the first candidate for finite sets).
    """
    bounds = _interval_bounds(trust)
    if bounds is not None:
        lo, hi = bounds
        if not (0.0 <= lo <= hi <= 1.0):
            raise InputError(f"trust interval [{lo}, {hi}] is empty or outside [0, 1]")
        mu = check_binary_belief(mu, "mu")
        if lo == hi:
            return lo
        return lo if mu >= curvature_cutoff(u, lo, hi) else hi
    candidates = list(trust)
    if not candidates:
        raise InputError("trust region is empty")
    distances = [bregman_distance(u, mu, c) for c in candidates]
    return candidates[int(np.argmax(distances))]
