"""Symmetric multi-state environments: a trust ball around the bliss belief.

Utility depends only on the distance to a centre ``b``, and the aligned
adviser's posterior lies at a radius drawn from ``tau(r)`` (the density of the
radius itself, integrated along a diameter) in a uniformly random direction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import BeliefDensity, check_simplex_belief
from .errors import InputError
from .quadrature import bisect_root

RADIUS_TOL = 1e-14


def _axis_directions(n: int) -> np.ndarray:
    u = np.eye(n) - 1.0 / n
    return u / np.linalg.norm(u, axis=1, keepdims=True)


@dataclass(frozen=True, eq=False)
class SphericalInstance:
    center: np.ndarray
    r0: float
    radial_density: BeliefDensity

    def __post_init__(self):
        b = check_simplex_belief(self.center, "center")
        r0 = float(self.r0)
        tau = self.radial_density
        if r0 <= 0:
            raise InputError("r0 must be positive")
        if tau.kind != "radial":
            raise InputError("radial_density must be a radial BeliefDensity")
        if abs(tau.density.upper - r0) > 1e-12:
            raise InputError(f"radial density ends at {tau.density.upper}, not at r0 = {r0}")
        extremes = b + r0 * np.vstack([_axis_directions(b.size), -_axis_directions(b.size)])
        if np.any(extremes < -1e-12):
            raise InputError(f"the ball of radius {r0} around {b.tolist()} leaves the simplex")
        b.setflags(write=False)
        object.__setattr__(self, "center", b)
        object.__setattr__(self, "r0", r0)

    @classmethod
    def uniform(cls, center, r0: float) -> "SphericalInstance":
        return cls(np.asarray(center, dtype=float), r0, BeliefDensity.uniform_radial(r0))

    @property
    def dimension(self) -> int:
        return self.center.size

    def to_dict(self) -> dict:
        return {"center": self.center.tolist(), "r0": self.r0,
                "radial_density": self.radial_density.to_dict()}

    @classmethod
    def from_dict(cls, d: dict) -> "SphericalInstance":
        return cls(np.asarray(d["center"], dtype=float), float(d["r0"]),
                   BeliefDensity.from_dict(d["radial_density"]))

    def __eq__(self, other):
        if not isinstance(other, SphericalInstance):
            return NotImplemented
        return self.to_dict() == other.to_dict()


class RadialUtility:
    """``U(mu) = V(|mu - center|)`` with ``V`` increasing and convex."""

    def __init__(self, center, v: Callable[[float], float], dv: Callable[[float], float]):
        self.center = np.asarray(center, dtype=float)
        self.v, self.dv = v, dv

    @classmethod
    def power(cls, center, p: float = 2.0) -> "RadialUtility":
        if p <= 1:
            raise InputError("power must exceed 1 for strict convexity")
        return cls(center, lambda x: x ** p, lambda x: p * x ** (p - 1))

    @classmethod
    def cosh(cls, center, scale: float = 1.0) -> "RadialUtility":
        return cls(center, lambda x: math.cosh(scale * x) - 1.0,
                   lambda x: scale * math.sinh(scale * x))

    def value(self, mu) -> float:
        return float(self.v(float(np.linalg.norm(np.asarray(mu) - self.center))))

    def gradient(self, mu) -> np.ndarray:
        d = np.asarray(mu, dtype=float) - self.center
        r = float(np.linalg.norm(d))
        if r == 0.0:
            return np.zeros_like(d)
        return self.dv(r) * d / r


def balance_residual(inst: SphericalInstance, alpha: float, r: float) -> float:
    """Positive below the optimal radius, negative above it."""
    tau = inst.radial_density
    r0 = inst.r0
    outer = tau.moment(r, r0) - r * tau.mass(r, r0)
    inner = tau.moment(0.0, r) + r * tau.mass(0.0, r)
    return (2 * alpha - 1) * outer - (1 - alpha) * (inner + 2 * r * tau.mass(r, r0))


def _check_alpha(alpha) -> float:
    alpha = float(alpha)
    if not 0.0 <= alpha <= 1.0:
        raise InputError(f"alpha = {alpha} is outside [0, 1]")
    return alpha


def solve_radius(inst: SphericalInstance, alpha: float, xtol: float = RADIUS_TOL) -> float:
    """Radius of the optimal trust ball: ``0`` for ``alpha <= 1/2``, ``r0`` at
    ``alpha = 1`` and otherwise the root of the balance residual."""
    alpha = _check_alpha(alpha)
    if alpha <= 0.5:
        return 0.0
    if alpha == 1.0:
        return inst.r0
    return bisect_root(lambda r: balance_residual(inst, alpha, r), 0.0, inst.r0, xtol=xtol)


def uniform_radius(alpha: float, r0: float = 1.0) -> float:
    """Closed form for a uniform radial density."""
    alpha = _check_alpha(alpha)
    if alpha <= 0.5:
        return 0.0
    return (1.0 - math.sqrt(1.0 + alpha - 2.0 * alpha * alpha)) / alpha * r0


def antipodal_report(inst: SphericalInstance, r_star: float, mu) -> np.ndarray:
    """Point of the trust ball farthest (in Bregman distance) from ``mu``: the
    boundary point diametrically opposite ``mu``'s direction from the centre."""
    r_star = float(r_star)
    if not 0.0 <= r_star <= inst.r0:
        raise InputError(f"r_star = {r_star} is outside [0, r0]")
    mu = check_simplex_belief(mu, "mu")
    if mu.shape != inst.center.shape:
        raise InputError("mu and the centre have different dimensions")
    if r_star == 0.0:
        return inst.center.copy()
    d = inst.center - mu
    norm = float(np.linalg.norm(d))
    if norm == 0.0:
        raise InputError("mu equals the centre: every boundary point of the ball is "
                         "equally far, so there is no unique antipodal report")
    return inst.center + r_star * d / norm


def diameter_posterior(inst: SphericalInstance, utility, alpha: float, r: float,
                       direction=None) -> float:
    """Signed radius of the posterior pooled on the ``+direction`` side of a
    trust ball of radius ``r``.

    Aligned beliefs ``b + s n`` with ``|s| >= r`` and ``s > 0`` are pooled with the
    misaligned beliefs whose Bregman-farthest point among ``b +- r n`` is the
    ``+`` one; the switching belief is located by bisection on the distance gap.
    """
    alpha = _check_alpha(alpha)
    n = _axis_directions(inst.dimension)[0] if direction is None else np.asarray(direction)
    n = n / np.linalg.norm(n)
    b, r0, tau = inst.center, inst.r0, inst.radial_density
    if r <= 0.0:
        return 0.0
    plus, minus = b + r * n, b - r * n
    at = lambda s: b + s * n

    def gap(s):
        mu = at(s)
        dp = utility.value(mu) - utility.value(plus) - float(utility.gradient(plus) @ (mu - plus))
        dm = utility.value(mu) - utility.value(minus) - float(utility.gradient(minus) @ (mu - minus))
        return dp - dm  # > 0 where the + boundary point is farther

    g_lo, g_hi = gap(-r0), gap(r0)
    if g_lo > 0 and g_hi <= 0:
        switch = bisect_root(gap, -r0, r0)
    else:
        switch = r0 if g_hi > 0 else -r0

    def side(lo, hi):
        # mass and first moment of signed s on [lo, hi] with density tau(|s|) / 2
        m0 = m1 = 0.0
        if lo < 0:
            a, c = max(-hi, 0.0), -lo
            m0 += tau.mass(a, c) / 2
            m1 -= tau.moment(a, c) / 2
        if hi > 0:
            a, c = max(lo, 0.0), hi
            m0 += tau.mass(a, c) / 2
            m1 += tau.moment(a, c) / 2
        return m0, m1

    a0, a1 = side(r, r0)
    d0, d1 = side(-r0, switch)
    return (alpha * a1 + (1 - alpha) * d1) / (alpha * a0 + (1 - alpha) * d0)


def simulate_radius(inst: SphericalInstance, utility, alpha: float,
                    xtol: float = RADIUS_TOL) -> float:
    """Radius at which the simulated pooled posterior sits exactly on the ball's
    boundary, using ``utility`` only to decide where the misaligned adviser reports."""
    alpha = _check_alpha(alpha)
    if alpha <= 0.5:
        return 0.0
    if alpha == 1.0:
        return inst.r0
    return bisect_root(lambda r: diameter_posterior(inst, utility, alpha, r) - r,
                       xtol, inst.r0, xtol=xtol)
