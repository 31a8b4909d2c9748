"""Two-action problems: trust everything or nothing, and the adversary that
makes the choice optimal."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GenericityError, InputError
from .quadrature import PiecewiseLinear

BOUNDARY_TOL = 1e-12


class RelativePayoffDist:
    """Distribution of ``v``, the expected gain of action 2 over action 1 at the
    aligned adviser's posterior.

    Either finitely many atoms or a piecewise-linear density on ``[v_min, v_max]``.
    """

    def __init__(self, *, points=None, probs=None, density: PiecewiseLinear | None = None):
        if density is not None:
            if points is not None or probs is not None:
                raise InputError("give either atoms or a density, not both")
            if np.any(density.values < 0) or abs(density.total() - 1.0) > 1e-10:
                raise InputError("density must be nonnegative and integrate to 1")
            self.kind, self.density = "density", density
            self.points = self.probs = None
        else:
            v = np.asarray(points, dtype=float)
            p = np.asarray(probs, dtype=float)
            if v.ndim != 1 or v.shape != p.shape or v.size == 0:
                raise InputError("atoms need equal-length 1-d values and probabilities")
            if not np.all(np.isfinite(v)) or np.any(p < 0) or abs(p.sum() - 1.0) > 1e-10:
                raise InputError("atom probabilities must be nonnegative and sum to 1")
            self.kind, self.density = "atoms", None
            self.points, self.probs = v, p

    @classmethod
    def from_atoms(cls, points, probs) -> "RelativePayoffDist":
        return cls(points=points, probs=probs)

    @classmethod
    def from_density(cls, knots, values, normalize: bool = True) -> "RelativePayoffDist":
        pwl = PiecewiseLinear(knots, values)
        if normalize:
            pwl = PiecewiseLinear(pwl.knots, pwl.values / pwl.total())
        return cls(density=pwl)

    @property
    def loss(self) -> float:
        """``L``: expected loss of action 2 over beliefs where it is worse."""
        if self.kind == "atoms":
            neg = self.points < 0
            return float(-np.dot(self.points[neg], self.probs[neg]))
        return float(-self.density.moment(self.density.lower, min(0.0, self.density.upper)))

    @property
    def gain(self) -> float:
        """``G``: expected gain of action 2 over beliefs where it is better."""
        if self.kind == "atoms":
            pos = self.points > 0
            return float(np.dot(self.points[pos], self.probs[pos]))
        return float(self.density.moment(max(0.0, self.density.lower), self.density.upper))

    @property
    def prior_v(self) -> float:
        return self.gain - self.loss

    def mass_at_zero(self) -> float:
        if self.kind == "atoms":
            return float(self.probs[self.points == 0].sum())
        return 0.0

    def check_generic(self):
        if self.loss <= 0:
            raise GenericityError("genericity assumption violated: L = 0 "
                                  "(action 2 is never worse, so advice is irrelevant)")
        if self.gain <= 0:
            raise GenericityError("genericity assumption violated: G = 0 "
                                  "(action 2 is never better, so advice is irrelevant)")
        if self.mass_at_zero() > 0:
            raise GenericityError("genericity assumption violated: positive mass at v = 0")

    def to_atoms(self, n_cells: int = 400) -> "RelativePayoffDist":
        """Discretize a density cell by cell (mass at each cell's mean), splitting
        at zero so every atom keeps the sign of its cell."""
        if self.kind == "atoms":
            return self
        d = self.density
        edges = np.unique(np.concatenate([np.linspace(d.lower, d.upper, n_cells + 1),
                                          [0.0] if d.lower < 0 < d.upper else []]))
        mass = d.integral(edges[:-1], edges[1:])
        keep = mass > 0
        means = d.moment(edges[:-1], edges[1:])[keep] / mass[keep]
        return RelativePayoffDist(points=means, probs=mass[keep] / mass[keep].sum())

    def to_dict(self) -> dict:
        if self.kind == "atoms":
            return {"kind": "atoms", "points": self.points.tolist(), "probs": self.probs.tolist()}
        return {"kind": "density", "knots": self.density.knots.tolist(),
                "values": self.density.values.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "RelativePayoffDist":
        if d["kind"] == "atoms":
            return cls.from_atoms(d["points"], d["probs"])
        if d["kind"] == "density":
            return cls.from_density(d["knots"], d["values"], normalize=d.get("normalize", False))
        raise InputError(f"unknown distribution kind {d['kind']!r}")

    def __eq__(self, other):
        if not isinstance(other, RelativePayoffDist):
            return NotImplemented
        return self.to_dict() == other.to_dict()


@dataclass(frozen=True)
class BinaryActionSolution:
    L: float
    G: float
    alpha_hat: float
    alpha: float
    regime: str  # "full-trust", "no-trust" or "boundary-both"
    sigma_low: float
    sigma_high: float
    value: float

    @property
    def no_trust_action(self) -> int:
        """Constant action (1 or 2) that is optimal at the prior."""
        return 2 if self.G > self.L else 1

    def to_dict(self) -> dict:
        return dict(self.__dict__)

    @classmethod
    def from_dict(cls, d: dict) -> "BinaryActionSolution":
        return cls(**{k: (d[k] if k == "regime" else float(d[k]))
                      for k in cls.__dataclass_fields__})


def threshold(L: float, G: float) -> float:
    return max(L, G) / (L + G)


def policy_value(L: float, G: float, alpha: float, sigma_low: float, sigma_high: float) -> float:
    """Guaranteed gain over always playing action 1 when the agent plays action 2
    with probability ``sigma_low`` after unfavourable and ``sigma_high`` after
    favourable reports."""
    return sigma_low * ((1 - alpha) * G - alpha * L) + sigma_high * (alpha * G - (1 - alpha) * L)


def solve_binary_action(dist: RelativePayoffDist, alpha: float) -> BinaryActionSolution:
    alpha = float(alpha)
    if not 0.0 <= alpha <= 1.0:
        raise InputError(f"alpha = {alpha} is outside [0, 1]")
    dist.check_generic()
    L, G = dist.loss, dist.gain
    a_hat = threshold(L, G)
    constant = 1.0 if G > L else 0.0
    if abs(alpha - a_hat) <= BOUNDARY_TOL:
        regime, s_lo, s_hi = "boundary-both", 0.0, 1.0
    elif alpha > a_hat:
        regime, s_lo, s_hi = "full-trust", 0.0, 1.0
    else:
        regime, s_lo, s_hi = "no-trust", constant, constant
    value = max(0.0, G - L, alpha * G - (1 - alpha) * L)
    return BinaryActionSolution(L, G, a_hat, alpha, regime, s_lo, s_hi, value)


@dataclass(frozen=True, eq=False)
class AdversaryKernel:
    """Misaligned reporting kernels over the atoms of ``v``.

    ``kernels[name][i, j]`` is the probability that a misaligned adviser whose
    belief has relative payoff ``points[i]`` reports the belief of atom ``j``.
    """

    points: np.ndarray
    probs: np.ndarray
    alpha: float
    regime: str
    kernels: dict
    gamma: float | None
    no_trust_action: int

    def posterior_payoffs(self, name: str) -> np.ndarray:
        """Unnormalized posterior relative payoff of each message."""
        k = self.kernels[name]
        return self.alpha * self.probs * self.points \
            + (1 - self.alpha) * (self.probs * self.points) @ k

    def certify(self, name: str, tol: float = 1e-12) -> bool:
        """Each message's posterior payoff has the sign required by the action
        the policy plays there."""
        pay = self.posterior_payoffs(name)
        if name == "full-trust":
            ok = np.where(self.points > 0, pay >= -tol, pay <= tol)
        elif self.no_trust_action == 2:
            ok = pay >= -tol
        else:
            ok = pay <= tol
        return bool(np.all(ok[self.probs > 0]))


def rationalizing_adversary(dist: RelativePayoffDist, alpha: float) -> AdversaryKernel:
    """Misaligned kernels under which the reported policy is a Bayes best response
    message by message.

    Full trust: unfavourable types imitate favourable reports in proportion to
    ``v * tau / G`` and vice versa. No trust (say ``G >= L``): favourable types put
    weight ``gamma = alpha L / ((1 - alpha) G)`` on unfavourable reports, which
    makes those exactly indifferent; the mirror image applies when ``G < L``.
    """
    sol = solve_binary_action(dist, alpha)
    atoms = dist.to_atoms()
    v, p = atoms.points, atoms.probs
    L, G = sol.L, sol.G
    pos, neg = v > 0, v < 0
    q_plus = np.where(pos, v * p / G, 0.0)
    q_minus = np.where(neg, -v * p / L, 0.0)
    n = v.size

    def rows(for_pos, for_neg):
        k = np.zeros((n, n))
        k[pos] = for_pos
        k[neg] = for_neg
        return k

    kernels, gamma = {}, None
    if sol.regime in ("full-trust", "boundary-both"):
        kernels["full-trust"] = rows(q_minus, q_plus)
    if sol.regime in ("no-trust", "boundary-both"):
        if G >= L:
            gamma = alpha * L / ((1 - alpha) * G) if alpha < 1 else 1.0
            kernels["no-trust"] = rows(gamma * q_minus + (1 - gamma) * q_plus, q_plus)
        else:
            gamma = alpha * G / ((1 - alpha) * L) if alpha < 1 else 1.0
            kernels["no-trust"] = rows(q_minus, gamma * q_plus + (1 - gamma) * q_minus)
    return AdversaryKernel(v, p, float(alpha), sol.regime, kernels, gamma, sol.no_trust_action)


def to_finite_game(dist: RelativePayoffDist, alpha: float):
    """Equivalent finite game: one state per atom, a fully informative aligned
    adviser, action 1 paying 0 and action 2 paying the atom's ``v``."""
    from .game import FiniteGame

    atoms = dist.to_atoms()
    v, p = atoms.points, atoms.probs
    n = v.size
    payoff = np.zeros((2, n, 1))
    payoff[1, :, 0] = v
    return FiniteGame(prior=p, beliefs=np.eye(n), probs=p, type_likelihood=np.ones((n, 1)),
                      payoff=payoff, alpha=alpha)
