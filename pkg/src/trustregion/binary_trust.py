"""Binary-state trust interval: curvature cutoff, balancing residuals, the
best-response solver and comparative statics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import BeliefDensity, UtilityCurve, check_binary_belief, curvature_cutoff
from .errors import InputError, PreconditionError, SolverError
from .quadrature import adaptive_simpson, bisect_root

RESIDUAL_TOL = 1e-9
STEP_TOL = 1e-10
MAX_OUTER = 10_000


@dataclass(frozen=True)
class TrustInterval:
    lo: float
    hi: float
    cutoff: float
    alpha: float
    residuals: tuple[float, float]
    prior: float
    iterations: int = 0

    @property
    def degenerate(self) -> bool:
        return self.lo == self.hi

    def contains(self, m: float) -> bool:
        return self.lo <= m <= self.hi

    def clamp(self, m):
        return np.clip(m, self.lo, self.hi)

    def to_dict(self) -> dict:
        return {"lo": self.lo, "hi": self.hi, "cutoff": self.cutoff, "alpha": self.alpha,
                "residuals": list(self.residuals), "prior": self.prior,
                "iterations": self.iterations}

    @classmethod
    def from_dict(cls, d: dict) -> "TrustInterval":
        return cls(lo=float(d["lo"]), hi=float(d["hi"]), cutoff=float(d["cutoff"]),
                   alpha=float(d["alpha"]),
                   residuals=tuple(float(r) for r in d["residuals"]),
                   prior=float(d["prior"]), iterations=int(d.get("iterations", 0)))


def _check_interval(lo, hi):
    lo = check_binary_belief(lo, "lo")
    hi = check_binary_belief(hi, "hi")
    if lo > hi:
        raise InputError(f"lo = {lo} exceeds hi = {hi}")
    return lo, hi


def _check_alpha(alpha) -> float:
    alpha = float(alpha)
    if not 0.0 <= alpha <= 1.0:
        raise InputError(f"alpha = {alpha} is outside [0, 1]")
    return alpha


def cutoff_belief(u: UtilityCurve, lo: float, hi: float) -> float:
    """Belief at which the misaligned adviser switches from the upper to the lower
    end of ``[lo, hi]``: ``∫ mu U'' / ∫ U''`` over the interval."""
    lo, hi = _check_interval(lo, hi)
    return curvature_cutoff(u, lo, hi)


def _residuals(u, tau, alpha, lo, hi):
    b = curvature_cutoff(u, lo, hi)
    m0, m1 = tau.mass, tau.moment
    psi1 = (alpha * (m1(0.0, lo) - lo * m0(0.0, lo))
            + (1 - alpha) * (m1(b, 1.0) - lo * m0(b, 1.0)))
    psi2 = (alpha * (m1(hi, 1.0) - hi * m0(hi, 1.0))
            + (1 - alpha) * (m1(0.0, b) - hi * m0(0.0, b)))
    return psi1, psi2, b


def psi_residuals(u: UtilityCurve, tau: BeliefDensity, alpha: float,
                  lo: float, hi: float) -> tuple[float, float]:
    """Balancing residuals ``(Psi1, Psi2)``; both vanish exactly when the average
    posterior induced by reports below ``lo`` is ``lo`` and by reports above ``hi``
    is ``hi``."""
    alpha = _check_alpha(alpha)
    lo, hi = _check_interval(lo, hi)
    psi1, psi2, _ = _residuals(u, tau, alpha, lo, hi)
    return psi1, psi2


def _best_lo(u, tau, alpha, hi):
    return bisect_root(lambda lo: _residuals(u, tau, alpha, lo, hi)[0], 0.0, tau.prior)


def _best_hi(u, tau, alpha, lo):
    return bisect_root(lambda hi: _residuals(u, tau, alpha, lo, hi)[1], tau.prior, 1.0)


def best_response_iteration(u: UtilityCurve, tau: BeliefDensity, alpha: float,
                            lo_init: float, step_tol: float = STEP_TOL,
                            max_iter: int = MAX_OUTER) -> tuple[float, float, int]:
    """Iterate ``lo <- b1(b2(lo))`` from ``lo_init``; returns ``(lo, hi, iterations)``.

    ``b2`` solves ``Psi2 = 0`` for ``hi`` given ``lo`` and ``b1`` solves ``Psi1 = 0``
    for ``lo`` given ``hi``, each by bisection.
    """
    lo = float(lo_init)
    for k in range(1, max_iter + 1):
        hi = _best_hi(u, tau, alpha, lo)
        new_lo = _best_lo(u, tau, alpha, hi)
        if abs(new_lo - lo) < step_tol:
            return new_lo, _best_hi(u, tau, alpha, new_lo), k
        lo = new_lo
    psi = _residuals(u, tau, alpha, lo, _best_hi(u, tau, alpha, lo))[:2]
    raise SolverError(f"best-response iteration did not settle in {max_iter} steps",
                      residuals=psi)


def _require_full_support(tau: BeliefDensity):
    if tau.kind != "grid":
        raise PreconditionError("the trust-interval solver needs a full-support density on "
                                "[0, 1]; use the game oracle for atomic distributions")


def solve_trust_interval(u: UtilityCurve, tau: BeliefDensity, alpha: float,
                         residual_tol: float = RESIDUAL_TOL) -> TrustInterval:
    """Optimal trust interval for alignment probability ``alpha``.

    For ``alpha <= 1/2`` the agent ignores the adviser and the interval collapses
    to the prior. Otherwise the balancing system is solved by best-response
    iteration started at ``lo = 0``.
    """
    alpha = _check_alpha(alpha)
    _require_full_support(tau)
    prior = tau.prior
    if alpha <= 0.5:
        psi1, psi2, _ = _residuals(u, tau, alpha, prior, prior)
        return TrustInterval(prior, prior, prior, alpha, (psi1, psi2), prior, 0)
    lo, hi, iters = best_response_iteration(u, tau, alpha, 0.0)
    psi1, psi2, b = _residuals(u, tau, alpha, lo, hi)
    if max(abs(psi1), abs(psi2)) > residual_tol:
        raise SolverError(f"balancing residuals {psi1:.3e}, {psi2:.3e} exceed {residual_tol}",
                          residuals=(psi1, psi2))
    return TrustInterval(lo, hi, b, alpha, (psi1, psi2), prior, iters)


def worst_case_payoff(u: UtilityCurve, tau: BeliefDensity, alpha: float,
                      lo: float, hi: float) -> float:
    """Agent's guaranteed payoff from the trust interval ``[lo, hi]``.

    Aligned reports below/above the interval are acted on at the nearest end,
    reports inside at face value; the misaligned adviser with belief below the
    cutoff induces the upper end and above it the lower end.
    """
    alpha = _check_alpha(alpha)
    lo, hi = _check_interval(lo, hi)
    b = curvature_cutoff(u, lo, hi)
    m0, m1 = tau.mass, tau.moment

    def support_line(at, a, c):
        # ∫_a^c (U(at) + U'(at)(mu - at)) dtau
        return (u.value(at) - u.slope(at) * at) * m0(a, c) + u.slope(at) * m1(a, c)

    inside = adaptive_simpson(lambda m: u.value(m) * tau.pdf(m), lo, hi, tol=1e-12) \
        if hi > lo else 0.0
    aligned = support_line(lo, 0.0, lo) + inside + support_line(hi, hi, 1.0)
    misaligned = support_line(hi, 0.0, b) + support_line(lo, b, 1.0)
    return alpha * aligned + (1 - alpha) * misaligned


@dataclass(frozen=True)
class SensitivityReport:
    first: TrustInterval
    second: TrustInterval
    ratio_trend: str
    within_hypothesis: bool
    first_higher: bool
    second_higher: bool
    matches_prediction: bool


def curvature_ratio_trend(u1: UtilityCurve, u2: UtilityCurve, n: int = 201,
                          rtol: float = 1e-12) -> str:
    """``"decreasing"``, ``"increasing"``, ``"constant"`` or ``"non-monotone"`` for
    ``U1''/U2''`` sampled on the open unit interval."""
    grid = np.linspace(0.0, 1.0, n + 2)[1:-1]
    ratio = np.array([u1.curvature(m) / u2.curvature(m) for m in grid])
    d = np.diff(ratio)
    slack = rtol * np.max(np.abs(ratio))
    non_inc = bool(np.all(d <= slack))
    non_dec = bool(np.all(d >= -slack))
    if non_inc and non_dec:
        return "constant"
    if non_inc:
        return "decreasing"
    if non_dec:
        return "increasing"
    return "non-monotone"


def sensitivity_compare(u1: UtilityCurve, u2: UtilityCurve, tau: BeliefDensity,
                        alpha: float, tol: float = 1e-8) -> SensitivityReport:
    """Solve both trust intervals and compare them in the strong set order.

    A decreasing curvature ratio ``U1''/U2''`` predicts that the first interval is
    the higher one; an increasing ratio predicts the reverse. A non-monotone ratio
    is reported as outside the hypothesis, but the comparison is still made.
    """
    t1 = solve_trust_interval(u1, tau, alpha)
    t2 = solve_trust_interval(u2, tau, alpha)
    trend = curvature_ratio_trend(u1, u2)
    first_higher = t1.lo >= t2.lo - tol and t1.hi >= t2.hi - tol
    second_higher = t2.lo >= t1.lo - tol and t2.hi >= t1.hi - tol
    predicted = {"decreasing": first_higher, "increasing": second_higher,
                 "constant": first_higher and second_higher}.get(trend, False)
    return SensitivityReport(t1, t2, trend, trend != "non-monotone",
                             first_higher, second_higher, bool(predicted))
