"""Numerical primitives: adaptive Simpson quadrature, bracketing bisection and
exactly-integrable piecewise-linear functions."""

from __future__ import annotations

from typing import Callable

import numpy as np

from .errors import InputError, SolverError

SIMPSON_TOL = 1e-10


def adaptive_simpson(f: Callable[[float], float], a: float, b: float,
                     tol: float = SIMPSON_TOL, max_depth: int = 48) -> float:
    """Integrate ``f`` over ``[a, b]`` by adaptive composite Simpson.

    Each panel is split until the two-half estimate agrees with the whole-panel
    estimate to ``15 * tol`` (the classical Lyness criterion); the accepted value
    carries the Richardson correction.
    """
    if a == b:
        return 0.0
    if b < a:
        return -adaptive_simpson(f, b, a, tol, max_depth)
    fa, fm, fb = f(a), f(0.5 * (a + b)), f(b)
    whole = (b - a) * (fa + 4.0 * fm + fb) / 6.0
    return _simpson_panel(f, a, b, fa, fm, fb, whole, tol, max_depth)


def _simpson_panel(f, a, b, fa, fm, fb, whole, tol, depth):
    m = 0.5 * (a + b)
    lm, rm = 0.5 * (a + m), 0.5 * (m + b)
    flm, frm = f(lm), f(rm)
    left = (m - a) * (fa + 4.0 * flm + fm) / 6.0
    right = (b - m) * (fm + 4.0 * frm + fb) / 6.0
    delta = left + right - whole
    if depth <= 0 or abs(delta) <= 15.0 * tol:
        return left + right + delta / 15.0
    return (_simpson_panel(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + _simpson_panel(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1))


def bisect_root(f: Callable[[float], float], lo: float, hi: float,
                xtol: float = 1e-14, max_iter: int = 200) -> float:
    """Root of a continuous ``f`` on ``[lo, hi]`` with ``f(lo)`` and ``f(hi)`` of
    opposite (or zero) sign. Returns an endpoint when ``f`` vanishes there."""
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise SolverError(
            f"bisection bracket [{lo}, {hi}] does not straddle a root "
            f"(f = {flo:.3e}, {fhi:.3e})", residuals=(flo, fhi))
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if hi - lo <= xtol or mid in (lo, hi):
            return mid
        fm = f(mid)
        if fm == 0.0:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


class PiecewiseLinear:
    """Nonnegative-or-not piecewise-linear function on ``[knots[0], knots[-1]]``,
    zero outside. Zeroth and first moments over any sub-interval are exact."""

    def __init__(self, knots, values):
        x = np.asarray(knots, dtype=float)
        y = np.asarray(values, dtype=float)
        if x.ndim != 1 or x.shape != y.shape or x.size < 2:
            raise InputError("knots and values must be 1-d arrays of equal length >= 2")
        if not np.all(np.diff(x) > 0):
            raise InputError("knots must be strictly increasing")
        if not np.all(np.isfinite(y)):
            raise InputError("values must be finite")
        self.knots = x
        self.values = y
        self._slope = np.diff(y) / np.diff(x)
        h = np.diff(x)
        cell0 = y[:-1] * h + self._slope * h ** 2 / 2
        cell1 = x[:-1] * y[:-1] * h + (x[:-1] * self._slope + y[:-1]) * h ** 2 / 2 \
            + self._slope * h ** 3 / 3
        self._c0 = np.concatenate([[0.0], np.cumsum(cell0)])
        self._c1 = np.concatenate([[0.0], np.cumsum(cell1)])

    @property
    def lower(self) -> float:
        return float(self.knots[0])

    @property
    def upper(self) -> float:
        return float(self.knots[-1])

    def __call__(self, t):
        t_arr = np.asarray(t, dtype=float)
        out = np.interp(t_arr, self.knots, self.values)
        out = np.where((t_arr < self.knots[0]) | (t_arr > self.knots[-1]), 0.0, out)
        return float(out) if np.ndim(out) == 0 else out

    def _cumulative(self, t):
        t = np.clip(np.asarray(t, dtype=float), self.knots[0], self.knots[-1])
        i = np.clip(np.searchsorted(self.knots, t, side="right") - 1, 0, self.knots.size - 2)
        xi, yi, k = self.knots[i], self.values[i], self._slope[i]
        d = t - xi
        f0 = self._c0[i] + yi * d + k * d ** 2 / 2
        f1 = self._c1[i] + xi * yi * d + (xi * k + yi) * d ** 2 / 2 + k * d ** 3 / 3
        return f0, f1

    def integral(self, a, b):
        """``∫_a^b f`` (vectorized over ``a``/``b``)."""
        f0b, _ = self._cumulative(b)
        f0a, _ = self._cumulative(a)
        out = f0b - f0a
        return float(out) if np.ndim(out) == 0 else out

    def moment(self, a, b):
        """``∫_a^b t f(t) dt`` (vectorized over ``a``/``b``)."""
        _, f1b = self._cumulative(b)
        _, f1a = self._cumulative(a)
        out = f1b - f1a
        return float(out) if np.ndim(out) == 0 else out

    def total(self) -> float:
        return float(self._c0[-1])

    def __eq__(self, other):
        if not isinstance(other, PiecewiseLinear):
            return NotImplemented
        return (self.knots.shape == other.knots.shape
                and np.array_equal(self.knots, other.knots)
                and np.array_equal(self.values, other.values))

    def __repr__(self):
        return f"PiecewiseLinear(n_knots={self.knots.size}, support=[{self.lower}, {self.upper}])"

