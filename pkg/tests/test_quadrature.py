import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from trustregion.errors import InputError, SolverError
from trustregion.quadrature import PiecewiseLinear, adaptive_simpson, bisect_root


def test_simpson_matches_closed_forms():
    assert adaptive_simpson(math.sin, 0.0, math.pi) == pytest.approx(2.0, abs=1e-10)
    assert adaptive_simpson(math.exp, 0.0, 1.0) == pytest.approx(math.e - 1, abs=1e-10)
    assert adaptive_simpson(lambda x: x ** 3, 0.0, 2.0) == pytest.approx(4.0, abs=1e-14)


def test_simpson_orientation_and_empty_range():
    assert adaptive_simpson(math.exp, 1.0, 0.0) == pytest.approx(-(math.e - 1), abs=1e-10)
    assert adaptive_simpson(math.exp, 0.3, 0.3) == 0.0


def test_simpson_handles_a_kink():
    val = adaptive_simpson(lambda x: abs(x - 0.3), 0.0, 1.0, tol=1e-12)
    assert val == pytest.approx(0.3 ** 2 / 2 + 0.7 ** 2 / 2, abs=1e-9)


def test_bisect_root_finds_sqrt2():
    assert bisect_root(lambda x: x * x - 2, 0.0, 2.0) == pytest.approx(math.sqrt(2), abs=1e-13)


def test_bisect_root_returns_endpoint_roots():
    assert bisect_root(lambda x: x, 0.0, 1.0) == 0.0
    assert bisect_root(lambda x: x - 1, 0.0, 1.0) == 1.0


def test_bisect_root_rejects_a_bad_bracket():
    with pytest.raises(SolverError) as info:
        bisect_root(lambda x: x * x + 1, -1.0, 1.0)
    assert info.value.residuals == (2.0, 2.0)


def test_piecewise_linear_validation():
    with pytest.raises(InputError):
        PiecewiseLinear([0.0, 0.0, 1.0], [1.0, 1.0, 1.0])
    with pytest.raises(InputError):
        PiecewiseLinear([0.0], [1.0])
    with pytest.raises(InputError):
        PiecewiseLinear([0.0, 1.0], [1.0, float("nan")])


def test_piecewise_linear_is_zero_outside_support():
    f = PiecewiseLinear([0.0, 1.0], [1.0, 3.0])
    assert f(0.5) == 2.0
    assert f(-0.1) == 0.0 and f(1.1) == 0.0
    np.testing.assert_allclose(f(np.array([0.0, 0.25, 2.0])), [1.0, 1.5, 0.0])


@settings(max_examples=60, deadline=None)
@given(values=st.lists(st.floats(0.0, 5.0), min_size=3, max_size=8),
       a=st.floats(0.0, 1.0), b=st.floats(0.0, 1.0))
def test_piecewise_linear_moments_match_adaptive_quadrature(values, a, b):
    knots = np.linspace(0.0, 1.0, len(values))
    f = PiecewiseLinear(knots, values)
    lo, hi = min(a, b), max(a, b)
    pts = [k for k in knots if lo < k < hi]
    ref0 = integrate.quad(f, lo, hi, points=pts or None, epsabs=1e-13)[0]
    ref1 = integrate.quad(lambda t: t * f(t), lo, hi, points=pts or None, epsabs=1e-13)[0]
    assert f.integral(lo, hi) == pytest.approx(ref0, abs=1e-11)
    assert f.moment(lo, hi) == pytest.approx(ref1, abs=1e-11)


def test_piecewise_linear_is_vectorized():
    f = PiecewiseLinear([0.0, 0.5, 1.0], [1.0, 2.0, 1.0])
    a = np.array([0.0, 0.25, 0.5])
    b = np.array([0.5, 0.75, 1.0])
    np.testing.assert_allclose(f.integral(a, b), [f.integral(x, y) for x, y in zip(a, b)])
    assert f.total() == pytest.approx(1.5)
