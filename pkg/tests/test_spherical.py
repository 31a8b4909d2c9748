import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from trustregion import (BeliefDensity, InputError, RadialUtility, SphericalInstance,
                         antipodal_report, solve_radius, uniform_radius)
from trustregion.spherical import balance_residual, diameter_posterior, simulate_radius

CENTER = np.array([1 / 3, 1 / 3, 1 / 3])


@pytest.fixture(scope="module")
def ball():
    return SphericalInstance.uniform(CENTER, 0.2)


def closed_form(alpha, r0):
    return (1 - math.sqrt(1 + alpha - 2 * alpha ** 2)) / alpha * r0


@pytest.mark.parametrize("alpha", np.linspace(0.51, 0.99, 9))
def test_uniform_radial_density_matches_closed_form(ball, alpha):
    assert solve_radius(ball, alpha) == pytest.approx(closed_form(alpha, 0.2), abs=1e-12)
    assert uniform_radius(alpha, 0.2) == pytest.approx(closed_form(alpha, 0.2), abs=1e-15)


def test_endpoints(ball):
    assert solve_radius(ball, 0.5) == 0.0
    assert solve_radius(ball, 0.3) == 0.0
    assert solve_radius(ball, 1.0) == ball.r0
    assert uniform_radius(1.0, 0.2) == pytest.approx(0.2, abs=1e-15)


def test_radius_grows_with_alignment(ball):
    radii = [solve_radius(ball, a) for a in np.linspace(0.55, 1.0, 10)]
    assert np.all(np.diff(radii) > 0)


def test_residual_changes_sign_at_the_radius(ball):
    r = solve_radius(ball, 0.8)
    assert balance_residual(ball, 0.8, r - 1e-4) > 0 > balance_residual(ball, 0.8, r + 1e-4)


@pytest.mark.parametrize("alpha", [0.6, 0.75, 0.9])
def test_radius_does_not_depend_on_the_radial_utility(ball, alpha):
    utilities = [RadialUtility.power(CENTER, 2.0), RadialUtility.power(CENTER, 4.0),
                 RadialUtility.cosh(CENTER, 3.0)]
    radii = [simulate_radius(ball, u, alpha) for u in utilities]
    assert max(radii) - min(radii) <= 1e-10
    assert radii[0] == pytest.approx(solve_radius(ball, alpha), abs=1e-10)


def test_nonuniform_radial_density_simulation_agrees():
    inst = SphericalInstance(CENTER, 0.2, BeliefDensity.radial([0.0, 0.2], [3.0, 1.0]))
    r = solve_radius(inst, 0.8)
    assert simulate_radius(inst, RadialUtility.power(CENTER, 3.0), 0.8) == pytest.approx(r, abs=1e-10)
    # mass concentrated near the centre shrinks the ball relative to uniform
    assert r < uniform_radius(0.8, 0.2)


def test_pooled_posterior_sits_on_the_boundary(ball):
    u = RadialUtility.power(CENTER, 2.0)
    r = solve_radius(ball, 0.75)
    assert diameter_posterior(ball, u, 0.75, r) == pytest.approx(r, abs=1e-10)


@given(st.floats(0.0, 2 * math.pi))
@settings(max_examples=30, deadline=None)
def test_antipodal_report_is_bregman_farthest(theta):
    u = RadialUtility.power(CENTER, 2.0)
    e1 = np.array([1.0, -1.0, 0.0]) / math.sqrt(2)
    e2 = np.array([1.0, 1.0, -2.0]) / math.sqrt(6)
    mu = CENTER + 0.15 * (math.cos(theta) * e1 + math.sin(theta) * e2)
    report = antipodal_report(SphericalInstance.uniform(CENTER, 0.2), 0.1, mu)
    assert np.linalg.norm(report - CENTER) == pytest.approx(0.1)

    def d(x):
        return u.value(mu) - u.value(x) - float(u.gradient(x) @ (mu - x))

    far = d(report)
    for phi in np.linspace(0.0, 2 * math.pi, 37):
        other = CENTER + 0.1 * (math.cos(phi) * e1 + math.sin(phi) * e2)
        assert d(other) <= far + 1e-12


def test_antipodal_report_edge_cases(ball):
    assert np.array_equal(antipodal_report(ball, 0.0, [0.5, 0.25, 0.25]), CENTER)
    with pytest.raises(InputError):
        antipodal_report(ball, 0.1, CENTER)
    with pytest.raises(InputError):
        antipodal_report(ball, 0.3, [0.5, 0.25, 0.25])


def test_ball_must_fit_inside_the_simplex():
    with pytest.raises(InputError):
        SphericalInstance.uniform(CENTER, 0.5)
    with pytest.raises(InputError):
        SphericalInstance(CENTER, 0.2, BeliefDensity.uniform())


def test_instance_json_round_trip(ball):
    assert SphericalInstance.from_dict(json.loads(json.dumps(ball.to_dict()))) == ball
