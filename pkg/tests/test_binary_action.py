import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from trustregion import (BinaryActionSolution, GenericityError, InputError, RelativePayoffDist,
                         rationalizing_adversary, solve_binary_action, solve_saddle)
from trustregion.binary_action import policy_value, threshold, to_finite_game


@pytest.fixture
def two_atoms():
    return RelativePayoffDist.from_atoms([-1.0, 2.0], [0.5, 0.5])


def test_threshold_for_two_atoms(two_atoms):
    assert two_atoms.loss == 0.5 and two_atoms.gain == 1.0
    sol = solve_binary_action(two_atoms, 0.5)
    assert sol.alpha_hat == pytest.approx(2 / 3, abs=1e-12)


def test_density_losses_and_gains():
    dist = RelativePayoffDist.from_density([-1.0, 2.0], [1.0, 1.0])
    assert dist.loss == pytest.approx(1 / 6, abs=1e-14)
    assert dist.gain == pytest.approx(2 / 3, abs=1e-14)
    assert solve_binary_action(dist, 0.5).alpha_hat == pytest.approx(0.8, abs=1e-12)


@pytest.mark.parametrize("alpha, regime", [(0.5, "no-trust"), (2 / 3, "boundary-both"),
                                           (0.9, "full-trust")])
def test_regimes_switch_at_threshold(two_atoms, alpha, regime):
    sol = solve_binary_action(two_atoms, alpha)
    assert sol.regime == regime
    if regime == "no-trust":
        assert sol.sigma_low == sol.sigma_high == 1.0  # G > L: always action 2
    else:
        assert (sol.sigma_low, sol.sigma_high) == (0.0, 1.0)


def test_value_curve_kinks_at_threshold(two_atoms):
    # value is G - L = 0.5 left of the kink and 1.5 alpha - 0.5 right of it;
    # locate the kink from the two ends of a sampled curve
    alphas = np.linspace(0.0, 1.0, 1001)
    vals = np.array([solve_binary_action(two_atoms, a).value for a in alphas])
    left = np.polyfit(alphas[:100], vals[:100], 1)
    right = np.polyfit(alphas[-100:], vals[-100:], 1)
    kink = (left[1] - right[1]) / (right[0] - left[0])
    assert kink == pytest.approx(2 / 3, abs=1e-6)


def _worst_case(L, G, alpha, s, t):
    # aligned types report truthfully; a misaligned loser (v < 0) sends whichever
    # report makes action 2 likelier and a misaligned winner the other one
    return alpha * (t * G - s * L) + (1 - alpha) * (min(s, t) * G - max(s, t) * L)


@given(st.floats(0.0, 1.0), st.floats(0.05, 5.0), st.floats(0.05, 5.0))
@settings(max_examples=60, deadline=None)
def test_value_is_best_of_brute_force_policies(alpha, loss_atom, gain_atom):
    dist = RelativePayoffDist.from_atoms([-loss_atom, gain_atom], [0.5, 0.5])
    sol = solve_binary_action(dist, alpha)
    L, G = dist.loss, dist.gain
    grid = np.linspace(0.0, 1.0, 21)
    brute = max(_worst_case(L, G, alpha, s, t) for s in grid for t in grid)
    assert sol.value == pytest.approx(brute, abs=1e-12)
    assert sol.value == pytest.approx(
        _worst_case(L, G, alpha, sol.sigma_low, sol.sigma_high), abs=1e-12)
    if sol.regime != "no-trust":
        assert sol.value == pytest.approx(policy_value(L, G, alpha, 0.0, 1.0), abs=1e-12)


def test_equal_loss_and_gain_is_allowed():
    sol = solve_binary_action(RelativePayoffDist.from_atoms([-1.0, 1.0], [0.5, 0.5]), 0.4)
    assert sol.alpha_hat == 0.5 and sol.regime == "no-trust"
    assert sol.no_trust_action == 1 and sol.value == 0.0


@pytest.mark.parametrize("points, probs", [([1.0, 2.0], [0.5, 0.5]), ([-1.0, -2.0], [0.5, 0.5]),
                                           ([-1.0, 0.0, 1.0], [0.25, 0.5, 0.25])])
def test_nongeneric_distributions_are_rejected(points, probs):
    with pytest.raises(GenericityError):
        solve_binary_action(RelativePayoffDist.from_atoms(points, probs), 0.7)


def test_malformed_distributions_are_rejected():
    with pytest.raises(InputError):
        RelativePayoffDist.from_atoms([-1.0, 1.0], [0.7, 0.7])
    with pytest.raises(InputError):
        solve_binary_action(RelativePayoffDist.from_atoms([-1.0, 1.0], [0.5, 0.5]), 1.2)


@pytest.mark.parametrize("alpha", [0.3, 0.55, 2 / 3, 0.8, 0.99])
def test_rationalizing_kernels_certify_the_policy(two_atoms, alpha):
    adv = rationalizing_adversary(two_atoms, alpha)
    assert adv.kernels
    for name, k in adv.kernels.items():
        assert np.allclose(k.sum(axis=1), 1.0)
        assert adv.certify(name)


def test_no_trust_kernel_makes_unfavourable_reports_indifferent(two_atoms):
    adv = rationalizing_adversary(two_atoms, 0.55)
    assert adv.gamma == pytest.approx(0.55 * 0.5 / (0.45 * 1.0), abs=1e-15)
    pay = adv.posterior_payoffs("no-trust")
    assert pay[0] == pytest.approx(0.0, abs=1e-14)


def test_weaker_imitation_breaks_certification(two_atoms):
    adv = rationalizing_adversary(two_atoms, 0.55)
    weak = dict(adv.kernels)
    weak["no-trust"] = np.array([[1.0, 0.0], [0.5 * adv.gamma, 1 - 0.5 * adv.gamma]])
    broken = type(adv)(adv.points, adv.probs, adv.alpha, adv.regime, weak, adv.gamma,
                       adv.no_trust_action)
    assert not broken.certify("no-trust")


def test_mirror_case_when_losses_dominate():
    dist = RelativePayoffDist.from_atoms([-2.0, 1.0], [0.5, 0.5])
    adv = rationalizing_adversary(dist, 0.6)
    assert adv.no_trust_action == 1
    assert adv.certify("no-trust")


@pytest.mark.parametrize("seed", range(10))
def test_matches_finite_game_oracle(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 6))
    v = rng.normal(size=n)
    v[0], v[1] = -abs(v[0]) - 0.1, abs(v[1]) + 0.1
    dist = RelativePayoffDist.from_atoms(v, rng.dirichlet(np.ones(n)))
    alpha = float(rng.uniform(0.05, 0.95))
    sol = solve_binary_action(dist, alpha)
    oracle = solve_saddle(to_finite_game(dist, alpha))
    assert oracle.value == pytest.approx(sol.value, abs=1e-8)


def test_density_discretization_keeps_signs():
    dist = RelativePayoffDist.from_density([-1.0, 0.5, 2.0], [1.0, 2.0, 0.5])
    atoms = dist.to_atoms(n_cells=50)
    assert atoms.probs.sum() == pytest.approx(1.0)
    assert atoms.loss == pytest.approx(dist.loss, rel=1e-12)
    assert atoms.gain == pytest.approx(dist.gain, rel=1e-12)


def test_threshold_is_symmetric():
    assert threshold(1.0, 3.0) == threshold(3.0, 1.0) == 0.75


def test_json_round_trips(two_atoms):
    assert RelativePayoffDist.from_dict(json.loads(json.dumps(two_atoms.to_dict()))) == two_atoms
    sol = solve_binary_action(two_atoms, 0.8)
    assert BinaryActionSolution.from_dict(json.loads(json.dumps(sol.to_dict()))) == sol
