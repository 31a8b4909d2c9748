import itertools
import json

import numpy as np
import pytest

from trustregion import (FiniteGame, InputError, SaddleSolution, adviser_value, maximin_value,
                         minimax_value, solve_saddle, verify_trs_structure)
from trustregion.game import guaranteed_payoff, no_adviser_value

from instances import LO_075, discretized_binary_game, random_binary_game, three_state_game


def reference_guarantee(game, sigma):
    """Worst-case payoff written out term by term, independently of the library."""
    total = 0.0
    for k in range(game.n_messages):
        def util(j):
            return sum(game.beliefs[k, w] * game.type_likelihood[w, t]
                       * sigma[j, t, a] * game.payoff[a, w, t]
                       for w in range(game.prior.size) for t in range(game.n_types)
                       for a in range(game.n_actions))
        total += game.probs[k] * (game.alpha * util(k)
                                  + (1 - game.alpha) * min(util(j) for j in range(game.n_messages)))
    return total


def tiny_game(alpha):
    pay = np.array([[[1.0], [-1.0]], [[-0.5], [2.0]]])  # action x state x type
    return FiniteGame([0.55, 0.45], [[0.9, 0.1], [0.2, 0.8]], [0.5, 0.5],
                      np.ones((2, 1)), pay, alpha)


@pytest.mark.parametrize("alpha", [0.2, 0.5, 0.6, 0.8, 1.0])
def test_tiny_game_matches_brute_force_grid(alpha):
    game = tiny_game(alpha)
    grid = np.linspace(0.0, 1.0, 101)
    brute = -np.inf
    for s0, s1 in itertools.product(grid, grid):
        sigma = np.array([[[1 - s0, s0]], [[1 - s1, s1]]])
        brute = max(brute, reference_guarantee(game, sigma))
    sol = solve_saddle(game)
    assert sol.value >= brute - 1e-12
    assert sol.value == pytest.approx(brute, abs=1e-9)  # optimum sits on the grid here
    assert reference_guarantee(game, sol.agent_strategy) == pytest.approx(sol.value, abs=1e-10)


@pytest.mark.parametrize("seed", range(8))
def test_lp_duality_on_random_games_with_types(seed):
    rng = np.random.default_rng(seed)
    game = random_binary_game(rng, n_messages=5, n_types=3, n_actions=4,
                              alpha=float(rng.uniform(0.1, 0.95)))
    sol = solve_saddle(game)
    assert maximin_value(game) == pytest.approx(minimax_value(game), abs=1e-8)
    assert max(sol.exploitability) <= 1e-8
    assert guaranteed_payoff(game, sol.agent_strategy) == pytest.approx(sol.value, abs=1e-9)
    assert reference_guarantee(game, sol.agent_strategy) == pytest.approx(sol.value, abs=1e-9)
    assert np.allclose(sol.adversary_strategy.sum(axis=1), 1.0)
    assert np.allclose(sol.agent_strategy.sum(axis=2), 1.0)


def test_value_increases_with_alignment():
    rng = np.random.default_rng(11)
    game = random_binary_game(rng, n_messages=6, n_types=2, n_actions=5)
    values = [solve_saddle(game.with_alpha(a)).value for a in np.linspace(0.0, 1.0, 11)]
    assert np.all(np.diff(values) >= -1e-9)


def test_full_alignment_is_full_information():
    rng = np.random.default_rng(3)
    game = random_binary_game(rng, alpha=1.0)
    c = game.coefficients()
    full_info = float(game.probs @ c.max(axis=2).sum(axis=1))
    assert solve_saddle(game).value == pytest.approx(full_info, abs=1e-9)


@pytest.mark.parametrize("alpha", [0.0, 0.3, 0.5])
def test_binary_advice_is_worthless_below_one_half(alpha):
    game, _ = discretized_binary_game(alpha, 11, 21)
    u_star, u0, v = adviser_value(game)
    assert u0 == pytest.approx(no_adviser_value(game))
    assert v == pytest.approx(0.0, abs=1e-9)


@pytest.fixture(scope="module")
def discretized():
    game, acts = discretized_binary_game(0.75, 21, 101)
    return game, acts, solve_saddle(game)


def test_discretized_game_recovers_continuous_interval(discretized):
    game, acts, sol = discretized
    assert sol.value == pytest.approx(sol.minimax_value, abs=1e-8)
    assert max(sol.exploitability) <= 1e-8
    mean_action = sol.agent_strategy[:, 0, :] @ acts
    cell = 1.0 / 21
    assert abs(mean_action.min() - LO_075) <= cell
    assert abs(mean_action.max() - (1 - LO_075)) <= cell


def test_discretized_game_passes_structure_check(discretized):
    game, _, sol = discretized
    report = verify_trs_structure(game, sol)
    assert report.passed
    assert report.worst_margin <= 1e-7
    lo, hi = report.trust_bounds
    assert lo < 0.5 < hi


def test_structure_check_catches_a_bad_strategy(discretized):
    game, _, sol = discretized
    flipped = sol.agent_strategy[:, :, ::-1].copy()
    bad = SaddleSolution(sol.value, flipped, sol.adversary_strategy, sol.induced_posteriors,
                         sol.exploitability, sol.minimax_value, sol.off_path)
    assert not verify_trs_structure(game, bad).passed


def test_three_state_threshold_brackets_one_third():
    assert adviser_value(three_state_game(0.33))[2] == pytest.approx(0.0, abs=1e-9)
    assert adviser_value(three_state_game(0.34))[2] > 1e-6


def test_off_path_messages_get_prior_optimal_play():
    # with no aligned adviser every report can be pooled on one message
    pay = np.array([[[1.0], [0.0]], [[0.0], [1.0]]])
    game = FiniteGame([0.5, 0.5], [[0.9, 0.1], [0.3, 0.7]], [1 / 3, 2 / 3],
                      np.ones((2, 1)), pay, 0.0)
    sol = solve_saddle(game)
    assert sol.value == pytest.approx(no_adviser_value(game), abs=1e-9)
    assert sol.off_path
    for k in sol.off_path:
        assert np.all(np.isnan(sol.induced_posteriors[k]))
        assert sol.agent_strategy[k, 0, 0] == 1.0  # both actions tie at the prior


def test_game_and_solution_json_round_trip(tmp_path):
    game = tiny_game(0.7)
    path = tmp_path / "game.json"
    game.save(path)
    assert FiniteGame.load(path) == game
    sol = solve_saddle(game)
    assert SaddleSolution.from_dict(json.loads(json.dumps(sol.to_dict()))) == sol


@pytest.mark.parametrize("mutate, message", [
    (lambda d: d.update(prior=[0.5, 0.6]), "prior"),
    (lambda d: d["messages"][0].update(prob=0.9), "probabilities"),
    (lambda d: d["messages"][0].update(belief=[0.5, 0.5]), "Bayes"),
    (lambda d: d.update(alpha=1.5), "alpha"),
    (lambda d: d.update(axis_order=["omega", "a", "theta"]), "axis_order"),
    (lambda d: d.pop("actions"), "malformed"),
])
def test_malformed_games_are_rejected(mutate, message):
    d = tiny_game(0.5).to_dict()
    mutate(d)
    with pytest.raises(InputError, match=message):
        FiniteGame.from_dict(d)
