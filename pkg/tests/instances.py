"""Reusable problem instances and independent reference values for the tests."""

import math

import numpy as np

from trustregion.game import FiniteGame


def quadratic_root(a, b, c):
    """Positive root of ``a x^2 + b x + c``, straight from the quadratic formula."""
    return (-b + math.sqrt(b * b - 4 * a * c)) / (2 * a)


# symmetric quadratic-loss, uniform-density trust intervals
LO_075 = quadratic_root(12.0, 4.0, -3.0)
LO_090 = quadratic_root(3.6, 0.4, -0.3)


def discretized_binary_game(alpha, n_messages=21, n_actions=101):
    """Quadratic-loss binary game with messages at the cell midpoints of a
    uniform density and an evenly spaced action grid."""
    mu = (np.arange(n_messages) + 0.5) / n_messages
    beliefs = np.column_stack([1 - mu, mu])
    acts = np.linspace(0.0, 1.0, n_actions)
    pay = np.zeros((n_actions, 2, 1))
    pay[:, 0, 0] = -acts ** 2
    pay[:, 1, 0] = -(acts - 1) ** 2
    game = FiniteGame([0.5, 0.5], beliefs, np.full(n_messages, 1.0 / n_messages),
                      np.ones((2, 1)), pay, alpha)
    return game, acts


def simplex_grid(n):
    return np.array([(i, j, n - i - j) for i in range(n + 1) for j in range(n + 1 - i)]) / n


def three_state_game(alpha, resolution=31):
    """Full-rank three-posterior game under the quadratic score; the action grid's
    resolution is not divisible by three so the prior sits at a kink of the
    induced utility."""
    acts = simplex_grid(resolution)
    beliefs = np.array([[0.6, 0.2, 0.2], [0.2, 0.6, 0.2], [0.2, 0.2, 0.6]])
    pay = np.zeros((len(acts), 3, 1))
    for w in range(3):
        pay[:, w, 0] = -np.sum((acts - np.eye(3)[w]) ** 2, axis=1)
    return FiniteGame(np.ones(3) / 3, beliefs, np.ones(3) / 3, np.ones((3, 1)), pay, alpha)


def random_binary_game(rng, n_messages=5, n_types=2, n_actions=4, alpha=0.7):
    """Random binary-state game with private types; message beliefs are drawn and
    the prior is their average, so Bayes plausibility holds by construction."""
    mu = rng.uniform(0.05, 0.95, n_messages)
    probs = rng.dirichlet(np.ones(n_messages))
    prior1 = float(probs @ mu)
    f = rng.dirichlet(np.ones(n_types), size=2)
    pay = rng.normal(size=(n_actions, 2, n_types))
    return FiniteGame([1 - prior1, prior1], np.column_stack([1 - mu, mu]), probs, f, pay, alpha)


def tiny_binary_game_dict(alpha=0.7):
    """Two messages, two actions, one type, in the documented JSON layout."""
    return {"states": ["L", "R"], "prior": [0.55, 0.45],
            "messages": [{"belief": [0.9, 0.1], "prob": 0.5},
                         {"belief": [0.2, 0.8], "prob": 0.5}],
            "types": ["t"], "type_likelihood": [[1.0], [1.0]],
            "actions": ["left", "right"], "axis_order": ["a", "omega", "theta"],
            "payoff": [1.0, -1.0, -0.5, 2.0], "alpha": alpha}
