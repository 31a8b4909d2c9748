# The exact finite-game solver, run on a discretized version of the quadratic-loss,
# uniform-prior problem. The agent's mean action after each message should follow the
# clamp onto the continuous trust interval.

import math

import numpy as np

from trustregion import FiniteGame, solve_saddle, verify_trs_structure

n_msg, n_act, alpha = 21, 101, 0.75
mu = (np.arange(n_msg) + 0.5) / n_msg
acts = np.linspace(0, 1, n_act)
pay = np.zeros((n_act, 2, 1))
pay[:, 0, 0] = -acts ** 2
pay[:, 1, 0] = -(acts - 1) ** 2
game = FiniteGame([0.5, 0.5], np.column_stack([1 - mu, mu]), np.full(n_msg, 1 / n_msg),
                  np.ones((2, 1)), pay, alpha)

sol = solve_saddle(game)
print("maximin", sol.value, "minimax", sol.minimax_value)
print("exploitability", sol.exploitability)

lo = (math.sqrt(10) - 1) / 6
mean_action = sol.agent_strategy[:, 0, :] @ acts
for m, a, p in zip(mu, mean_action, sol.induced_posteriors[:, 1]):
    print(f"message {m:.3f}  action {a:.3f}  posterior {p:.3f}  clamp {min(max(m, lo), 1 - lo):.3f}")

report = verify_trs_structure(game, sol)
print("structure check passed:", report.passed, "trusted messages span", report.trust_bounds)
