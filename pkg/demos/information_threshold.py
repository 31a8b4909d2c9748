# When is an adviser worth listening to at all?  For a finite signal structure the
# answer is a single number: the smallest alignment probability at which the
# misaligned adviser can no longer garble every message into noise.

import numpy as np

from trustregion import FiniteGame, adviser_value, construct_target_mva, solve_mva

print("identity 3x3  ", solve_mva(np.eye(3)).alpha_star)
print("noisy 2x2     ", solve_mva([[0.8, 0.2], [0.3, 0.7]]).alpha_star)

for delta in (0.0, 0.25, 0.5, 1.0):
    pi = construct_target_mva(3, 4, delta)
    print(f"constructed delta={delta:<4}  mva={solve_mva(pi).alpha_star:.9f}  target={1 / (2 + delta):.9f}")

sol = solve_mva(np.eye(3))
print("garbling G\n", sol.garbling.round(6))
print("adversary B = (G - a I) / (1 - a)\n", sol.adversary.round(6))

rng = np.random.default_rng(0)
stars = [solve_mva(rng.dirichlet(np.ones(4), size=3)).alpha_star for _ in range(200)]
print("random 3x4 matrices: min", min(stars), "max", max(stars))

# the same threshold shows up in a game: three states, three posteriors, quadratic score
# played on a finite action grid
grid = np.array([(i, j, 31 - i - j) for i in range(32) for j in range(32 - i)]) / 31
beliefs = np.array([[0.6, 0.2, 0.2], [0.2, 0.6, 0.2], [0.2, 0.2, 0.6]])
pay = np.stack([-np.sum((grid - np.eye(3)[w]) ** 2, axis=1) for w in range(3)], axis=1)[:, :, None]
game = FiniteGame(np.ones(3) / 3, beliefs, np.ones(3) / 3, np.ones((3, 1)), pay, 0.3)
for a in (0.30, 0.32, 0.33, 0.34, 0.36, 0.40, 0.50):
    u_star, u0, v = adviser_value(game.with_alpha(a))
    print(f"alpha={a:.2f}  value of advice {v:.3e}")
