# Two special cases with closed forms.
#
# With two actions the agent either trusts the adviser completely or ignores them.
# With a radially symmetric utility the trust region is a ball whose radius does not
# depend on the utility at all.

import numpy as np

from trustregion import (RadialUtility, RelativePayoffDist, SphericalInstance,
                         rationalizing_adversary, solve_binary_action, solve_radius,
                         uniform_radius)
from trustregion.spherical import simulate_radius

dist = RelativePayoffDist.from_atoms([-1.0, 2.0], [0.5, 0.5])
print("L", dist.loss, "G", dist.gain)
for a in (0.4, 0.6, 2 / 3, 0.7, 0.9):
    s = solve_binary_action(dist, a)
    print(f"alpha={a:.3f}  {s.regime:13s}  value={s.value:.4f}  threshold={s.alpha_hat:.4f}")

adv = rationalizing_adversary(dist, 0.6)
print("no-trust kernel, gamma =", adv.gamma)
print(adv.kernels["no-trust"])
print("posterior payoffs", adv.posterior_payoffs("no-trust"), "certified", adv.certify("no-trust"))

center = np.ones(3) / 3
ball = SphericalInstance.uniform(center, 0.2)
square, cosh = RadialUtility.power(center, 2.0), RadialUtility.cosh(center, 3.0)
for a in (0.55, 0.7, 0.85, 1.0):
    print(f"alpha={a:.2f}  r*={solve_radius(ball, a):.10f}  closed={uniform_radius(a, 0.2):.10f}"
          f"  simulated {simulate_radius(ball, square, a):.10f} / {simulate_radius(ball, cosh, a):.10f}")
