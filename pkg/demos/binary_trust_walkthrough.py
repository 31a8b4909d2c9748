# Binary state, quadratic loss, uniform prior density over the aligned adviser's belief.
# How much of the adviser's report should the agent take at face value?

import math

import numpy as np

from trustregion import (BeliefDensity, TransportMap, UtilityCurve, build_tre_map,
                         solve_trust_interval, verify_posterior_consistency, worst_case_payoff)

u = UtilityCurve.quadratic_loss()
tau = BeliefDensity.uniform()

t = solve_trust_interval(u, tau, 0.75)
print("alpha = 0.75 ->", t.lo, t.hi, "cutoff", t.cutoff, "iterations", t.iterations)
print("closed form     ", (math.sqrt(10) - 1) / 6, (7 - math.sqrt(10)) / 6)

# the interval widens as the adviser becomes more likely to be aligned
for a in np.linspace(0.5, 1.0, 11):
    s = solve_trust_interval(u, tau, a)
    print(f"{a:.2f}  [{s.lo:.6f}, {s.hi:.6f}]  guaranteed {worst_case_payoff(u, tau, a, s.lo, s.hi):+.6f}")

# the adversary strategy that makes the interval an equilibrium
tmap = build_tre_map(u, tau, 0.75, t)
for mu in (0.0, 0.25, 0.49, 0.5, 0.75, 1.0):
    print(f"misaligned belief {mu:.2f} reports {tmap(mu):.6f}")

rep = verify_posterior_consistency(tmap, tau, 0.75, t)
print("max posterior deviation", rep.max_deviation, "over", rep.n_checked, "cells")

# send everything to 1: posteriors no longer land where the agent acts
naive = TransportMap.send_all_to(tau, 0.75, t, 1.0)
print("constant report deviation", verify_posterior_consistency(naive, tau, 0.75, t).max_deviation)

# a skewed density and the log score: no closed form, same machinery
skew = BeliefDensity.from_grid([0.0, 1.0], [2.0, 1.0])
s = solve_trust_interval(UtilityCurve.log_score(), skew, 0.8)
print("log score, skewed prior", skew.prior, "->", s.lo, s.hi, "residuals", s.residuals)
