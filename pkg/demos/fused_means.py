"""Fusing class means with the accelerated alternating minimization solver."""

import warnings

import numpy as np

from matlda.bcd import fuse_means
from matlda.meansolver import (AccelConfig, MeanProblem, compute_weights, pairwise_differences,
                               solve_mean_subproblem)

rng = np.random.default_rng(3)
J, r, c = 3, 3, 3
xbar = rng.standard_normal((J, r, c))
xbar[1] = xbar[0] + 0.05 * rng.standard_normal((r, c))    # classes 1 and 2 nearly agree
pi = np.array([0.3, 0.3, 0.4])
phi, delta = np.eye(r), np.eye(c)
weights = compute_weights(xbar)

print("Adaptive weights are 1 / |xbar_j - xbar_m|, so close means get large weights.")
print("median weight, pair (1,2):", np.round(np.median(weights[0]), 1),
      " pair (1,3):", np.round(np.median(weights[1]), 1))

print("\nNumber of fused entries (out of 27 per pair) as lambda1 grows:")
for lam in (0.0, 0.01, 0.05, 0.2, 1.0):
    prob = MeanProblem(xbar, pi, phi, delta, lam, weights)
    res = solve_mean_subproblem(prob, accel=AccelConfig(tol=1e-9))
    mu = fuse_means(res.mu, pi, 1e-6)
    fused = (pairwise_differences(mu) == 0).reshape(3, -1).sum(axis=1)
    print(f"lambda1 = {lam:5}: pairs (1,2) (1,3) (2,3) fused {fused}, "
          f"{res.iterations:4d} iterations, status {res.status}")

print("\nThe step size is a tenth of the bound min(pi) * 4 * eigmin(phi) * eigmin(delta) / J.")
prob = MeanProblem(xbar, pi, phi, delta, 0.05, weights)
print("rho =", prob.step_size())
print("With rho 1000 times larger the iteration no longer settles:")
with warnings.catch_warnings():
    warnings.simplefilter("ignore")
    res = solve_mean_subproblem(prob, rho=1000 * prob.step_size(), accel=AccelConfig(max_iter=2000))
print("status:", res.status, " primal residual:", f"{res.primal_residual:.3g}")
