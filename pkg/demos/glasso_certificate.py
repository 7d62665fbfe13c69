"""Graphical lasso with a penalized diagonal, and how to check an answer."""

import numpy as np

from matlda.glasso import glasso_objective, glasso_solve, kkt_residual

rng = np.random.default_rng(0)

print("A 6 x 6 sample covariance from only 4 observations, so it is singular:")
Z = rng.standard_normal((4, 6))
S = Z.T @ Z / 4
print("rank(S) =", np.linalg.matrix_rank(S))

print("\nWith tau = 0 there is no solution; any tau > 0 makes the problem well posed.")
for tau in (0.05, 0.2, 0.8):
    sol = glasso_solve(S, tau)
    off = sol.theta[~np.eye(6, dtype=bool)]
    print(f"tau = {tau:4}: objective {glasso_objective(sol.theta, S, tau):9.4f}, "
          f"zero off-diagonals {np.sum(off == 0):2d}/30, sweeps {sol.iterations}, "
          f"KKT residual {sol.kkt_residual:.1e}")

print("\nThe KKT residual is recomputed from theta alone, so it certifies any candidate.")
print("A perturbed solution fails the check:")
theta = glasso_solve(S, 0.2).theta
print("  residual of theta + 0.01 I =", f"{kkt_residual(theta + 0.01 * np.eye(6), S, 0.2):.3g}")

print("\nOnce tau exceeds every |S_ab| off the diagonal the answer is diagonal,")
print("with entries 1 / (S_aa + tau):")
tau = np.abs(S[~np.eye(6, dtype=bool)]).max()
theta = glasso_solve(S, tau).theta
print(np.round(np.diag(theta), 4))
print(np.round(1 / (np.diag(S) + tau), 4))
