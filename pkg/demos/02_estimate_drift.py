"""Least-squares drift estimation on one long path.

Generates a single trajectory, computes the path functionals, and recovers
the four drift coefficients.  The estimate sharpens as the horizon grows;
the quadratic-variation diagnostic confirms the discretization is healthy.
"""

import numpy as np

import hestonlab as hl

params = hl.canonical_params()
truth = np.array([params.a, params.b, params.alpha, params.beta])
print("truth:        a=%.3f  b=%.3f  alpha=%.3f  beta=%.3f" % tuple(truth))
print()

for horizon in (200.0, 1000.0, 5000.0):
    grid = hl.TimeGrid(horizon, int(10 * horizon))
    path = hl.simulate_xy(params, grid, hl.Scheme.DISRE, hl.SeedLineage(11, 0))
    f = hl.path_functionals(path)
    est = hl.lse_from_functionals(f)
    err = np.abs(est.vector() - truth)
    print(f"T={horizon:6.0f}:  a={est.a_hat:.4f}  b={est.b_hat:.4f}  "
          f"alpha={est.alpha_hat:.4f}  beta={est.beta_hat:.4f}  "
          f"max|err|={err.max():.4f}")

# the same numbers fall out of the explicitly solved normal equations
grid = hl.TimeGrid(1000.0, 10_000)
path = hl.simulate_xy(params, grid, hl.Scheme.DISRE, hl.SeedLineage(11, 0))
f = hl.path_functionals(path)
est = hl.lse_from_functionals(f)
a_hat, b_hat = hl.lse_discrete_ab(path.y, grid.dt)
print()
print(f"plug-in route:          a_hat = {est.a_hat:.15f}")
print(f"normal-equation route:  a_hat = {a_hat:.15f}")

# quadratic variation of Y against its model value sigma1^2 * integral(Y);
# the second line computes the stochastic integral as the model says it
# should look, so the small gap to the direct sum is discretization error
diag = hl.ito_cross_check(f, params.sigma1)
print()
print(f"qv ratio (should sit near 1): {diag.qv_ratio:.4f}")
print(f"stochastic integral, summed directly:     {diag.i3_direct:.4f}")
print(f"model-implied value of the same integral: {diag.i3_ito:.4f}")
