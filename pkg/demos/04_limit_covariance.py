"""The closed-form limit covariance, built two independent ways.

The stationary volatility law is a Gamma distribution; its first three
moments determine the asymptotic covariance of the drift estimator.  One
construction multiplies the model's noise matrix into a moment matrix, the
other assembles the same object from normal-equation blocks.  They must
agree to rounding error — a strong internal consistency check.
"""

import numpy as np

import hestonlab as hl

params = hl.canonical_params()

mom = hl.stationary_moments(params)
print("stationary Gamma law of the volatility:")
print(f"  mean {mom.m1:.5f}   second moment {mom.m2:.5f}   third moment {mom.m3:.5f}")
print(f"  variance {mom.var:.5f}")

# the transform at a few points, against the same law
for lam in (0.5, 1.0, 2.0):
    print(f"  Laplace transform at {lam}: {hl.stationary_laplace(params, lam):.6f}")
print()

direct = np.asarray(hl.asymptotic_covariance(params).sigma_matrix)
sandwich = np.asarray(hl.covariance_sandwich(params).sigma_matrix)

print("limit covariance of sqrt(T) * (estimate - truth), direct construction:")
with np.printoptions(precision=4, suppress=True):
    print(direct)
print()
print(f"sandwich construction agrees to {np.max(np.abs(direct - sandwich)):.2e}")
print()
print("diagonal:", np.round(np.diag(direct), 4))
print("the (a,b) covariance entry equals 2a + sigma1^2 =", 2 * params.a + params.sigma1**2)

# conditional means give the finite-horizon picture the limit law refines
tau = 10.0
print()
print(f"E[Y_t | Y_0=0.2] at t={tau}: "
      f"{hl.conditional_mean_y(params, 0.2, 0.0, tau):.4f} "
      f"(stationary mean {params.a / params.b:.4f})")
print(f"E[X_t | start] at t={tau}:  "
      f"{hl.conditional_mean_x(params, 0.2, 0.1, 0.0, tau):.4f} "
      f"(long-run slope {params.alpha - params.beta * params.a / params.b:.2f})")
