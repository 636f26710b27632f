"""
Rate function, compensator and log-likelihood
=============================================

Evaluate the self-excited rate on a small cascade, integrate it, and check
the closed-form log-likelihood against interval-by-interval quadrature.
"""
import numpy as np

from sehp import Cascade, SehpParams, log_likelihood, log_likelihood_quadrature
from sehp.intensity import IntensityContext, compensator, rate

params = SehpParams(v=2.0, alpha=0.5, beta=1.0)
cascade = Cascade("toy", [0.0, 1.0], horizon=3.0)
ctx = IntensityContext.from_cascade(params, cascade)

# the rate jumps by alpha right after each event and decays in between
grid = np.linspace(0.0, 3.0, 7)
for t, lam in zip(grid, rate(ctx, grid)):
    print(f"rate({t:.1f}) = {lam:.4f}")

print("expected events on [0, 2]:", compensator(ctx, 0.0, 2.0))

res = log_likelihood(params, cascade)
print("closed form log-likelihood:", res.value)
print("quadrature  log-likelihood:", log_likelihood_quadrature(params, cascade))
print("gradient (d/dv, d/dalpha, d/dbeta):", res.gradient)
