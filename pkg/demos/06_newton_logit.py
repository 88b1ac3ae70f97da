"""
Newton-Raphson for the multinomial logit
========================================

The solver starts at zero and takes full Newton steps, halving a step only
when it would lower the log-likelihood. Watching the gradient shows the
quadratic convergence near the optimum.
"""

import numpy as np

from fiscalipw import mnl_fit, mnl_predict
from fiscalipw.errors import SeparationError
from fiscalipw.regress import mnl_gradient

rng = np.random.default_rng(7)
n = 1000
x = rng.standard_normal((n, 2))
B_true = np.array([[0.5, 1.0, -0.5], [-0.5, 0.3, 1.2]])
scores = np.column_stack([np.zeros(n), np.column_stack([np.ones(n), x]) @ B_true.T])
p = np.exp(scores) / np.exp(scores).sum(axis=1, keepdims=True)
q = 1 + (rng.random(n)[:, None] > p.cumsum(axis=1)).sum(axis=1)


def trace(it, B, ll):
    g = np.abs(mnl_gradient(B, x, q, 3)).max()
    print(f"  iter {it:2d}  loglik {ll:12.6f}  |grad| {g:.2e}")


fit = mnl_fit(x, q, 3, callback=trace)
print("estimated:\n", fit.coefficients.round(3))
print("true:\n", B_true)
print("first rows of fitted probabilities:\n", mnl_predict(fit, x[:3]).round(3))

# Perfect prediction has no finite maximum; the solver says so instead of drifting.
try:
    mnl_fit(x[:, :1], np.where(x[:, 0] > 0, 2, 1), 2)
except SeparationError as exc:
    print("separation:", exc)
