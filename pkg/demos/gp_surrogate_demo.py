"""Fit a GP surrogate to one benchmark response and inspect its posterior.

Walks through the basic surrogate workflow: sample a small design, fit by
maximum likelihood, then query predictive summaries and within-tolerance
interval probabilities along a slice of the input space.
"""

import numpy as np

from jcontour.benchmarks import make_problem
from jcontour.gp import fit_gp, interval_probability
from jcontour.sampling import maximin_lhs

problem = make_problem("mm-cb")
rng = np.random.default_rng(0)

# 12-point maximin Latin hypercube, first response only
X = maximin_lhs(12, problem.d, rng)
y = np.array([problem.evaluate(x)[0] for x in X])

model = fit_gp(X, y, rng)
print("fitted lengthscales:", model.hp.lengthscales)
print("fitted signal variance:", model.hp.signal_variance)
print("log marginal likelihood:", model.log_likelihood())
print()

# slice along x1 at the known contour height x2 = 0.52
grid = np.linspace(0.0, 1.0, 11)
slice_pts = np.column_stack([grid, np.full_like(grid, 0.52)])
mean, sd = model.predict_batch(slice_pts)

t = 0.1
print(f"{'x1':>5} {'mean':>9} {'sd':>8}  P(|f| <= {t})")
for x1, m, s in zip(grid, mean, sd):
    from jcontour.gp import PosteriorSummary

    p = interval_probability(PosteriorSummary(m, s), -t, t)
    print(f"{x1:5.2f} {m:9.4f} {s:8.4f}  {p:.4f}")

# the surrogate interpolates: predictions at the design reproduce the data
mean_tr, sd_tr = model.predict_batch(X)
print()
print("max |prediction - observation| at design points:",
      float(np.max(np.abs(mean_tr - y))))
