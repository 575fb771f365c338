"""Exploration geometry: triangulation candidates and the Pareto front.

Builds the Delaunay triangulation of a small design, generates candidates at
simplex barycenters and beyond hull facets, scores them by per-surrogate
posterior standard deviation, and shows which survive Pareto filtering.
"""

import numpy as np

from jcontour.benchmarks import make_problem
from jcontour.geometry import (
    candidate_criteria,
    delaunay,
    pareto_front,
    tricands,
)
from jcontour.gp import fit_gp
from jcontour.sampling import maximin_lhs

problem = make_problem("mm-cb")
rng = np.random.default_rng(1)

X = maximin_lhs(10, 2, rng)
Y = np.array([problem.evaluate(x) for x in X])
models = [fit_gp(X, Y[:, r], rng) for r in range(problem.R)]

tri = delaunay(X)
print("design points:", len(X))
print("simplices:", len(tri.simplices), " hull facets:", len(tri.hull_facets))

cand = tricands(tri)
crit = candidate_criteria(models, cand.points)
front = pareto_front(crit)

print("candidates:", len(cand.points), " on Pareto front:", len(front))
print()
print(f"{'x1':>6} {'x2':>6} {'origin':>8} {'sd_1':>7} {'sd_2':>7}  front")
for i, (p, tag) in enumerate(zip(cand.points, cand.provenance)):
    mark = "*" if i in front else ""
    print(
        f"{p[0]:6.3f} {p[1]:6.3f} {tag.value:>8} "
        f"{crit[i, 0]:7.4f} {crit[i, 1]:7.4f}  {mark}"
    )

# every candidate keeps a healthy distance from the data it was built from
d2 = np.sum((cand.points[:, None, :] - X[None, :, :]) ** 2, axis=-1)
print()
print("min candidate-to-design distance:", float(np.sqrt(d2.min())))
