"""Small Monte Carlo comparison of all four design methods on mm-cb.

Runs a handful of seeded repetitions per method and prints the 10th, 50th
and 90th percentiles of the best-distance metric D_n at a few checkpoints.
With more repetitions this is the data behind the usual benchmark figure;
the ordering (jcl well below the competitors) is already visible here.
"""

from jcontour.benchmarks import run_campaign
from jcontour.design import METHODS

REPS = 5
N_MAX = 25

result = run_campaign("mm-cb", methods=METHODS, reps=REPS, base_seed=0)

checkpoints = (5, 10, 15, 20, 25)
print(f"reps per method: {REPS}")
print()
print(f"{'method':>12} " + " ".join(f"{'D_' + str(n):>10}" for n in checkpoints))
for method in METHODS:
    pct = result.percentiles(method, N_MAX)
    medians = [pct[n - 1, 1] for n in checkpoints]
    print(f"{method:>12} " + " ".join(f"{m:10.2e}" for m in medians))

print()
for method in METHODS:
    stopped = sum(rec.status == "epsilon" for rec in result.records[method])
    print(f"{method}: {stopped}/{REPS} runs reached epsilon before the budget")
if result.failures:
    print("failures:", result.failures)
