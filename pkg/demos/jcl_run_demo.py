"""One full joint contour location run on the mm-cb benchmark.

Prints the acquisition trace: after the initial design, each step reports
the tolerance t_n, the best joint within-tolerance probability found, the
resulting exploit/explore decision, and the running best distance D_n.
"""

from jcontour.benchmarks import default_config, make_problem
from jcontour.design import run_jcl

problem = make_problem("mm-cb")
config = default_config("mm-cb")

record = run_jcl(problem, config, surrogate_kind="gp", seed=7)

print(f"{'n':>3} {'mode':>8} {'t_n':>9} {'J_max':>7} {'D_n':>10}")
for row in record.rows:
    t = f"{row.t:9.4f}" if row.t == row.t else "        -"
    j = f"{row.j_max:7.3f}" if row.j_max == row.j_max else "      -"
    print(f"{row.n:>3} {row.mode:>8} {t} {j} {row.d_n:10.3e}")

print()
print("status:", record.status)
print("observations spent:", len(record.rows), "of", config.n_max)
print("final best distance:", record.final_distance())
if record.status == "epsilon":
    best = min(record.rows, key=lambda r: r.d_n)
    print("near-root located at x =", best.x, "with responses", best.y)
