"""Driving an external simulator through the serialized ask-tell session.

The same loop a shell script would run against the `jcontour` CLI, shown
in-process: initialize a session, repeatedly ask for the next input, run the
"simulator" (here a benchmark stand-in), and report the responses back.  The
session state round-trips through JSON at every step, so the run could be
interrupted and resumed anywhere without changing the trace.
"""

import json

import numpy as np

from jcontour.acquisition import JclConfig
from jcontour.benchmarks import make_problem
from jcontour.session import designer_from_state, designer_to_state, new_session

problem = make_problem("mm-cb")  # stands in for an expensive simulator
config = JclConfig(targets=np.zeros(2), n0=5, n_max=25, seed=3)

designer = new_session(problem.d, config, surrogate_kind="gp")

step = 0
while True:
    # serialize and restore, exactly as separate CLI invocations would
    state = json.dumps(designer_to_state(designer))
    designer = designer_from_state(json.loads(state))

    suggestion = designer.suggest()
    if suggestion.get("done"):
        print(f"\ndone after {step} observations: {suggestion['reason']}")
        break
    x = np.asarray(suggestion["x"], dtype=float)
    y = problem.evaluate(x)
    designer.tell(x, y)
    step += 1
    print(f"step {step:2d} [{suggestion['mode']:>8}] x = {np.round(x, 4)} "
          f"-> y = {np.round(y, 4)}")

print("best distance:", float(np.min(np.sum(designer.data.Y ** 2, axis=1))))
print("state file size:", len(state), "bytes")
