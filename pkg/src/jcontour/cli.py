"""Command-line entry points: benchmark campaigns, summaries, ask-tell.

Exit codes: 0 success, 1 run failure (partial output preserved), 2 usage or
validation error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from . import benchmarks
from .design import METHODS, run_method
from .errors import (
    InvalidArgumentError,
    InvalidStateError,
    NumericalFailureError,
)
from .session import (
    load_session,
    new_session,
    save_session,
    session_lock,
)

_FIXED_COLUMNS = ("method", "seed", "repetition", "n", "mode")
_TRAILING = ("t_n", "J_max", "D_n")


def _fmt(value) -> str:
    """Shortest round-trip representation; replays parse bit-identically."""
    return repr(float(value))


def _result_header(d: int, R: int, timing: bool):
    cols = list(_FIXED_COLUMNS)
    cols += [f"x{i}" for i in range(d)]
    cols += [f"y{r}" for r in range(R)]
    cols += list(_TRAILING)
    if timing:
        cols.append("wall_ms")
    return cols


def _result_row(record, row, d: int, R: int, timing: bool):
    out = [record.method, str(record.seed), str(row_rep(record)), str(row.n), row.mode]
    out += [_fmt(v) for v in row.x]
    out += [_fmt(v) for v in row.y]
    out += [_fmt(row.t), _fmt(row.j_max), _fmt(row.d_n)]
    if timing:
        out.append(_fmt(row.wall_ms))
    return out


def row_rep(record):
    return getattr(record, "repetition", 0)


def cmd_bench(args) -> int:
    spec = benchmarks.get_spec(args.problem)
    problem = benchmarks.make_problem(spec)
    overrides = {}
    if args.n0 is not None:
        overrides["n0"] = args.n0
    if args.budget is not None:
        overrides["n_max"] = args.budget
    if args.epsilon is not None:
        overrides["epsilon"] = args.epsilon
    if args.w is not None:
        overrides["w"] = args.w
    if args.pstar is not None:
        overrides["p_star"] = args.pstar
    config = benchmarks.default_config(spec, **overrides)
    surrogate = args.surrogate or spec.surrogate_kind
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    for m in methods:
        if m not in METHODS:
            raise InvalidArgumentError(
                f"unknown method {m!r}; known: {', '.join(METHODS)}"
            )
    timing = not args.no_timing
    any_failed = False
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(_result_header(problem.d, problem.R, timing))
        for method in methods:
            for rep in range(args.reps):
                seed = benchmarks.campaign_seed(args.seed, rep)
                record = run_method(method, problem, config, surrogate, seed)
                record.repetition = rep
                for row in record.rows:
                    writer.writerow(_result_row(record, row, problem.d, problem.R, timing))
                if record.status == "failed":
                    any_failed = True
    return 1 if any_failed else 0


def cmd_summary(args) -> int:
    try:
        with open(args.input, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or "method" not in reader.fieldnames:
                raise InvalidArgumentError("input CSV missing header")
            rows = list(reader)
    except FileNotFoundError:
        raise InvalidArgumentError(f"no such file: {args.input}") from None
    runs = {}
    try:
        for row in rows:
            key = (row["method"], row["seed"], row["repetition"])
            runs.setdefault(key, {})[int(row["n"])] = float(row["D_n"])
    except (KeyError, ValueError) as exc:
        raise InvalidArgumentError(f"malformed CSV: {exc}") from None
    by_method = {}
    for (method, _, _), trace in runs.items():
        by_method.setdefault(method, []).append(trace)
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["method", "n", "p10", "p50", "p90"])
        for method in sorted(by_method):
            traces = by_method[method]
            n_max = max(max(t) for t in traces)
            for n in range(1, n_max + 1):
                vals = []
                for trace in traces:
                    avail = [m for m in trace if m <= n]
                    if avail:  # early-stopped runs carry their terminal value
                        vals.append(trace[max(avail)])
                if not vals:
                    continue
                p10, p50, p90 = np.percentile(vals, [10, 50, 90])
                writer.writerow([method, str(n), _fmt(p10), _fmt(p50), _fmt(p90)])
    return 0


def _parse_vector(text: str, what: str) -> np.ndarray:
    try:
        return np.array([float(v) for v in text.split(",")], dtype=float)
    except ValueError:
        raise InvalidArgumentError(f"malformed {what}: {text!r}") from None


def cmd_init(args) -> int:
    from .acquisition import JclConfig

    targets = _parse_vector(args.targets, "targets")
    kwargs = dict(targets=targets, seed=args.seed, n0=args.n0, n_max=args.budget)
    if args.epsilon is not None:
        kwargs["epsilon"] = args.epsilon
    if args.w is not None:
        kwargs["w"] = args.w
    if args.pstar is not None:
        kwargs["p_star"] = args.pstar
    config = JclConfig(**kwargs)
    designer = new_session(args.dim, config, args.surrogate)
    with session_lock(args.state):
        save_session(designer, args.state)
    print(json.dumps({"initialized": True, "state": args.state}))
    return 0


def cmd_suggest(args) -> int:
    with session_lock(args.state):
        designer = load_session(args.state)
        suggestion = designer.suggest()
        save_session(designer, args.state)
    if suggestion.get("done"):
        print(json.dumps({"done": True, "reason": suggestion["reason"]}))
    else:
        print(
            json.dumps(
                {
                    "x": [float(v) for v in suggestion["x"]],
                    "mode": suggestion["mode"],
                    "jmax": suggestion["jmax"],
                    "t": suggestion["t"],
                }
            )
        )
    return 0


def cmd_tell(args) -> int:
    x = _parse_vector(args.x, "x")
    y = _parse_vector(args.y, "y")
    with session_lock(args.state):
        designer = load_session(args.state)
        designer.tell(x, y)
        save_session(designer, args.state)
    print(json.dumps({"told": True, "n": designer.n}))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="jcontour",
        description="Sequential design for joint contour location.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    bench = sub.add_parser("bench", help="run benchmark campaigns, write a CSV trace")
    bench.add_argument("--problem", required=True, help=", ".join(benchmarks.BENCHMARK_NAMES))
    bench.add_argument("--methods", default=",".join(METHODS))
    bench.add_argument("--surrogate", choices=("gp", "dgp"), default=None)
    bench.add_argument("--reps", type=int, default=1)
    bench.add_argument("--seed", type=int, default=0)
    bench.add_argument("--out", required=True)
    bench.add_argument("--n0", type=int, default=None)
    bench.add_argument("--budget", type=int, default=None)
    bench.add_argument("--epsilon", type=float, default=None)
    bench.add_argument("--w", type=float, default=None)
    bench.add_argument("--pstar", type=float, default=None)
    bench.add_argument("--no-timing", action="store_true")
    bench.set_defaults(func=cmd_bench)

    summary = sub.add_parser("summary", help="percentile plot data from a bench CSV")
    summary.add_argument("--input", required=True)
    summary.add_argument("--out", required=True)
    summary.set_defaults(func=cmd_summary)

    init = sub.add_parser("init", help="create an ask-tell session")
    init.add_argument("--state", required=True)
    init.add_argument("--dim", type=int, required=True)
    init.add_argument("--targets", required=True, help="comma-separated targets")
    init.add_argument("--surrogate", choices=("gp", "dgp"), default="gp")
    init.add_argument("--seed", type=int, default=0)
    init.add_argument("--n0", type=int, default=5)
    init.add_argument("--budget", type=int, default=25)
    init.add_argument("--epsilon", type=float, default=None)
    init.add_argument("--w", type=float, default=None)
    init.add_argument("--pstar", type=float, default=None)
    init.set_defaults(func=cmd_init)

    suggest = sub.add_parser("suggest", help="propose the next input")
    suggest.add_argument("--state", required=True)
    suggest.set_defaults(func=cmd_suggest)

    tell = sub.add_parser("tell", help="record observed responses")
    tell.add_argument("--state", required=True)
    tell.add_argument("--x", required=True, help="comma-separated input")
    tell.add_argument("--y", required=True, help="comma-separated responses")
    tell.set_defaults(func=cmd_tell)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InvalidArgumentError, InvalidStateError) as exc:
        print(json.dumps({"error": str(exc)}), file=sys.stderr)
        return 2
    except NumericalFailureError as exc:
        print(json.dumps({"error": str(exc), "kind": "numerical"}), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
