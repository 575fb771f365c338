"""Sequential design orchestration: the joint-contour scheme and competitors.

Four designs share the same trace format so their best-distance curves are
directly comparable:

* ``jcl`` — exploit the joint within-tolerance probability, explore via
  triangulation candidates on the Pareto front of posterior SDs.
* ``lhs`` — one space-filling Latin hypercube of the full budget.
* ``alt-entropy`` — alternate responses, maximizing classification entropy
  about each target contour.
* ``alt-pareto`` — alternate responses, picking triangulation candidates on
  the entropy/uncertainty Pareto front.

All designs honor the same budget and epsilon stopping rule.  Each run draws
from a method-tagged RNG substream, so runs of different methods under one
seed never perturb each other.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtr, xlogy
from scipy.spatial import QhullError

from . import dgp as dgp_mod
from . import gp as gp_mod
from .acquisition import (
    JclConfig,
    Mode,
    compute_tolerance,
    decide,
    maximize_joint_probability,
    multistart_maximize,
)
from .data import MIN_SEPARATION, Dataset
from .errors import InvalidArgumentError, InvalidStateError, NumericalFailureError
from .geometry import (
    InsufficientPointsError,
    _drop_near_observed,
    _space_filling_candidates,
    delaunay,
    pareto_front,
    select_exploration,
    tricands,
)
from .sampling import maximin_lhs

METHODS = ("jcl", "lhs", "alt-entropy", "alt-pareto")
_METHOD_IDS = {name: i + 1 for i, name in enumerate(METHODS)}

STATUS_BUDGET = "budget"
STATUS_EPSILON = "epsilon"
STATUS_FAILED = "failed"


@dataclass(frozen=True)
class Problem:
    """R deterministic functions on the unit cube with target values."""

    d: int
    R: int
    evaluators: tuple
    targets: np.ndarray
    optimum: np.ndarray | None = None
    name: str = ""

    def __post_init__(self):
        object.__setattr__(
            self, "targets", np.atleast_1d(np.asarray(self.targets, dtype=float))
        )
        if len(self.evaluators) != self.R or len(self.targets) != self.R:
            raise InvalidArgumentError("need one evaluator and target per response")
        if not np.all(np.isfinite(self.targets)):
            raise InvalidArgumentError("targets must be finite")

    def evaluate(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.array([f(x) for f in self.evaluators], dtype=float)


@dataclass(frozen=True)
class RunRow:
    n: int
    mode: str
    x: np.ndarray
    y: np.ndarray
    t: float  # nan when no tolerance was computed (initial/LHS rows)
    j_max: float  # nan when no joint probability was computed
    d_n: float
    wall_ms: float


@dataclass
class RunRecord:
    method: str
    seed: int
    rows: list = field(default_factory=list)
    status: str = ""

    @property
    def dataset_shape(self):
        return (len(self.rows),)

    def final_distance(self) -> float:
        return self.rows[-1].d_n if self.rows else np.inf


def best_distance(Y, targets) -> float:
    """Smallest squared Euclidean distance in response space to the targets."""
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    if Y.shape[0] < 1:
        raise InvalidStateError("best_distance needs at least one observation")
    targets = np.atleast_1d(np.asarray(targets, dtype=float))
    return float(np.min(np.sum((Y - targets[None, :]) ** 2, axis=1)))


def _method_rng(method: str, seed: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([_METHOD_IDS[method], seed]))


def _fit_surrogates(data: Dataset, surrogate_kind: str, config: JclConfig, rng):
    if surrogate_kind == "gp":
        return [gp_mod.fit_gp(data.X, data.Y[:, r], rng) for r in range(data.R)]
    if surrogate_kind == "dgp":
        return [
            dgp_mod.fit_dgp(data.X, data.Y[:, r], config.mcmc, rng)
            for r in range(data.R)
        ]
    raise InvalidArgumentError(f"unknown surrogate kind {surrogate_kind!r}")


def _separate(x, observed, d):
    """Nudge a point to at least MIN_SEPARATION from every observed input."""
    x = np.asarray(x, dtype=float)
    if observed.shape[0] == 0:
        return x
    dist2 = np.sum((observed - x[None, :]) ** 2, axis=1)
    nearest = int(np.argmin(dist2))
    if dist2[nearest] >= MIN_SEPARATION**2:
        return x
    direction = x - observed[nearest]
    norm = np.linalg.norm(direction)
    candidates = []
    if norm > 0:
        candidates.append(direction / norm)
    for k in range(d):
        for sign in (1.0, -1.0):
            e = np.zeros(d)
            e[k] = sign
            candidates.append(e)
    for u in candidates:
        trial = np.clip(x + 2.0 * MIN_SEPARATION * u, 0.0, 1.0)
        if np.min(np.sum((observed - trial[None, :]) ** 2, axis=1)) >= MIN_SEPARATION**2:
            return trial
    return x  # give up; caller's dataset append will reject a true duplicate


class JclDesigner:
    """Ask-tell core of the joint contour location loop.

    ``suggest`` proposes the next input (consuming RNG and optimizer state);
    ``tell`` records the observed responses.  The in-process runner and the
    serialized CLI session both drive this class, so their traces coincide.
    """

    def __init__(self, d: int, config: JclConfig, surrogate_kind: str = "gp", rng=None):
        if config.n0 < 2:
            raise InvalidArgumentError("n0 must be at least 2")
        if surrogate_kind not in ("gp", "dgp"):
            raise InvalidArgumentError(f"unknown surrogate kind {surrogate_kind!r}")
        self.d = d
        self.config = config
        self.surrogate_kind = surrogate_kind
        self.rng = np.random.default_rng(rng)
        self.data = Dataset.empty(d, len(config.targets))
        self.pending_initial = list(maximin_lhs(config.n0, d, self.rng))
        self.previous_opt = None
        self.last_suggestion = None

    @property
    def n(self) -> int:
        return self.data.n

    def done_reason(self):
        """Stopping-rule check; None while the design should continue."""
        if self.data.n > 0:
            if best_distance(self.data.Y, self.config.targets) < self.config.epsilon:
                return STATUS_EPSILON
            if self.data.n >= self.config.n_max:
                return STATUS_BUDGET
        return None

    def suggest(self) -> dict:
        reason = self.done_reason()
        if reason is not None:
            return {"done": True, "reason": reason}
        if self.pending_initial:
            x = self.pending_initial.pop(0)
            out = {"x": x, "mode": Mode.INITIAL.value, "jmax": None, "t": None}
        else:
            cfg = self.config
            models = _fit_surrogates(self.data, self.surrogate_kind, cfg, self.rng)
            tol = compute_tolerance(self.data, cfg.targets, cfg.w)
            x_opt, j_max = maximize_joint_probability(
                models,
                tol.t,
                cfg.targets,
                self.rng,
                previous_opt=self.previous_opt,
                scan_per_dim=cfg.scan_per_dim,
                starts_per_dim=cfg.starts_per_dim,
                max_evals_per_start=cfg.max_evals_per_start,
            )
            self.previous_opt = x_opt
            mode = decide(j_max, cfg.p_star)
            if mode is Mode.EXPLOIT:
                x = x_opt
            else:
                x = select_exploration(models, self.data, self.rng)
            x = _separate(x, self.data.X, self.d)
            out = {"x": x, "mode": mode.value, "jmax": j_max, "t": tol.t}
        self.last_suggestion = out
        return out

    def tell(self, x, y):
        x = np.asarray(x, dtype=float).ravel()
        y = np.asarray(y, dtype=float).ravel()
        if x.shape != (self.d,):
            raise InvalidArgumentError(f"x must have dimension {self.d}")
        if y.shape != (len(self.config.targets),):
            raise InvalidArgumentError(
                f"y must have {len(self.config.targets)} responses"
            )
        self.data = self.data.append(x, y)


def _drive(designer: JclDesigner, problem: Problem, record: RunRecord) -> RunRecord:
    """Run a designer against a problem until its stopping rule fires."""
    while True:
        t0 = time.perf_counter()
        suggestion = designer.suggest()
        if suggestion.get("done"):
            record.status = suggestion["reason"]
            return record
        x = np.asarray(suggestion["x"], dtype=float)
        y = problem.evaluate(x)
        designer.tell(x, y)
        wall_ms = (time.perf_counter() - t0) * 1e3
        record.rows.append(
            RunRow(
                n=designer.n,
                mode=suggestion["mode"],
                x=x,
                y=y,
                t=np.nan if suggestion["t"] is None else float(suggestion["t"]),
                j_max=np.nan if suggestion["jmax"] is None else float(suggestion["jmax"]),
                d_n=best_distance(designer.data.Y, problem.targets),
                wall_ms=wall_ms,
            )
        )


def run_jcl(
    problem: Problem, config: JclConfig, surrogate_kind: str = "gp", seed: int = 0
) -> RunRecord:
    """Full joint contour location run; returns the per-iteration trace."""
    rng = _method_rng("jcl", seed)
    record = RunRecord(method="jcl", seed=seed)
    designer = JclDesigner(problem.d, config, surrogate_kind, rng)
    try:
        return _drive(designer, problem, record)
    except NumericalFailureError:
        record.status = STATUS_FAILED
        return record


def run_lhs(problem: Problem, config: JclConfig, seed: int = 0) -> RunRecord:
    """Space-filling competitor: one LHS of the full budget, random order."""
    rng = _method_rng("lhs", seed)
    record = RunRecord(method="lhs", seed=seed)
    X = maximin_lhs(config.n_max, problem.d, rng)
    X = X[rng.permutation(config.n_max)]
    Y = []
    for i, x in enumerate(X):
        t0 = time.perf_counter()
        y = problem.evaluate(x)
        Y.append(y)
        d_n = best_distance(np.array(Y), problem.targets)
        record.rows.append(
            RunRow(
                n=i + 1,
                mode=Mode.INITIAL.value,
                x=x,
                y=y,
                t=np.nan,
                j_max=np.nan,
                d_n=d_n,
                wall_ms=(time.perf_counter() - t0) * 1e3,
            )
        )
        if d_n < config.epsilon:
            record.status = STATUS_EPSILON
            return record
    record.status = STATUS_BUDGET
    return record


def classification_entropy(mean, sd, target):
    """Entropy of the above/below-contour classification probability."""
    p = ndtr((target - np.asarray(mean)) / np.asarray(sd))
    return -xlogy(p, p) - xlogy(1.0 - p, 1.0 - p)


class _AlternatingRunner:
    """Shared skeleton for the two alternating single-response competitors."""

    method = ""

    def __init__(self, problem, config, surrogate_kind, seed):
        self.problem = problem
        self.config = config
        self.surrogate_kind = surrogate_kind
        self.rng = _method_rng(self.method, seed)
        self.record = RunRecord(method=self.method, seed=seed)

    def acquire(self, models, data, r):
        raise NotImplementedError

    def run(self) -> RunRecord:
        problem, config = self.problem, self.config
        data = Dataset.empty(problem.d, problem.R)
        try:
            for x in maximin_lhs(config.n0, problem.d, self.rng):
                t0 = time.perf_counter()
                y = problem.evaluate(x)
                data = data.append(x, y)
                self._record_row(data, Mode.INITIAL.value, x, y, t0)
            k = 0
            while (
                best_distance(data.Y, problem.targets) >= config.epsilon
                and data.n < config.n_max
            ):
                t0 = time.perf_counter()
                models = _fit_surrogates(data, self.surrogate_kind, config, self.rng)
                r = k % problem.R
                x = _separate(self.acquire(models, data, r), data.X, problem.d)
                y = problem.evaluate(x)
                data = data.append(x, y)
                self._record_row(data, Mode.ALTERNATE.value, x, y, t0)
                k += 1
        except NumericalFailureError:
            self.record.status = STATUS_FAILED
            return self.record
        self.record.status = (
            STATUS_EPSILON
            if best_distance(data.Y, problem.targets) < config.epsilon
            else STATUS_BUDGET
        )
        return self.record

    def _record_row(self, data, mode, x, y, t0):
        self.record.rows.append(
            RunRow(
                n=data.n,
                mode=mode,
                x=x,
                y=y,
                t=np.nan,
                j_max=np.nan,
                d_n=best_distance(data.Y, self.problem.targets),
                wall_ms=(time.perf_counter() - t0) * 1e3,
            )
        )


class _AlternatingEntropy(_AlternatingRunner):
    method = "alt-entropy"

    def acquire(self, models, data, r):
        model = models[r]
        target = self.config.targets[r]

        def batch(X):
            mean, sd = model.predict_batch(X)
            return classification_entropy(mean, sd, target)

        x, _ = multistart_maximize(
            batch,
            self.problem.d,
            self.rng,
            scan_per_dim=self.config.scan_per_dim,
            starts_per_dim=self.config.starts_per_dim,
            max_evals_per_start=self.config.max_evals_per_start,
        )
        return x


class _AlternatingPareto(_AlternatingRunner):
    method = "alt-pareto"

    def acquire(self, models, data, r):
        model = models[r]
        target = self.config.targets[r]
        try:
            cand = tricands(delaunay(data.X)).points
        except (InvalidArgumentError, InsufficientPointsError, QhullError):
            cand = _space_filling_candidates(self.problem.d, self.rng)
        cand = _drop_near_observed(cand, data.X)
        if len(cand) == 0:
            cand = _drop_near_observed(
                _space_filling_candidates(self.problem.d, self.rng), data.X
            )
        mean, sd = model.predict_batch(cand)
        criteria = np.column_stack([classification_entropy(mean, sd, target), sd])
        front = pareto_front(criteria)
        return cand[front[self.rng.integers(len(front))]]


def run_alternating_entropy(
    problem: Problem, config: JclConfig, surrogate_kind: str = "gp", seed: int = 0
) -> RunRecord:
    """Competitor: alternate responses, maximize classification entropy."""
    return _AlternatingEntropy(problem, config, surrogate_kind, seed).run()


def run_alternating_pareto(
    problem: Problem, config: JclConfig, surrogate_kind: str = "gp", seed: int = 0
) -> RunRecord:
    """Competitor: alternate responses, tricands on the entropy/SD front."""
    return _AlternatingPareto(problem, config, surrogate_kind, seed).run()


def run_method(
    method: str,
    problem: Problem,
    config: JclConfig,
    surrogate_kind: str = "gp",
    seed: int = 0,
) -> RunRecord:
    """Dispatch a single run by stable method name."""
    if method == "jcl":
        return run_jcl(problem, config, surrogate_kind, seed)
    if method == "lhs":
        return run_lhs(problem, config, seed)
    if method == "alt-entropy":
        return run_alternating_entropy(problem, config, surrogate_kind, seed)
    if method == "alt-pareto":
        return run_alternating_pareto(problem, config, surrogate_kind, seed)
    raise InvalidArgumentError(f"unknown method {method!r}")
