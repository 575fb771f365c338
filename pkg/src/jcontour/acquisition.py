"""Adaptive tolerance, joint within-tolerance probability, and mode decision.

The exploit criterion is the product over surrogates of the posterior
probability that the response lands within +/- t of its target, maximized in
log space over the unit cube.  The tolerance t shrinks adaptively with the
best worst-case observed miss, which guarantees no observed input can ever
attain joint probability 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np
from scipy import optimize

from .data import Dataset
from .errors import InvalidArgumentError, InvalidStateError


class Mode(str, Enum):
    INITIAL = "initial"
    EXPLOIT = "exploit"
    EXPLORE = "explore"
    ALTERNATE = "alternate"


@dataclass(frozen=True)
class McmcSettings:
    """Posterior sampling budget for the deep surrogate."""

    n_iter: int = 1000
    burn: int = 500
    thin: int = 5


@dataclass(frozen=True)
class JclConfig:
    """Algorithm constants for a joint contour location run."""

    targets: np.ndarray
    w: float = 0.9
    p_star: float = 0.2
    epsilon: float = 1e-3
    n0: int = 5
    n_max: int = 25
    scan_per_dim: int = 10_000
    starts_per_dim: int = 10
    max_evals_per_start: int = 200
    mcmc: McmcSettings = field(default_factory=McmcSettings)
    seed: int = 0

    def __post_init__(self):
        tau = np.atleast_1d(np.asarray(self.targets, dtype=float))
        object.__setattr__(self, "targets", tau)
        if not np.all(np.isfinite(tau)):
            raise InvalidArgumentError("targets must be finite")
        if not 0.0 < self.w < 1.0:
            raise InvalidArgumentError("w must be in (0, 1)")
        if not 0.0 < self.p_star < 1.0:
            raise InvalidArgumentError("p_star must be in (0, 1)")
        if self.epsilon <= 0:
            raise InvalidArgumentError("epsilon must be positive")
        if not self.n0 < self.n_max:
            raise InvalidArgumentError("n0 must be less than n_max")

    def with_targets(self, targets) -> "JclConfig":
        return replace(self, targets=np.asarray(targets, dtype=float))


@dataclass(frozen=True)
class ToleranceState:
    """Current tolerance t and the observation index that set it."""

    t: float
    index: int


@dataclass(frozen=True)
class AcquisitionDecision:
    mode: Mode
    x: np.ndarray
    j_max: float
    tolerance: float


def compute_tolerance(data: Dataset, targets, w: float) -> ToleranceState:
    """w-shrunken best worst-case distance of observed responses to targets.

    Inner max over responses of |y_ir - tau_r| per observation, then min over
    observations, scaled by w.
    """
    if data.n < 1:
        raise InvalidStateError("tolerance needs at least one observation")
    if not 0.0 < w < 1.0:
        raise InvalidArgumentError("w must be in (0, 1)")
    targets = np.atleast_1d(np.asarray(targets, dtype=float))
    worst = np.max(np.abs(data.Y - targets[None, :]), axis=1)
    idx = int(np.argmin(worst))
    return ToleranceState(t=float(w * worst[idx]), index=idx)


def joint_log_probability_batch(models, X, t: float, targets) -> np.ndarray:
    """Sum over surrogates of log P(tau_r - t <= f_r(x) <= tau_r + t).

    Surrogates are treated as independent.  Vectorized over the rows of X.
    """
    if t < 0:
        raise InvalidArgumentError("tolerance must be nonnegative")
    X = np.atleast_2d(np.asarray(X, dtype=float))
    targets = np.atleast_1d(np.asarray(targets, dtype=float))
    total = np.zeros(X.shape[0])
    for model, tau in zip(models, targets):
        total += model.log_interval_probability_batch(X, tau - t, tau + t)
    return total


def joint_log_probability(models, x, t: float, targets) -> float:
    return float(joint_log_probability_batch(models, np.atleast_2d(x), t, targets)[0])


def multistart_maximize(
    objective_batch,
    d: int,
    rng,
    previous_opt=None,
    scan_per_dim: int = 10_000,
    starts_per_dim: int = 10,
    max_evals_per_start: int = 200,
):
    """Multi-start bounded maximization of a criterion over the unit cube.

    Starts are the best ``10d`` scorers among ``10000d`` uniform random
    points, the previous iteration's optimum when available, plus ``10d``
    fresh uniform points.  Local steps leaving the cube are projected back.
    Should every local optimization fail, the best dense-scan point still
    stands.  Deterministic given ``rng``; ties break toward earlier starts.

    Returns ``(x_best, value_best)``.
    """
    rng = np.random.default_rng(rng)
    scan = rng.random((scan_per_dim * d, d))
    scan_scores = np.asarray(objective_batch(scan))
    top = np.argsort(scan_scores)[::-1][: starts_per_dim * d]
    starts = [scan[i] for i in top]
    if previous_opt is not None:
        starts.append(np.clip(np.asarray(previous_opt, dtype=float), 0.0, 1.0))
    starts.extend(rng.random((starts_per_dim * d, d)))

    def neg_obj(x):
        return -float(objective_batch(np.clip(x, 0.0, 1.0)[None, :])[0])

    best_x = scan[top[0]]
    best_val = scan_scores[top[0]]
    for x0 in starts:
        res = optimize.minimize(
            neg_obj,
            x0,
            method="L-BFGS-B",
            bounds=[(0.0, 1.0)] * d,
            options={"maxfun": max_evals_per_start},
        )
        if np.isfinite(res.fun) and -res.fun > best_val:
            best_val = -res.fun
            best_x = np.clip(res.x, 0.0, 1.0)
    return np.asarray(best_x, dtype=float), float(best_val)


def maximize_joint_probability(
    models,
    t: float,
    targets,
    rng,
    previous_opt=None,
    scan_per_dim: int = 10_000,
    starts_per_dim: int = 10,
    max_evals_per_start: int = 200,
):
    """Maximize the joint within-tolerance probability over the unit cube.

    Optimization runs in log space for stability at small tolerances.
    Returns ``(x_best, j_max)`` with ``j_max`` on the probability scale.
    """
    targets = np.atleast_1d(np.asarray(targets, dtype=float))
    x_best, best_log = multistart_maximize(
        lambda X: joint_log_probability_batch(models, X, t, targets),
        models[0].d,
        rng,
        previous_opt=previous_opt,
        scan_per_dim=scan_per_dim,
        starts_per_dim=starts_per_dim,
        max_evals_per_start=max_evals_per_start,
    )
    return x_best, float(np.exp(best_log))


def decide(j_max: float, p_star: float) -> Mode:
    """Exploit iff the achievable joint probability meets the threshold."""
    return Mode.EXPLOIT if j_max >= p_star else Mode.EXPLORE
