"""Exact Gaussian process regression with an anisotropic Matern-5/2 kernel.

Hyperparameters (per-dimension lengthscales and a signal variance) are fit by
maximum likelihood via multi-start L-BFGS-B in log space with analytic
gradients.  The nugget is fixed at 1e-6 and never fitted: the functions being
emulated are deterministic and the nugget exists only to stabilize the linear
algebra.  Responses are centered on their training mean before inference and
the mean is added back to predictions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import linalg, optimize
from scipy.special import log_ndtr, ndtr

from .errors import InvalidArgumentError, NumericalFailureError
from .sampling import lhs

NUGGET = 1.0e-6
SD_FLOOR = 1e-8
LENGTHSCALE_BOUNDS = (1e-2, 10.0)
VARIANCE_BOUNDS = (1e-3, 1e3)
JITTER_LADDER = (1e-8, 1e-6, 1e-4)
N_STARTS = 5

SQRT5 = np.sqrt(5.0)


@dataclass(frozen=True)
class GpHyperparameters:
    """Kernel hyperparameters.  ``nugget`` is fixed, not fitted."""

    lengthscales: np.ndarray
    signal_variance: float
    nugget: float = NUGGET

    def __post_init__(self):
        ls = np.atleast_1d(np.asarray(self.lengthscales, dtype=float))
        object.__setattr__(self, "lengthscales", ls)
        if not np.all(np.isfinite(ls)) or np.any(ls <= 0):
            raise InvalidArgumentError("lengthscales must be positive and finite")
        if not np.isfinite(self.signal_variance) or self.signal_variance <= 0:
            raise InvalidArgumentError("signal_variance must be positive and finite")


@dataclass(frozen=True)
class PosteriorSummary:
    """Predictive mean and standard deviation at a single input."""

    mean: float
    sd: float


def _scaled_sqdist(A, B, lengthscales):
    """Pairwise squared anisotropic distance, shape (len(A), len(B))."""
    As = A / lengthscales
    Bs = B / lengthscales
    d2 = (
        np.sum(As**2, axis=1)[:, None]
        + np.sum(Bs**2, axis=1)[None, :]
        - 2.0 * As @ Bs.T
    )
    return np.maximum(d2, 0.0)


def _matern52_from_rho(rho, signal_variance):
    return signal_variance * (1.0 + SQRT5 * rho + 5.0 * rho**2 / 3.0) * np.exp(
        -SQRT5 * rho
    )


def kernel_matrix(A, B, hp: GpHyperparameters) -> np.ndarray:
    """Matern-5/2 cross-covariance matrix between row sets A and B."""
    rho = np.sqrt(_scaled_sqdist(np.atleast_2d(A), np.atleast_2d(B), hp.lengthscales))
    return _matern52_from_rho(rho, hp.signal_variance)


def matern52(x, x2, hp: GpHyperparameters) -> float:
    """Matern-5/2 covariance between two points."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    x2 = np.atleast_1d(np.asarray(x2, dtype=float))
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(x2))):
        raise InvalidArgumentError("non-finite kernel inputs")
    rho = np.sqrt(np.sum(((x - x2) / hp.lengthscales) ** 2))
    return float(_matern52_from_rho(rho, hp.signal_variance))


def _cholesky_with_jitter(K, nugget):
    """Cholesky of K + nugget*I, escalating jitter on failure."""
    n = K.shape[0]
    base = K + nugget * np.eye(n)
    for jitter in (0.0,) + JITTER_LADDER:
        try:
            return linalg.cholesky(base + jitter * np.eye(n), lower=True), jitter
        except linalg.LinAlgError:
            continue
    diag = np.diag(K)
    raise NumericalFailureError(
        "covariance factorization failed after jitter escalation",
        diagnostics={
            "n": n,
            "max_diag": float(diag.max()) if n else np.nan,
            "min_diag": float(diag.min()) if n else np.nan,
        },
    )


class FittedGp:
    """An immutable fitted GP: safe for concurrent read-only prediction."""

    def __init__(self, X, y, hp: GpHyperparameters):
        self.X = np.atleast_2d(np.asarray(X, dtype=float))
        self.y = np.asarray(y, dtype=float).ravel()
        self.hp = hp
        self.y_mean = float(np.mean(self.y))
        yc = self.y - self.y_mean
        K = kernel_matrix(self.X, self.X, hp)
        self._L, self._jitter = _cholesky_with_jitter(K, hp.nugget)
        self._alpha = linalg.cho_solve((self._L, True), yc)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]

    def predict_batch(self, Xstar):
        """Vectorized predictive means and SDs at the rows of Xstar."""
        Xstar = np.atleast_2d(np.asarray(Xstar, dtype=float))
        ks = kernel_matrix(Xstar, self.X, self.hp)
        # The simulators are deterministic: at a test point coinciding with a
        # training input, fold the nugget into the cross-covariance so the
        # prediction reproduces the observation instead of a nugget-smoothed
        # value.
        d2 = np.sum((Xstar[:, None, :] - self.X[None, :, :]) ** 2, axis=-1)
        ks = ks + np.where(d2 < 1e-24, self.hp.nugget, 0.0)
        mean = self.y_mean + ks @ self._alpha
        v = linalg.solve_triangular(self._L, ks.T, lower=True)
        var = self.hp.signal_variance - np.sum(v**2, axis=0)
        # Deterministic responses: predictive variance never drops below the
        # nugget, and the SD is floored before any CDF arithmetic.
        var = np.maximum(var, self.hp.nugget)
        sd = np.maximum(np.sqrt(var), SD_FLOOR)
        return mean, sd

    def predict(self, xstar) -> PosteriorSummary:
        mean, sd = self.predict_batch(np.atleast_2d(xstar))
        return PosteriorSummary(float(mean[0]), float(sd[0]))

    def log_interval_probability_batch(self, Xstar, lo, hi):
        mean, sd = self.predict_batch(Xstar)
        return log_gaussian_interval(mean, sd, lo, hi)

    def log_likelihood(self) -> float:
        """Log marginal likelihood at the fitted hyperparameters."""
        yc = self.y - self.y_mean
        return float(
            -0.5 * yc @ self._alpha
            - np.sum(np.log(np.diag(self._L)))
            - 0.5 * self.n * np.log(2.0 * np.pi)
        )


def gaussian_interval(mean, sd, lo, hi):
    """P(lo <= Z <= hi) for Z ~ N(mean, sd^2); vectorized over mean/sd."""
    if np.any(np.asarray(lo) > np.asarray(hi)):
        raise InvalidArgumentError("interval requires lo <= hi")
    sd = np.maximum(sd, SD_FLOOR)
    return ndtr((hi - mean) / sd) - ndtr((lo - mean) / sd)


# Finite stand-in for log(0): far below log of the smallest positive double.
LOG_PROB_FLOOR = -1e300


def log_gaussian_interval(mean, sd, lo, hi):
    """log P(lo <= Z <= hi), stable for tiny tail probabilities.

    Uses log-CDF pairs combined as ln(a) + ln(1 - exp(ln b - ln a)), which
    stays finite and monotone down to probabilities around 1e-300.  Exact
    zeros (lo == hi, or total underflow) are floored at a finite value.
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    if np.any(lo > hi):
        raise InvalidArgumentError("interval requires lo <= hi")
    mean = np.asarray(mean, dtype=float)
    sd = np.maximum(np.asarray(sd, dtype=float), SD_FLOOR)
    zhi = (hi - mean) / sd
    zlo = (lo - mean) / sd
    # Work in whichever tail keeps both log-CDFs well-scaled: P(lo<Z<hi)
    # is the same interval for -Z with endpoints swapped and negated.
    flip = (zlo + zhi) > 0
    a = np.where(flip, log_ndtr(-zlo), log_ndtr(zhi))
    b = np.where(flip, log_ndtr(-zhi), log_ndtr(zlo))
    with np.errstate(divide="ignore", invalid="ignore"):
        out = a + np.log(-np.expm1(np.minimum(b - a, 0.0)))
    out = np.where(np.isnan(out) | np.isneginf(out), LOG_PROB_FLOOR, out)
    return out


def interval_probability(summary: PosteriorSummary, lo: float, hi: float) -> float:
    """P(lo <= f(x*) <= hi) under the Gaussian predictive summary."""
    return float(gaussian_interval(summary.mean, summary.sd, lo, hi))


def log_interval_probability(summary: PosteriorSummary, lo: float, hi: float) -> float:
    """Log-space companion of :func:`interval_probability`."""
    return float(log_gaussian_interval(summary.mean, summary.sd, lo, hi))


def _nll_and_grad(theta, X, yc, sqdiffs, nugget):
    """Negative log marginal likelihood and gradient in log-hyperparameter space.

    theta = [log lengthscales (d), log signal_variance]; sqdiffs is the
    precomputed (n, n, d) array of squared coordinate differences.
    """
    n, d = X.shape
    ls = np.exp(theta[:d])
    sv = np.exp(theta[d])
    rho2 = sqdiffs @ (1.0 / ls**2)
    rho = np.sqrt(np.maximum(rho2, 0.0))
    E = np.exp(-SQRT5 * rho)
    K = sv * (1.0 + SQRT5 * rho + 5.0 * rho2 / 3.0) * E + nugget * np.eye(n)
    try:
        L = linalg.cholesky(K, lower=True)
    except linalg.LinAlgError:
        return np.inf, np.zeros(d + 1)
    alpha = linalg.cho_solve((L, True), yc)
    nll = (
        0.5 * yc @ alpha
        + np.sum(np.log(np.diag(L)))
        + 0.5 * n * np.log(2.0 * np.pi)
    )
    Kinv = linalg.cho_solve((L, True), np.eye(n))
    W = np.outer(alpha, alpha) - Kinv  # d(LML)/dK = 0.5 * W
    grad = np.empty(d + 1)
    # dK/d(log ls_k) = sv * E * (5/3)(1 + sqrt5 rho) * sqdiff_k / ls_k^2
    common = sv * E * (5.0 / 3.0) * (1.0 + SQRT5 * rho)
    for k in range(d):
        dK = common * (sqdiffs[:, :, k] / ls[k] ** 2)
        grad[k] = -0.5 * np.sum(W * dK)
    dK_sv = K - nugget * np.eye(n)  # dK/d(log sv) = sv * C = K - nugget I
    grad[d] = -0.5 * np.sum(W * dK_sv)
    return nll, grad


def fit_gp(X, y, rng) -> FittedGp:
    """MLE fit of kernel hyperparameters by multi-start bounded optimization.

    ``rng`` may be a seed or a Generator; results are deterministic given it.
    """
    rng = np.random.default_rng(rng)
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float).ravel()
    n, d = X.shape
    if n < 2:
        raise InvalidArgumentError("fit_gp requires n >= 2")
    yc = y - np.mean(y)
    sqdiffs = (X[:, None, :] - X[None, :, :]) ** 2
    lo = np.log(np.array([LENGTHSCALE_BOUNDS[0]] * d + [VARIANCE_BOUNDS[0]]))
    hi = np.log(np.array([LENGTHSCALE_BOUNDS[1]] * d + [VARIANCE_BOUNDS[1]]))
    starts = lo + lhs(N_STARTS, d + 1, rng) * (hi - lo)
    best_theta, best_nll = None, np.inf
    for theta0 in starts:
        res = optimize.minimize(
            _nll_and_grad,
            theta0,
            args=(X, yc, sqdiffs, NUGGET),
            jac=True,
            method="L-BFGS-B",
            bounds=list(zip(lo, hi)),
        )
        if np.isfinite(res.fun) and res.fun < best_nll:
            best_theta, best_nll = res.x, res.fun
    if best_theta is None:
        raise NumericalFailureError(
            "all likelihood optimizations failed",
            diagnostics={"n": n, "d": d},
        )
    hp = GpHyperparameters(
        lengthscales=np.exp(best_theta[:d]),
        signal_variance=float(np.exp(best_theta[d])),
    )
    return FittedGp(X, y, hp)


def predict(model: FittedGp, xstar) -> PosteriorSummary:
    """Predictive summary at a single point (module-level convenience)."""
    return model.predict(xstar)
