"""Two-layer deep Gaussian process with fully Bayesian inference.

The latent layer warps the d-dimensional input space through d independent
GPs (one per latent column, prior mean = identity) and an outer GP maps the
warped inputs to the response.  Latent columns are updated by elliptical
slice sampling; kernel hyperparameters by random-walk Metropolis-Hastings on
the log scale, with step sizes tuned during burn-in toward ~30% acceptance.

Prediction pipes each retained sample's inner predictive *mean* through the
outer GP conditional and aggregates the per-sample Gaussians by moment
matching.  Interval probabilities average the per-sample Gaussian interval
probabilities rather than using the moment-matched Gaussian.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg
from scipy.special import logsumexp

from .acquisition import McmcSettings
from .errors import InvalidArgumentError, NumericalFailureError
from .gp import (
    LENGTHSCALE_BOUNDS,
    NUGGET,
    SD_FLOOR,
    SQRT5,
    VARIANCE_BOUNDS,
    GpHyperparameters,
    PosteriorSummary,
    gaussian_interval,
    log_gaussian_interval,
)

MH_TARGET_ACCEPT = 0.30
_ADAPT_EVERY = 25

_LOG_LS_BOUNDS = np.log(LENGTHSCALE_BOUNDS)
_LOG_VAR_BOUNDS = np.log(VARIANCE_BOUNDS)


def ess_step(current, prior_cov, log_lik, rng):
    """One elliptical slice sampling update for a zero-mean Gaussian prior.

    Never rejects; returns the new latent vector.  Deterministic given the
    rng state.
    """
    prior_cov = np.asarray(prior_cov, dtype=float)
    try:
        chol = linalg.cholesky(prior_cov, lower=True)
    except linalg.LinAlgError as exc:
        raise NumericalFailureError("prior covariance not positive-definite") from exc
    new, _ = _ess_step_chol(np.asarray(current, dtype=float), chol, log_lik, rng)
    return new


def _ess_step_chol(current, prior_chol, log_lik, rng, cur_ll=None):
    nu = prior_chol @ rng.standard_normal(len(current))
    if cur_ll is None:
        cur_ll = log_lik(current)
    threshold = cur_ll + np.log(rng.random())
    theta = rng.random() * 2.0 * np.pi
    lo, hi = theta - 2.0 * np.pi, theta
    while True:
        proposal = current * np.cos(theta) + nu * np.sin(theta)
        ll = log_lik(proposal)
        if ll > threshold:
            return proposal, ll
        if theta < 0:
            lo = theta
        else:
            hi = theta
        theta = lo + rng.random() * (hi - lo)


def _matern52_cov(sqdiffs, log_params, nugget):
    """Matern-5/2 covariance from precomputed (n, n, d) squared diffs."""
    d = sqdiffs.shape[-1]
    ls2 = np.exp(2.0 * log_params[:d])
    sv = np.exp(log_params[d])
    rho2 = sqdiffs @ (1.0 / ls2)
    rho = np.sqrt(np.maximum(rho2, 0.0))
    K = sv * (1.0 + SQRT5 * rho + 5.0 * rho2 / 3.0) * np.exp(-SQRT5 * rho)
    return K + nugget * np.eye(K.shape[0])


def _gauss_loglik(resid, K):
    """ln N(resid | 0, K); -inf if K is not factorizable."""
    try:
        L = linalg.cholesky(K, lower=True)
    except linalg.LinAlgError:
        return -np.inf, None
    a = linalg.solve_triangular(L, resid, lower=True)
    ll = -0.5 * a @ a - np.sum(np.log(np.diag(L))) - 0.5 * len(resid) * np.log(2 * np.pi)
    return ll, L


def _in_bounds(log_params):
    d = len(log_params) - 1
    ls_ok = np.all(log_params[:d] >= _LOG_LS_BOUNDS[0]) and np.all(
        log_params[:d] <= _LOG_LS_BOUNDS[1]
    )
    var_ok = _LOG_VAR_BOUNDS[0] <= log_params[d] <= _LOG_VAR_BOUNDS[1]
    return ls_ok and var_ok


@dataclass(frozen=True)
class DgpSample:
    """One retained posterior sample of the latent layer and hyperparameters."""

    W: np.ndarray
    inner: tuple  # d GpHyperparameters, one per latent column
    outer: GpHyperparameters


class DgpPosterior:
    """Retained MCMC samples plus cached per-sample prediction quantities.

    Immutable after construction; safe for concurrent prediction.
    """

    def __init__(self, X, y, samples, mcmc: McmcSettings, acceptance_rate: float):
        self.X = np.atleast_2d(np.asarray(X, dtype=float))
        self.y = np.asarray(y, dtype=float).ravel()
        if not samples:
            raise InvalidArgumentError("DgpPosterior requires at least one sample")
        self.samples = tuple(samples)
        self.mcmc = mcmc
        self.acceptance_rate = acceptance_rate
        self.y_mean = float(np.mean(self.y))
        self._build_caches()

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]

    @property
    def n_samples(self) -> int:
        return len(self.samples)

    def _build_caches(self):
        n, d, S = self.n, self.d, self.n_samples
        yc = self.y - self.y_mean
        self._inner_inv_ls2 = np.empty((d, S, d))
        self._inner_var = np.empty((d, S))
        self._inner_alpha = np.empty((d, S, n))
        self._W = np.empty((S, n, d))
        self._outer_inv_ls2 = np.empty((S, d))
        self._outer_var = np.empty(S)
        self._outer_alpha = np.empty((S, n))
        self._outer_kinv = np.empty((S, n, n))
        sqd_X = (self.X[:, None, :] - self.X[None, :, :]) ** 2
        eye = np.eye(n)
        for s, sample in enumerate(self.samples):
            self._W[s] = sample.W
            for j in range(d):
                hp = sample.inner[j]
                self._inner_inv_ls2[j, s] = 1.0 / hp.lengthscales**2
                self._inner_var[j, s] = hp.signal_variance
                logp = np.concatenate(
                    [np.log(hp.lengthscales), [np.log(hp.signal_variance)]]
                )
                K = _matern52_cov(sqd_X, logp, hp.nugget)
                L = linalg.cholesky(K, lower=True)
                self._inner_alpha[j, s] = linalg.cho_solve(
                    (L, True), sample.W[:, j] - self.X[:, j]
                )
            hp = sample.outer
            self._outer_inv_ls2[s] = 1.0 / hp.lengthscales**2
            self._outer_var[s] = hp.signal_variance
            sqd_W = (sample.W[:, None, :] - sample.W[None, :, :]) ** 2
            logp = np.concatenate(
                [np.log(hp.lengthscales), [np.log(hp.signal_variance)]]
            )
            K = _matern52_cov(sqd_W, logp, hp.nugget)
            L = linalg.cholesky(K, lower=True)
            self._outer_alpha[s] = linalg.cho_solve((L, True), yc)
            self._outer_kinv[s] = linalg.cho_solve((L, True), eye)

    @staticmethod
    def _matern_block(rho2, var):
        rho = np.sqrt(np.maximum(rho2, 0.0))
        return var * (1.0 + SQRT5 * rho + 5.0 * rho2 / 3.0) * np.exp(-SQRT5 * rho)

    def _per_sample_chunk(self, Xstar):
        """Per-sample predictive (mu, sd), each of shape (S, m)."""
        m = Xstar.shape[0]
        n, d, S = self.n, self.d, self.n_samples
        sqd = (Xstar[:, None, :] - self.X[None, :, :]) ** 2  # (m, n, d)
        wstar = np.empty((S, m, d))
        for j in range(d):
            rho2 = np.einsum("mnd,sd->smn", sqd, self._inner_inv_ls2[j])
            K = self._matern_block(rho2, self._inner_var[j][:, None, None])
            wstar[:, :, j] = Xstar[None, :, j] + np.einsum(
                "smn,sn->sm", K, self._inner_alpha[j]
            )
        diff2 = (wstar[:, :, None, :] - self._W[:, None, :, :]) ** 2  # (S, m, n, d)
        rho2 = np.einsum("smnd,sd->smn", diff2, self._outer_inv_ls2)
        K = self._matern_block(rho2, self._outer_var[:, None, None])
        mu = self.y_mean + np.einsum("smn,sn->sm", K, self._outer_alpha)
        quad = np.einsum("smn,snk,smk->sm", K, self._outer_kinv, K)
        var = np.maximum(self._outer_var[:, None] - quad, NUGGET)
        return mu, np.maximum(np.sqrt(var), SD_FLOOR)

    def per_sample_predict(self, Xstar, chunk: int = 256):
        Xstar = np.atleast_2d(np.asarray(Xstar, dtype=float))
        mus, sds = [], []
        for i in range(0, Xstar.shape[0], chunk):
            mu, sd = self._per_sample_chunk(Xstar[i : i + chunk])
            mus.append(mu)
            sds.append(sd)
        return np.concatenate(mus, axis=1), np.concatenate(sds, axis=1)

    def predict_batch(self, Xstar):
        """Moment-matched predictive mean and SD across retained samples."""
        mu, sd = self.per_sample_predict(Xstar)
        mean = mu.mean(axis=0)
        var = np.mean(sd**2 + mu**2, axis=0) - mean**2
        var = np.maximum(var, NUGGET)
        return mean, np.maximum(np.sqrt(var), SD_FLOOR)

    def predict(self, xstar) -> PosteriorSummary:
        mean, sd = self.predict_batch(np.atleast_2d(xstar))
        return PosteriorSummary(float(mean[0]), float(sd[0]))

    def interval_probability_batch(self, Xstar, lo, hi):
        """Sample-averaged Gaussian interval probabilities."""
        mu, sd = self.per_sample_predict(Xstar)
        return gaussian_interval(mu, sd, lo, hi).mean(axis=0)

    def log_interval_probability_batch(self, Xstar, lo, hi):
        mu, sd = self.per_sample_predict(Xstar)
        logs = log_gaussian_interval(mu, sd, lo, hi)
        return logsumexp(logs, axis=0) - np.log(self.n_samples)


class _BlockSampler:
    """Random-walk MH on the log hyperparameters of one covariance block."""

    def __init__(self, log_params, step=0.2):
        self.log_params = np.asarray(log_params, dtype=float)
        self.step = step
        self.proposals = 0
        self.accepts = 0
        self._window = [0, 0]

    def propose(self, rng):
        return self.log_params + self.step * rng.standard_normal(len(self.log_params))

    def record(self, accepted: bool):
        self.proposals += 1
        self._window[0] += 1
        if accepted:
            self.accepts += 1
            self._window[1] += 1

    def adapt(self):
        trials, hits = self._window
        if trials == 0:
            return
        rate = hits / trials
        self.step = float(np.clip(self.step * np.exp(rate - MH_TARGET_ACCEPT), 1e-3, 2.0))
        self._window = [0, 0]


def fit_dgp(X, y, mcmc: McmcSettings | None = None, seed=0) -> DgpPosterior:
    """Posterior sampling for the two-layer DGP on a single response column.

    Each sweep performs one ESS update of every latent column followed by MH
    updates of all kernel hyperparameter blocks.  Retains
    (n_iter - burn) / thin samples after burn-in and thinning.
    """
    mcmc = mcmc or McmcSettings()
    rng = np.random.default_rng(seed)
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float).ravel()
    n, d = X.shape
    if n < 2:
        raise InvalidArgumentError("fit_dgp requires n >= 2")
    yc = y - np.mean(y)

    sqd_X = (X[:, None, :] - X[None, :, :]) ** 2
    W = X.copy()  # identity warp start
    sqd_W = sqd_X.copy()

    inner_blocks = [
        _BlockSampler(np.concatenate([np.log(np.full(d, 1.0)), [np.log(0.01)]]))
        for _ in range(d)
    ]
    outer_block = _BlockSampler(
        np.concatenate([np.log(np.full(d, 0.5)), [np.log(1.0)]])
    )

    def outer_ll(sqd):
        K = _matern52_cov(sqd, outer_block.log_params, NUGGET)
        return _gauss_loglik(yc, K)[0]

    inner_chols = [None] * d
    inner_lls = [None] * d

    def refresh_inner(j):
        K = _matern52_cov(sqd_X, inner_blocks[j].log_params, NUGGET)
        L = linalg.cholesky(K, lower=True)
        inner_chols[j] = L
        resid = W[:, j] - X[:, j]
        a = linalg.solve_triangular(L, resid, lower=True)
        inner_lls[j] = float(
            -0.5 * a @ a - np.sum(np.log(np.diag(L))) - 0.5 * n * np.log(2 * np.pi)
        )

    for j in range(d):
        refresh_inner(j)

    samples = []
    cur_outer_ll = outer_ll(sqd_W)
    fail_streak = 0
    for it in range(mcmc.n_iter):
        # --- ESS update of each latent column ---
        for j in range(d):
            resid = W[:, j] - X[:, j]

            def column_ll(r, j=j):
                col = X[:, j] + r
                trial = sqd_W.copy()
                trial[:, :, j] = (col[:, None] - col[None, :]) ** 2
                return outer_ll(trial)

            resid, _ = _ess_step_chol(resid, inner_chols[j], column_ll, rng)
            W[:, j] = X[:, j] + resid
            sqd_W[:, :, j] = (W[:, j][:, None] - W[:, j][None, :]) ** 2
            refresh_inner(j)
        cur_outer_ll = outer_ll(sqd_W)
        if not np.isfinite(cur_outer_ll):
            fail_streak += 1
            if fail_streak > 10:
                raise NumericalFailureError("persistent factorization failure in DGP fit")
        else:
            fail_streak = 0

        # --- MH updates of hyperparameter blocks ---
        for j, block in enumerate(inner_blocks):
            prop = block.propose(rng)
            accepted = False
            if _in_bounds(prop):
                K = _matern52_cov(sqd_X, prop, NUGGET)
                ll, L = _gauss_loglik(W[:, j] - X[:, j], K)
                if np.log(rng.random()) < ll - inner_lls[j]:
                    block.log_params = prop
                    inner_chols[j] = L
                    inner_lls[j] = float(ll)
                    accepted = True
            block.record(accepted)
        prop = outer_block.propose(rng)
        accepted = False
        if _in_bounds(prop):
            K = _matern52_cov(sqd_W, prop, NUGGET)
            ll, _ = _gauss_loglik(yc, K)
            if np.log(rng.random()) < ll - cur_outer_ll:
                outer_block.log_params = prop
                cur_outer_ll = float(ll)
                accepted = True
        outer_block.record(accepted)

        if it < mcmc.burn and (it + 1) % _ADAPT_EVERY == 0:
            for block in inner_blocks + [outer_block]:
                block.adapt()

        if it >= mcmc.burn and (it - mcmc.burn) % mcmc.thin == 0:
            inner_hps = tuple(
                GpHyperparameters(
                    lengthscales=np.exp(b.log_params[:d]),
                    signal_variance=float(np.exp(b.log_params[d])),
                )
                for b in inner_blocks
            )
            outer_hp = GpHyperparameters(
                lengthscales=np.exp(outer_block.log_params[:d]),
                signal_variance=float(np.exp(outer_block.log_params[d])),
            )
            samples.append(DgpSample(W=W.copy(), inner=inner_hps, outer=outer_hp))

    blocks = inner_blocks + [outer_block]
    total_prop = sum(b.proposals for b in blocks)
    rate = sum(b.accepts for b in blocks) / total_prop if total_prop else 0.0
    return DgpPosterior(X, y, samples, mcmc, acceptance_rate=rate)


def predict_dgp(post: DgpPosterior, xstar) -> PosteriorSummary:
    """Moment-matched predictive summary at a single point."""
    return post.predict(xstar)


def interval_probability_dgp(post: DgpPosterior, xstar, lo, hi) -> float:
    """Sample-averaged P(lo <= f(x*) <= hi)."""
    if lo > hi:
        raise InvalidArgumentError("interval requires lo <= hi")
    return float(post.interval_probability_batch(np.atleast_2d(xstar), lo, hi)[0])
