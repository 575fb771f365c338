import numpy as np
import pytest

from jcontour.acquisition import McmcSettings
from jcontour.dgp import (
    DgpPosterior,
    DgpSample,
    ess_step,
    fit_dgp,
    interval_probability_dgp,
    predict_dgp,
)
from jcontour.errors import InvalidArgumentError, NumericalFailureError
from jcontour.gp import NUGGET, FittedGp, GpHyperparameters, fit_gp, gaussian_interval
from jcontour.sampling import maximin_lhs

FAST_MCMC = McmcSettings(n_iter=200, burn=100, thin=2)


def smooth_data(n=14, seed=2):
    rng = np.random.default_rng(seed)
    X = maximin_lhs(n, 2, rng)
    y = np.sin(4 * X[:, 0]) + (X[:, 1] - 0.3) ** 2
    return X, y


class TestEssStep:
    def test_determinism(self):
        cov = np.eye(4) * 2.0
        cur = np.array([0.5, -0.2, 0.1, 0.0])
        ll = lambda v: -0.5 * np.sum((v - 1.0) ** 2)
        a = ess_step(cur, cov, ll, np.random.default_rng(42))
        b = ess_step(cur, cov, ll, np.random.default_rng(42))
        assert np.array_equal(a, b)

    def test_conjugate_gaussian_posterior_mean(self):
        # prior N(0, I), likelihood N(m, s^2 I): posterior mean = m/(1+s^2)
        m, s2 = 1.5, 0.5
        rng = np.random.default_rng(0)
        v = np.zeros(3)
        ll = lambda w: -0.5 * np.sum((w - m) ** 2) / s2
        draws = []
        for _ in range(4000):
            v = ess_step(v, np.eye(3), ll, rng)
            draws.append(v.copy())
        est = np.mean(draws[500:])
        assert est == pytest.approx(m / (1 + s2), rel=0.1)

    def test_non_pd_prior_rejected(self):
        with pytest.raises(NumericalFailureError):
            ess_step(np.zeros(2), -np.eye(2), lambda v: 0.0, np.random.default_rng(0))


class TestFitDgp:
    def test_retention_arithmetic(self):
        X, y = smooth_data(8)
        post = fit_dgp(X, y, McmcSettings(n_iter=40, burn=20, thin=2), 0)
        assert post.n_samples == 10

    def test_default_retention_is_100(self):
        m = McmcSettings()
        assert (m.n_iter - m.burn) // m.thin == 100

    def test_acceptance_rate_in_working_band(self):
        X, y = smooth_data()
        post = fit_dgp(X, y, FAST_MCMC, 0)
        assert 0.05 < post.acceptance_rate < 0.95

    def test_determinism(self):
        X, y = smooth_data(10)
        a = fit_dgp(X, y, FAST_MCMC, np.random.default_rng(7))
        b = fit_dgp(X, y, FAST_MCMC, np.random.default_rng(7))
        assert np.array_equal(a.samples[-1].W, b.samples[-1].W)
        ma, _ = a.predict_batch(np.array([[0.4, 0.6]]))
        mb, _ = b.predict_batch(np.array([[0.4, 0.6]]))
        assert np.array_equal(ma, mb)

    def test_requires_two_points(self):
        with pytest.raises(InvalidArgumentError):
            fit_dgp(np.array([[0.5, 0.5]]), np.array([1.0]), FAST_MCMC, 0)

    def test_rmse_comparable_to_plain_gp_on_linear_function(self):
        rng = np.random.default_rng(102)
        X = maximin_lhs(25, 2, rng)
        f = lambda Z: 1.5 * Z[:, 0] - 0.7 * Z[:, 1] + 0.3
        y = f(X)
        Xt = rng.random((50, 2)) * 0.8 + 0.1
        yt = f(Xt)
        gp = fit_gp(X, y, np.random.default_rng(0))
        rmse_gp = np.sqrt(np.mean((gp.predict_batch(Xt)[0] - yt) ** 2))
        post = fit_dgp(X, y, McmcSettings(2000, 1000, 10), np.random.default_rng(0))
        rmse_dgp = np.sqrt(np.mean((post.predict_batch(Xt)[0] - yt) ** 2))
        assert rmse_dgp <= 2.0 * rmse_gp

    def test_interpolation_up_to_mc_averaging(self):
        X, y = smooth_data(12, seed=5)
        post = fit_dgp(X, y, McmcSettings(600, 300, 3), 1)
        mean, _ = post.predict_batch(X)
        assert np.max(np.abs(mean - y)) <= 1e-3


def identity_posterior(X, y, hp, n_copies=1):
    """DgpPosterior whose samples all carry W = X and the given outer hp."""
    d = X.shape[1]
    inner = tuple(
        GpHyperparameters(lengthscales=np.full(d, 1.0), signal_variance=0.01)
        for _ in range(d)
    )
    sample = DgpSample(W=X.copy(), inner=inner, outer=hp)
    return DgpPosterior(X, y, [sample] * n_copies, McmcSettings(), 0.3)


class TestPrediction:
    def test_identity_warp_reduces_to_plain_gp(self):
        X, y = smooth_data(10, seed=8)
        gp = fit_gp(X, y, np.random.default_rng(0))
        post = identity_posterior(X, y, gp.hp)
        Xs = np.random.default_rng(1).random((20, 2))
        mg, sg = gp.predict_batch(Xs)
        md, sd_ = post.predict_batch(Xs)
        assert np.max(np.abs(mg - md)) < 1e-8
        assert np.max(np.abs(sg - sd_)) < 1e-8
        pg = gaussian_interval(mg, sg, -0.1, 0.1)
        pd_ = post.interval_probability_batch(Xs, -0.1, 0.1)
        assert np.max(np.abs(pg - pd_)) < 1e-8

    def test_single_sample_moment_matching_is_identity(self):
        X, y = smooth_data(9, seed=3)
        post = fit_dgp(X, y, McmcSettings(n_iter=22, burn=20, thin=2), 0)
        assert post.n_samples == 1
        Xs = np.array([[0.3, 0.3], [0.8, 0.1]])
        mu_s, sd_s = post.per_sample_predict(Xs)
        mean, sd = post.predict_batch(Xs)
        assert np.allclose(mean, mu_s[0])
        assert np.allclose(sd, np.maximum(sd_s[0], np.sqrt(NUGGET)))

    def test_moment_matched_variance_dominates_mean_variance(self):
        X, y = smooth_data(12, seed=9)
        post = fit_dgp(X, y, FAST_MCMC, 3)
        Xs = np.random.default_rng(2).random((30, 2))
        mu_s, sd_s = post.per_sample_predict(Xs)
        _, sd = post.predict_batch(Xs)
        assert np.all(sd**2 >= np.mean(sd_s**2, axis=0) - 1e-12)

    def test_predict_dgp_single_point(self):
        X, y = smooth_data(9, seed=4)
        post = fit_dgp(X, y, FAST_MCMC, 0)
        s = predict_dgp(post, np.array([0.5, 0.5]))
        assert np.isfinite(s.mean) and s.sd > 0

    def test_chunked_prediction_matches_unchunked(self):
        X, y = smooth_data(10, seed=6)
        post = fit_dgp(X, y, FAST_MCMC, 2)
        Xs = np.random.default_rng(3).random((40, 2))
        a = post.per_sample_predict(Xs, chunk=7)
        b = post.per_sample_predict(Xs, chunk=1000)
        assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])


class TestIntervalProbability:
    def test_sample_mean_definition(self):
        X, y = smooth_data(10, seed=7)
        post = fit_dgp(X, y, FAST_MCMC, 1)
        Xs = np.array([[0.4, 0.7], [0.1, 0.1]])
        mu_s, sd_s = post.per_sample_predict(Xs)
        expected = gaussian_interval(mu_s, sd_s, -0.2, 0.2).mean(axis=0)
        got = post.interval_probability_batch(Xs, -0.2, 0.2)
        assert np.allclose(got, expected, atol=1e-12)

    def test_zero_width(self):
        X, y = smooth_data(9, seed=1)
        post = fit_dgp(X, y, FAST_MCMC, 0)
        assert interval_probability_dgp(post, np.array([0.5, 0.5]), 0.1, 0.1) == 0.0

    def test_lo_above_hi_rejected(self):
        X, y = smooth_data(9, seed=1)
        post = fit_dgp(X, y, FAST_MCMC, 0)
        with pytest.raises(InvalidArgumentError):
            interval_probability_dgp(post, np.array([0.5, 0.5]), 1.0, 0.0)

    def test_monotone_in_hi_and_bounded(self):
        X, y = smooth_data(11, seed=2)
        post = fit_dgp(X, y, FAST_MCMC, 2)
        Xs = np.random.default_rng(4).random((15, 2))
        prev = np.zeros(15)
        for hi in (-0.5, 0.0, 0.5, 1.0, 2.0):
            p = post.interval_probability_batch(Xs, -1.0, hi)
            assert np.all(p >= prev - 1e-12)
            assert np.all((p >= 0) & (p <= 1))
            prev = p

    def test_log_variant_consistent(self):
        X, y = smooth_data(10, seed=3)
        post = fit_dgp(X, y, FAST_MCMC, 4)
        Xs = np.random.default_rng(5).random((10, 2))
        p = post.interval_probability_batch(Xs, -0.3, 0.3)
        lp = post.log_interval_probability_batch(Xs, -0.3, 0.3)
        keep = p >= 1e-12
        assert np.allclose(np.exp(lp[keep]), p[keep], atol=1e-10)
