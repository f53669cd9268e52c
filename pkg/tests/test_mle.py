import math

import numpy as np
import pytest
from scipy.special import expit

from jacobiprior.errors import InvalidResponseError, SeparationError
from jacobiprior.mle import fit_mle, mle_score


def test_intercept_only_balanced_logit():
    X = np.ones((10, 1))
    y = np.array([1.0] * 5 + [0.0] * 5)
    fit = fit_mle(X, y, "logit")
    assert fit.converged
    np.testing.assert_allclose(fit.beta, [0.0], atol=1e-8)


def test_intercept_only_poisson_log_mean():
    X = np.ones((6, 1))
    y = np.array([4.0] * 6)
    fit = fit_mle(X, y, "poisson")
    assert fit.converged
    np.testing.assert_allclose(fit.beta, [math.log(4.0)], atol=1e-8)


def test_perfectly_separable_pair_raises():
    # intercept plus feature: any threshold between the two x values separates
    X = np.array([[1.0, 1.0], [1.0, 2.0]])
    y = np.array([0.0, 1.0])
    with pytest.raises(SeparationError):
        fit_mle(X, y, "logit")


def test_score_zero_at_convergence():
    rng = np.random.default_rng(21)
    X = rng.standard_normal((200, 3))
    y = (rng.random(200) < expit(X @ np.array([0.5, -0.3, 0.2]))).astype(float)
    fit = fit_mle(X, y, "logit")
    assert fit.converged
    assert np.max(np.abs(mle_score(X, y, fit.beta, "logit"))) <= 1e-8


def test_analytic_score_matches_finite_differences():
    rng = np.random.default_rng(22)
    X = rng.standard_normal((50, 3))
    y = (rng.random(50) < 0.5).astype(float)
    beta = np.array([0.1, -0.2, 0.3])

    def loglik(b):
        eta = X @ b
        return float(np.sum(y * eta - np.logaddexp(0.0, eta)))

    analytic = mle_score(X, y, beta, "logit")
    h = 1e-6
    fd = np.array([
        (loglik(beta + h * e) - loglik(beta - h * e)) / (2 * h)
        for e in np.eye(3)
    ])
    np.testing.assert_allclose(analytic, fd, rtol=1e-5)


def test_poisson_score_matches_finite_differences():
    rng = np.random.default_rng(23)
    X = rng.standard_normal((50, 2))
    y = rng.poisson(1.5, 50).astype(float)
    beta = np.array([0.2, -0.1])

    def loglik(b):
        eta = X @ b
        return float(np.sum(y * eta - np.exp(eta)))

    analytic = mle_score(X, y, beta, "poisson")
    h = 1e-6
    fd = np.array([
        (loglik(beta + h * e) - loglik(beta - h * e)) / (2 * h)
        for e in np.eye(2)
    ])
    np.testing.assert_allclose(analytic, fd, rtol=1e-5)


def test_consistency_on_large_sample():
    rng = np.random.default_rng(24)
    beta0 = np.array([0.8, -0.5, 0.3])
    X = rng.standard_normal((10_000, 3))
    y = (rng.random(10_000) < expit(X @ beta0)).astype(float)
    fit = fit_mle(X, y, "logit")
    assert fit.converged
    assert np.linalg.norm(fit.beta - beta0) / np.linalg.norm(beta0) <= 0.1


def test_invalid_family_and_response():
    with pytest.raises(InvalidResponseError):
        fit_mle(np.ones((3, 1)), np.array([0.0, 1.0, 0.0]), "probit")
    with pytest.raises(InvalidResponseError):
        fit_mle(np.ones((3, 1)), np.array([0.0, 2.0, 0.0]), "logit")


def test_deviance_decreases_to_optimum():
    rng = np.random.default_rng(25)
    X = np.column_stack([np.ones(80), rng.standard_normal(80)])
    y = (rng.random(80) < expit(0.3 + 0.7 * X[:, 1])).astype(float)
    fit = fit_mle(X, y, "logit")
    eta = X @ fit.beta
    saturated = 2.0 * float(np.sum(np.logaddexp(0.0, eta) - y * eta))
    assert fit.deviance == pytest.approx(saturated, rel=1e-10)
    null_dev = 2.0 * float(np.sum(np.logaddexp(0.0, np.zeros(80)) - y * 0.0))
    assert fit.deviance < null_dev
