"""Closed-form latent posterior modes and the projection GLM fit.

The estimator works per observation: a conjugate prior on the natural
parameter induces a posterior on the linear predictor eta_i through
the link's Jacobian, whose mode has a closed form for the logit and
log links and is a cheap 1-D optimization for the probit link. The
coefficient vector is then the least-squares projection of the latent
mode vector onto the column space of the design, so fitting costs one
QR factorization and no iterative optimization over beta.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import expit, log_ndtr, ndtr

from .errors import (
    DimensionMismatchError,
    ImproperPosteriorError,
    InvalidHyperError,
    InvalidResponseError,
    NoConvergenceError,
)
from .linalg import LeastSquaresSolver, as_matrix, stable_matvec

FAMILIES = ("logit", "probit", "poisson")

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


def validate_family(family: str) -> str:
    if family not in FAMILIES:
        raise InvalidResponseError(f"unknown family {family!r}, expected one of {FAMILIES}")
    return family


@dataclass(frozen=True)
class JacobiHyper:
    """Prior shape pair (a, b), either fixed or resolved to (1/n, 1/n) at fit time.

    The vanishing schedule is what makes the estimator consistent: the
    normalized log-prior contribution is O(1/n) and drops out of the
    limiting objective, while any fixed (a, b) leaves a persistent
    shrinkage bias.
    """

    a: float = 0.5
    b: float = 0.5
    schedule: str = "fixed"

    def __post_init__(self):
        if self.schedule not in ("fixed", "one_over_n"):
            raise InvalidHyperError(f"unknown schedule {self.schedule!r}")
        if not (self.a > 0 and self.b > 0):
            raise InvalidHyperError(f"need a > 0 and b > 0, got a={self.a}, b={self.b}")

    def resolve(self, n: int) -> tuple[float, float]:
        """Effective (a, b) for a training set of size n."""
        if self.schedule == "one_over_n":
            if n < 1:
                raise InvalidHyperError("one_over_n schedule needs n >= 1")
            return (1.0 / n, 1.0 / n)
        return (self.a, self.b)


def default_hyper(family: str) -> JacobiHyper:
    """Library defaults: (1/2, 1/2) for binary families, (1, 1) for counts."""
    validate_family(family)
    if family == "poisson":
        return JacobiHyper(1.0, 1.0)
    return JacobiHyper(0.5, 0.5)


@dataclass
class FittedGLM:
    """Projection fit: beta is the least-squares image of the latent modes."""

    beta: np.ndarray
    family: str
    hyper: JacobiHyper
    eta_hat: np.ndarray
    n_train: int


def _check_binary_scalar(y) -> int:
    if y not in (0, 1, 0.0, 1.0):
        raise InvalidResponseError(f"binary response must be 0 or 1, got {y!r}")
    return int(y)


def logit_mode(y, a: float, b: float) -> float:
    """Posterior mode of eta for a Bernoulli observation under the logit link.

    Equals log((y + a) / (b + 1 - y)); a Beta(a, b) prior on the
    success probability updated by y, transported to the log-odds
    scale.
    """
    y = _check_binary_scalar(y)
    num = y + a
    den = b + 1.0 - y
    if num <= 0 or den <= 0:
        raise InvalidHyperError(f"need y + a > 0 and b + 1 - y > 0, got {num}, {den}")
    return math.log(num / den)


def poisson_mode(y, a: float, b: float) -> float:
    """Posterior mode of eta for a Poisson count under the log link.

    Equals log((y + a) / (1 + b)); a Gamma(a, rate b) prior on the
    rate updated by y, transported to the log scale.
    """
    if y < 0 or y != int(y):
        raise InvalidResponseError(f"count response must be a non-negative integer, got {y!r}")
    num = y + a
    den = 1.0 + b
    if num <= 0:
        raise InvalidHyperError(f"need y + a > 0, got {num}")
    if den <= 0:
        raise InvalidHyperError(f"need 1 + b > 0, got {den}")
    return math.log(num / den)


def _probit_grad_hess(eta: float, c1: float, c2: float) -> tuple[float, float]:
    # log-posterior L(eta) = c1*log Phi(eta) + c2*log(1 - Phi(eta)) - eta^2/2
    log_phi = -0.5 * eta * eta - _LOG_SQRT_2PI
    r1 = math.exp(log_phi - log_ndtr(eta))       # phi/Phi
    r2 = math.exp(log_phi - log_ndtr(-eta))      # phi/(1 - Phi)
    grad = c1 * r1 - c2 * r2 - eta
    hess = -c1 * r1 * (eta + r1) - c2 * r2 * (r2 - eta) - 1.0
    return grad, hess


def probit_mode(
    y,
    a: float,
    b: float,
    tol: float = 1e-10,
    max_iter: int = 200,
    bracket: float = 12.0,
) -> float:
    """Posterior mode of eta for a Bernoulli observation under the probit link.

    Maximizes Phi(eta)^(y+a-1) * (1-Phi(eta))^(b-y) * phi(eta) by
    safeguarded Newton iteration started at 0. The squared-exponential
    factor phi(eta) forces the log-posterior to -inf at both ends, so
    a sign change of the gradient is guaranteed inside
    [-bracket, bracket] for any valid (y, a, b).
    """
    y = _check_binary_scalar(y)
    if y + a <= 0 or b - y + 1.0 <= 0:
        raise ImproperPosteriorError(
            f"posterior Beta({y + a}, {b - y + 1.0}) has a non-positive shape"
        )
    c1 = y + a - 1.0
    c2 = b - y
    lo, hi = -bracket, bracket
    g_lo, _ = _probit_grad_hess(lo, c1, c2)
    g_hi, _ = _probit_grad_hess(hi, c1, c2)
    if not (g_lo > 0 > g_hi):
        raise NoConvergenceError(
            f"gradient does not bracket a maximum on [{lo}, {hi}] for y={y}, a={a}, b={b}"
        )
    eta = 0.0
    for _ in range(max_iter):
        grad, hess = _probit_grad_hess(eta, c1, c2)
        if abs(grad) <= tol:
            return eta
        if grad > 0:
            lo = eta
        else:
            hi = eta
        if hess < 0:
            step = eta - grad / hess
        else:
            step = math.nan
        # Fall back to bisection whenever Newton leaves the bracket.
        eta = step if (lo < step < hi) else 0.5 * (lo + hi)
    raise NoConvergenceError(f"probit mode did not reach |grad| <= {tol} in {max_iter} iterations")


def _validate_binary_vector(y: np.ndarray):
    bad = np.nonzero((y != 0.0) & (y != 1.0))[0]
    if bad.size:
        i = int(bad[0])
        raise InvalidResponseError(f"binary response must be 0 or 1; offending index {i}: {y[i]!r}")


def _validate_count_vector(y: np.ndarray):
    bad = np.nonzero((y < 0) | (y != np.floor(y)))[0]
    if bad.size:
        i = int(bad[0])
        raise InvalidResponseError(
            f"count response must be a non-negative integer; offending index {i}: {y[i]!r}"
        )


def latent_vector(y, family: str, hyper: JacobiHyper | None = None) -> np.ndarray:
    """Element-wise posterior modes for a response vector.

    Resolves the one_over_n schedule using len(y). Binary families
    only take two distinct values, so the probit optimization runs at
    most twice regardless of n.
    """
    validate_family(family)
    y = np.asarray(y, dtype=float)
    if y.ndim != 1:
        raise DimensionMismatchError(f"y must be 1-d, got ndim={y.ndim}")
    n = y.shape[0]
    if hyper is None:
        hyper = default_hyper(family)
    a, b = hyper.resolve(n)
    if family == "poisson":
        if not np.all(np.isfinite(y)):
            raise DimensionMismatchError("y contains non-finite entries")
        _validate_count_vector(y)
        if np.any(y + a <= 0):
            raise InvalidHyperError("need y + a > 0 for all counts")
        return np.log((y + a) / (1.0 + b))
    is_one = y == 1.0
    if not np.all(is_one | (y == 0.0)):
        _validate_binary_vector(y)  # raises with the offending index
    if family == "logit":
        mode0 = logit_mode(0, a, b)
        mode1 = logit_mode(1, a, b)
    else:
        mode0 = probit_mode(0, a, b)
        mode1 = probit_mode(1, a, b)
    return np.where(is_one, mode1, mode0)


def fit_jacobi(X, y, family: str, hyper: JacobiHyper | None = None) -> FittedGLM:
    """Fit the projection estimator: beta solves min ||X beta - eta_hat||."""
    solver = LeastSquaresSolver(X)
    if hyper is None:
        hyper = default_hyper(family)
    eta_hat = latent_vector(y, family, hyper)
    beta = solver.solve(eta_hat)
    return FittedGLM(beta=beta, family=family, hyper=hyper, eta_hat=eta_hat, n_train=solver.n)


def predict_linear(model: FittedGLM, X0) -> np.ndarray:
    X0 = as_matrix(X0, "X0")
    if X0.shape[1] != model.beta.shape[0]:
        raise DimensionMismatchError(
            f"X0 has {X0.shape[1]} columns, model expects {model.beta.shape[0]}"
        )
    return stable_matvec(X0, model.beta)


def inverse_link(eta: np.ndarray, family: str) -> np.ndarray:
    validate_family(family)
    if family == "logit":
        return expit(eta)
    if family == "probit":
        return ndtr(eta)
    return np.exp(eta)


def predict(model: FittedGLM, X0) -> np.ndarray:
    """Mean-scale predictions: probabilities for binary families, rates for counts."""
    return inverse_link(predict_linear(model, X0), model.family)
