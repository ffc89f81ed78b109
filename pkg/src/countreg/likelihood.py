"""Regression log-likelihoods, analytic scores, and link functions.

The mean equation uses a log link, theta_i = exp(x_i' beta); the hurdle
probability uses a logit link, phi_i = logistic(x_i' delta).  The dispersion
parameter is carried as log(r) so every parameter is unconstrained.

The negative binomial log-likelihood per observation is

    lnG(1/r + y) - lnG(1/r) - (1/r + y) log(1 + r theta) + y (log r + log theta)

plus the constant -lnG(y+1) when the full (cross-family comparable) value is
requested.  The hurdle log-likelihood separates into a binary part, which
depends only on delta, and a zero-truncated part in (beta, log r); the two
blocks maximize independently.

Observation sums run in natural (row) order, so repeated evaluation of the
same inputs is bit-stable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .special import digamma, ln_gamma, ln_gamma_ratio

__all__ = [
    "NbRegParams",
    "HnbRegParams",
    "link_mean",
    "link_hurdle",
    "poisson_loglik",
    "poisson_score",
    "nb_loglik",
    "nb_score",
    "hnb_loglik",
    "hnb_loglik_parts",
    "hnb_score",
]

LINEAR_PREDICTOR_BOUND = 700.0


@dataclass(frozen=True)
class NbRegParams:
    """Mean-equation coefficients plus unconstrained log dispersion."""

    beta: np.ndarray
    log_r: float

    def __post_init__(self):
        if not np.all(np.isfinite(self.beta)) or not np.isfinite(self.log_r):
            raise ValueError("parameters must be finite")

    @property
    def r(self) -> float:
        return float(np.exp(self.log_r))


@dataclass(frozen=True)
class HnbRegParams:
    """Truncated-part parameters plus hurdle-equation coefficients."""

    nb: NbRegParams
    delta: np.ndarray

    def __post_init__(self):
        if not np.all(np.isfinite(self.delta)):
            raise ValueError("parameters must be finite")


def _check_dims(X, coef, name):
    if X.ndim != 2 or X.shape[1] != coef.shape[0]:
        raise ValueError(
            f"dimension mismatch: {name} design is {X.shape}, coefficients {coef.shape}"
        )


def link_mean(X, beta) -> np.ndarray:
    """theta_i = exp(x_i' beta); linear predictor clamped to +-700."""
    beta = np.asarray(beta, dtype=float)
    _check_dims(X, beta, "mean")
    eta = np.clip(X @ beta, -LINEAR_PREDICTOR_BOUND, LINEAR_PREDICTOR_BOUND)
    return np.exp(eta)


def link_hurdle(X_h, delta) -> np.ndarray:
    """phi_i = logistic(x_i' delta), kept strictly inside (0, 1)."""
    delta = np.asarray(delta, dtype=float)
    _check_dims(X_h, delta, "hurdle")
    eta = np.clip(X_h @ delta, -LINEAR_PREDICTOR_BOUND, LINEAR_PREDICTOR_BOUND)
    return np.exp(-np.logaddexp(0.0, -eta))


def _clamped_eta(X, beta):
    return np.clip(X @ np.asarray(beta, dtype=float), -LINEAR_PREDICTOR_BOUND, LINEAR_PREDICTOR_BOUND)


def _validate_response(y):
    y = np.asarray(y)
    if np.any(y < 0) or not np.all(np.equal(np.mod(y, 1), 0)):
        raise ValueError("response must contain nonnegative integers")
    return y.astype(float)


def poisson_loglik(beta, X, y, full: bool = True) -> float:
    """Poisson log-likelihood under the log link."""
    beta = np.asarray(beta, dtype=float)
    _check_dims(X, beta, "mean")
    y = _validate_response(y)
    eta = _clamped_eta(X, beta)
    value = float(np.sum(y * eta - np.exp(eta)))
    if full:
        value -= float(np.sum(ln_gamma(y + 1.0)))
    return value


def poisson_score(beta, X, y) -> np.ndarray:
    beta = np.asarray(beta, dtype=float)
    _check_dims(X, beta, "mean")
    y = _validate_response(y)
    theta = np.exp(_clamped_eta(X, beta))
    return X.T @ (y - theta)


# Above this value of a = 1/r the direct differences lose precision to
# cancellation, so Stirling-series forms of the differences take over.
_LARGE_SHAPE = 1e6


def _ln_gamma_diff(a, y):
    """ln Gamma(a+y) - ln Gamma(a), stable for arbitrarily large a."""
    if a > _LARGE_SHAPE:
        ly = np.log1p(y / a)
        return y * np.log(a) + (a + y - 0.5) * ly - y - y / (12.0 * a * (a + y))
    return ln_gamma(a + y) - ln_gamma(a)


def _digamma_diff(a, y):
    """psi(a+y) - psi(a), stable for arbitrarily large a."""
    if a > _LARGE_SHAPE:
        return (
            np.log1p(y / a)
            + y / (2.0 * a * (a + y))
            + y * (2.0 * a + y) / (12.0 * a * a * (a + y) ** 2)
        )
    return digamma(a + y) - digamma(a)


def _nb_gamma_terms(a, y, method):
    if method == "lngamma":
        return _ln_gamma_diff(a, y)
    if method == "ratio":
        return np.array([ln_gamma_ratio(a, int(v)) for v in y])
    raise ValueError(f"unknown gamma_terms method {method!r}")


def nb_loglik(params: NbRegParams, X, y, full: bool = True, gamma_terms: str = "lngamma") -> float:
    """Negative binomial regression log-likelihood.

    ``full=True`` includes the -sum lnGamma(y+1) constant so values are
    comparable across model families (needed for AIC); ``full=False`` drops
    it.  ``gamma_terms`` selects the evaluation route for the
    Gamma(1/r + y)/Gamma(1/r) term: vectorized log-gamma differences
    (default) or the log-product identity; the two agree to rounding.
    """
    _check_dims(X, params.beta, "mean")
    y = _validate_response(y)
    r = params.r
    a = 1.0 / r
    eta = _clamped_eta(X, params.beta)
    theta = np.exp(eta)
    log1prt = np.log1p(r * theta)
    terms = _nb_gamma_terms(a, y, gamma_terms) - (a + y) * log1prt + y * (params.log_r + eta)
    value = float(np.sum(terms))
    if full:
        value -= float(np.sum(ln_gamma(y + 1.0)))
    return value


def nb_score(params: NbRegParams, X, y) -> np.ndarray:
    """Analytic gradient of the NB log-likelihood in (beta, log r)."""
    _check_dims(X, params.beta, "mean")
    y = _validate_response(y)
    r = params.r
    a = 1.0 / r
    eta = _clamped_eta(X, params.beta)
    theta = np.exp(eta)
    denom = 1.0 + r * theta
    grad_beta = X.T @ ((y - theta) / denom)
    log1prt = np.log1p(r * theta)
    psi_term = _digamma_diff(a, y)
    dlogr = np.sum(-a * psi_term + a * log1prt - r * (a + y) * theta / denom + y)
    return np.concatenate([grad_beta, [float(dlogr)]])


def _truncated_nb_loglik_terms(params: NbRegParams, X, y, full):
    """Per-observation zero-truncated NB terms (rows must have y > 0)."""
    r = params.r
    a = 1.0 / r
    eta = _clamped_eta(X, params.beta)
    theta = np.exp(eta)
    log1prt = np.log1p(r * theta)
    log_p0 = -a * log1prt
    terms = (
        _ln_gamma_diff(a, y)
        - (a + y) * log1prt
        + y * (params.log_r + eta)
        - np.log1p(-np.exp(log_p0))
    )
    if full:
        terms = terms - ln_gamma(y + 1.0)
    return terms


def hnb_loglik_parts(params: HnbRegParams, X, X_h, y, full: bool = True):
    """(binary part, zero-truncated part) of the hurdle log-likelihood.

    The binary part depends only on delta; the truncated part only on
    (beta, log r).  Their sum is the joint log-likelihood.
    """
    _check_dims(X, params.nb.beta, "mean")
    _check_dims(X_h, params.delta, "hurdle")
    y = _validate_response(y)
    eta_h = np.clip(X_h @ params.delta, -LINEAR_PREDICTOR_BOUND, LINEAR_PREDICTOR_BOUND)
    zero = y == 0
    # log phi = -log(1+exp(-eta)), log(1-phi) = -log(1+exp(eta))
    log_phi = -np.logaddexp(0.0, -eta_h)
    log_phibar = -np.logaddexp(0.0, eta_h)
    binary = float(np.sum(np.where(zero, log_phi, log_phibar)))
    positive = ~zero
    if positive.any():
        truncated = float(
            np.sum(_truncated_nb_loglik_terms(params.nb, X[positive], y[positive], full))
        )
    else:
        truncated = 0.0
    return binary, truncated


def hnb_loglik(params: HnbRegParams, X, X_h, y, full: bool = True) -> float:
    binary, truncated = hnb_loglik_parts(params, X, X_h, y, full=full)
    return binary + truncated


def _truncated_nb_score(params: NbRegParams, X, y) -> np.ndarray:
    """(beta, log r) score of the zero-truncated NB part; rows must have y > 0."""
    r = params.r
    a = 1.0 / r
    eta = _clamped_eta(X, params.beta)
    theta = np.exp(eta)
    denom = 1.0 + r * theta
    log1prt = np.log1p(r * theta)
    p0 = np.exp(-a * log1prt)
    pbar0 = -np.expm1(-a * log1prt)
    grad_beta = X.T @ ((y - theta) / denom - theta * p0 / (denom * pbar0))
    psi_term = _digamma_diff(a, y)
    dlogr = float(
        np.sum(
            -a * psi_term
            + a * log1prt
            - r * (a + y) * theta / denom
            + y
            + p0 * (a * log1prt - theta / denom) / pbar0
        )
    )
    return np.concatenate([grad_beta, [dlogr]])


def hnb_score(params: HnbRegParams, X, X_h, y) -> np.ndarray:
    """Block gradient ordered (beta, log r, delta).

    The delta block depends only on the zero/positive pattern; the
    (beta, log r) block only on the positive-count rows.
    """
    _check_dims(X, params.nb.beta, "mean")
    _check_dims(X_h, params.delta, "hurdle")
    y = _validate_response(y)
    zero = y == 0
    phi = link_hurdle(X_h, params.delta)
    grad_delta = X_h.T @ (zero.astype(float) - phi)

    positive = ~zero
    k = params.nb.beta.shape[0]
    nb_block = np.zeros(k + 1)
    if positive.any():
        nb_block = _truncated_nb_score(params.nb, X[positive], y[positive])
    return np.concatenate([nb_block, grad_delta])
