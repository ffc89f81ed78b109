"""Residual diagnostics and fitted-frequency tables.

Pearson residuals are (y - mu)/sigma under the fitted model's own mean and
variance; their squared sum is the Pearson statistic PS, which for a
well-specified model lands near the residual degrees of freedom
n - (number of free parameters).  NB deviance residuals are the signed
square roots of each observation's contribution to twice the
saturated-minus-fitted log-likelihood gap; both the signed sum (D) and the
conventional sum of squares are reported, each divided by the degrees of
freedom, because both conventions circulate.

Hurdle-model variances come from the truncated-moment computation in
:mod:`countreg.distributions`, never from the printed bracket form.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .distributions import HurdleParams, NbParams, hnb_mean_var
from .fit import FittedModel
from .likelihood import link_hurdle, link_mean

__all__ = ["ResidualSet", "pearson", "deviance_residuals", "frequency_table"]


@dataclass(frozen=True)
class ResidualSet:
    mu: np.ndarray
    sigma2: np.ndarray | None
    pearson: np.ndarray | None
    deviance: np.ndarray | None
    ps: float | None
    deviance_sum_signed: float | None
    deviance_sum_squared: float | None
    df: int


def _mean_params(model: FittedModel):
    beta = model.params_unconstrained[: model.k_mean]
    r = model.estimates.get("r")
    return beta, r


def _check_design(model: FittedModel, X, y):
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    if X.ndim != 2 or X.shape != (model.n, model.k_mean):
        raise ValueError(
            f"design shape {X.shape} does not match the fitted model "
            f"({model.n} x {model.k_mean})"
        )
    if y.shape != (model.n,):
        raise ValueError("response length does not match the fitted model")
    return X, y.astype(float)


def pearson(model: FittedModel, X, y, X_h=None) -> ResidualSet:
    """Pearson residuals and the PS statistic under the fitted model."""
    X, y = _check_design(model, X, y)
    beta, r = _mean_params(model)
    theta = link_mean(X, beta)
    if model.family == "P":
        mu, sigma2 = theta, theta.copy()
    elif model.family == "NB":
        mu, sigma2 = theta, theta + r * theta**2
    elif model.family == "HNB":
        if X_h is None:
            raise ValueError("HNB residuals need the hurdle design matrix")
        X_h = np.asarray(X_h, dtype=float)
        if X_h.shape != (model.n, model.k_hurdle):
            raise ValueError("hurdle design shape does not match the fitted model")
        delta = np.array([model.estimates[name] for name in model.hurdle_names])
        phi = link_hurdle(X_h, delta)
        mu = np.empty(model.n)
        sigma2 = np.empty(model.n)
        for i in range(model.n):
            mu[i], sigma2[i] = hnb_mean_var(
                HurdleParams(NbParams(float(theta[i]), r), float(phi[i]))
            )
    else:
        raise ValueError(f"unsupported family {model.family!r}")
    residuals = (y - mu) / np.sqrt(sigma2)
    return ResidualSet(
        mu=mu,
        sigma2=sigma2,
        pearson=residuals,
        deviance=None,
        ps=float(np.sum(residuals**2)),
        deviance_sum_signed=None,
        deviance_sum_squared=None,
        df=model.n - model.n_params,
    )


def deviance_residuals(model: FittedModel, X, y) -> ResidualSet:
    """Signed square-root deviance contributions for an NB fit.

    Positive counts contribute
    2*[y log(y/theta) - (y + 1/r) log((1+r y)/(1+r theta))]; zero counts
    contribute 2/r * log(1 + r theta).  The hurdle model is not a GLM, so no
    deviance is defined for it here.
    """
    if model.family != "NB":
        raise ValueError("deviance residuals are defined for the NB family only")
    X, y = _check_design(model, X, y)
    beta, r = _mean_params(model)
    theta = link_mean(X, beta)
    a = 1.0 / r
    d2 = np.empty(model.n)
    zero = y == 0
    d2[zero] = 2.0 * a * np.log1p(r * theta[zero])
    yp = y[~zero]
    tp = theta[~zero]
    d2[~zero] = 2.0 * (
        yp * np.log(yp / tp) - (yp + a) * (np.log1p(r * yp) - np.log1p(r * tp))
    )
    d2 = np.maximum(d2, 0.0)
    residuals = np.sign(y - theta) * np.sqrt(d2)
    return ResidualSet(
        mu=theta,
        sigma2=None,
        pearson=None,
        deviance=residuals,
        ps=None,
        deviance_sum_signed=float(np.sum(residuals)),
        deviance_sum_squared=float(np.sum(d2)),
        df=model.n - model.n_params,
    )


def _pmf_matrix_column(model, theta, phi, r, value):
    """P(Y = value | x_i) for every row, vectorized over rows."""
    from .special import ln_gamma, ln_gamma_ratio

    v = float(value)
    if model.family == "P":
        return np.exp(-theta + v * np.log(theta) - ln_gamma(v + 1.0))
    a = 1.0 / r
    log1prt = np.log1p(r * theta)
    log_nb = (
        ln_gamma_ratio(a, int(value))
        - ln_gamma_ratio(1.0, int(value))
        - (a + v) * log1prt
        + v * np.log(r * theta)
    )
    if model.family == "NB":
        return np.exp(log_nb)
    log_p0 = -a * log1prt
    if value == 0:
        return phi
    return (1.0 - phi) * np.exp(log_nb) / (-np.expm1(log_p0))


def frequency_table(y, model: FittedModel, y_max: int, X=None, X_h=None):
    """Empirical and fitted frequencies for counts 0..y_max plus overflow.

    The fitted entry for value v is the sum over rows of P(Y=v | x_i); the
    final entry collects everything above y_max, so the fitted column sums
    to n up to truncation error.  Intercept-only models may omit ``X``.
    """
    y = np.asarray(y)
    n = y.shape[0]
    if X is None:
        X = np.ones((n, model.k_mean))
    X, y = _check_design(model, X, y)
    beta, r = _mean_params(model)
    theta = link_mean(X, beta)
    phi = None
    if model.family == "HNB":
        if X_h is None:
            X_h = np.ones((n, model.k_hurdle))
        delta = np.array([model.estimates[name] for name in model.hurdle_names])
        phi = link_hurdle(np.asarray(X_h, dtype=float), delta)
    empirical = np.zeros(y_max + 2, dtype=np.int64)
    fitted = np.zeros(y_max + 2)
    counts = np.bincount(y.astype(np.int64), minlength=y_max + 1)
    empirical[: y_max + 1] = counts[: y_max + 1]
    empirical[y_max + 1] = int(np.sum(y > y_max))
    for value in range(y_max + 1):
        fitted[value] = float(np.sum(_pmf_matrix_column(model, theta, phi, r, value)))
    fitted[y_max + 1] = n - float(np.sum(fitted[: y_max + 1]))
    return empirical, fitted
