"""Maximum-likelihood fitting for Poisson, NB, and hurdle-NB regressions.

Poisson and the logistic hurdle part use guarded Newton steps; the NB and
zero-truncated NB parts use BFGS with analytic gradients and a step-halving
(Armijo) line search.  The dispersion parameter is optimized as log r.
Starting values: beta from a Poisson fit, r from the method of moments
r0 = max((s^2 - ybar)/ybar^2, 1e-3).

Reported convergence means the max-norm of the score is below
``gradient_tolerance * (1 + |loglik|)``.  The coefficient covariance is the
inverse observed information, obtained from a central-difference Hessian of
the full log-likelihood (differencing the analytic score) on the
unconstrained scale; the r row/column is mapped to the natural scale by the
delta method.  The covariance is recomputed at twice the differencing step
and a conditioning warning is set if the two disagree beyond 1e-6 relative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import SeparationError
from .likelihood import (
    NbRegParams,
    _truncated_nb_loglik_terms,
    _truncated_nb_score,
    link_hurdle,
    link_mean,
    nb_loglik,
    nb_score,
    poisson_score,
)
from .special import ln_gamma

__all__ = ["FitOptions", "FittedModel", "fit_poisson", "fit_nb", "fit_hnb", "fit_homogeneous"]

_ARMIJO = 1e-4
_SEPARATION_BOUND = 30.0
_POISSON_BOUNDARY_R = 1e-6
# Trial points with log r outside this window are rejected by the line
# search; any attainable optimum sits far inside it.
_LOG_R_WINDOW = 30.0


@dataclass(frozen=True)
class FitOptions:
    max_iterations: int = 500
    gradient_tolerance: float = 1e-7
    step_halving_limit: int = 30
    hessian_step: float = 1e-5

    def __post_init__(self):
        if min(self.max_iterations, self.step_halving_limit) < 1:
            raise ValueError("iteration limits must be positive")
        if min(self.gradient_tolerance, self.hessian_step) <= 0.0:
            raise ValueError("tolerances must be positive")


@dataclass(frozen=True)
class FittedModel:
    """Immutable fit result; natural-scale estimates plus covariance."""

    family: str
    names: tuple[str, ...]
    estimates: dict
    params_unconstrained: np.ndarray
    covariance: np.ndarray
    covariance_unconstrained: np.ndarray
    loglik: float
    n: int
    k_mean: int
    k_hurdle: int
    n_params: int
    converged: bool
    iterations: int
    gradient_norm: float
    mean_names: tuple[str, ...]
    hurdle_names: tuple[str, ...] = ()
    warnings: tuple[str, ...] = ()

    def std_errors(self) -> dict:
        se = np.sqrt(np.clip(np.diag(self.covariance), 0.0, None))
        return dict(zip(self.names, se.tolist()))

    def natural_summary(self) -> dict:
        """theta/phi/r summary for intercept-only fits."""
        out = {}
        if self.k_mean == 1:
            out["theta"] = math.exp(self.estimates[self.mean_names[0]])
        if "r" in self.estimates:
            out["r"] = self.estimates["r"]
        if self.k_hurdle == 1:
            eta = self.estimates[self.hurdle_names[0]]
            out["phi"] = 1.0 / (1.0 + math.exp(-eta))
        return out


@dataclass
class _OptState:
    u: np.ndarray
    value: float
    grad: np.ndarray
    converged: bool
    iterations: int
    warnings: list = field(default_factory=list)


def _max_norm(g) -> float:
    return float(np.max(np.abs(g))) if g.size else 0.0


def _converged(value, grad, options) -> bool:
    return _max_norm(grad) < options.gradient_tolerance * (1.0 + abs(value))


def _bfgs_maximize(fun_grad, u0, options, guard=None) -> _OptState:
    """Quasi-Newton ascent with Armijo step halving on the analytic gradient."""
    u = np.asarray(u0, dtype=float).copy()
    value, grad = fun_grad(u)
    p = u.size
    # First trial step has roughly unit norm; the curvature rescale after the
    # first update restores the proper Hessian scale.
    H = np.eye(p) / max(1.0, float(np.linalg.norm(grad)))
    scaled_once = False
    fresh_restart = False
    iterations = 0
    warnings = []
    while iterations < options.max_iterations:
        if _converged(value, grad, options):
            return _OptState(u, value, grad, True, iterations, warnings)
        direction = H @ grad
        slope = float(grad @ direction)
        if not np.isfinite(slope) or slope <= 0.0:
            H = np.eye(p)
            direction = grad.copy()
            slope = float(grad @ grad)
            if slope == 0.0:
                break
        step = 1.0
        accepted = False
        for _ in range(options.step_halving_limit):
            candidate = u + step * direction
            new_value, new_grad = fun_grad(candidate)
            if np.isfinite(new_value) and new_value >= value + _ARMIJO * step * slope:
                accepted = True
                break
            step *= 0.5
        iterations += 1
        if not accepted:
            # Retry once from a reset curvature model before giving up; a
            # stale H can point along a flat boundary direction.
            if not fresh_restart:
                H = np.eye(p) / max(1.0, float(np.linalg.norm(grad)))
                scaled_once = False
                fresh_restart = True
                continue
            warnings.append("line_search_stalled")
            break
        fresh_restart = False
        s = step * direction
        ym = grad - new_grad  # curvature pair for the equivalent minimization
        sy = float(s @ ym)
        if sy > 1e-12 * float(np.linalg.norm(s) * np.linalg.norm(ym) + 1e-300):
            if not scaled_once:
                H *= sy / float(ym @ ym)
                scaled_once = True
            rho = 1.0 / sy
            Hy = H @ ym
            H -= rho * (np.outer(s, Hy) + np.outer(Hy, s))
            H += rho * (1.0 + rho * float(ym @ Hy)) * np.outer(s, s)
        u, value, grad = candidate, new_value, new_grad
        if guard is not None:
            guard(u)
    converged = _converged(value, grad, options)
    return _OptState(u, value, grad, converged, iterations, warnings)


def _newton_maximize(fun_grad_weights, X, u0, options, guard=None) -> _OptState:
    """Newton ascent for GLM-type concave log-likelihoods (canonical links)."""
    u = np.asarray(u0, dtype=float).copy()
    value, grad, w = fun_grad_weights(u)
    iterations = 0
    warnings = []
    while iterations < options.max_iterations:
        if _converged(value, grad, options):
            return _OptState(u, value, grad, True, iterations, warnings)
        XtWX = X.T @ (X * w[:, None])
        try:
            direction = np.linalg.solve(XtWX, grad)
        except np.linalg.LinAlgError:
            direction = np.linalg.lstsq(XtWX, grad, rcond=None)[0]
        slope = float(grad @ direction)
        if slope <= 0.0:
            direction = grad.copy()
            slope = float(grad @ grad)
            if slope == 0.0:
                break
        step = 1.0
        accepted = False
        for _ in range(options.step_halving_limit):
            candidate = u + step * direction
            new_value, new_grad, new_w = fun_grad_weights(candidate)
            if np.isfinite(new_value) and new_value >= value + _ARMIJO * step * slope:
                accepted = True
                break
            step *= 0.5
        iterations += 1
        if not accepted:
            warnings.append("line_search_stalled")
            break
        u, value, grad, w = candidate, new_value, new_grad, new_w
        if guard is not None:
            guard(u)
    converged = _converged(value, grad, options)
    return _OptState(u, value, grad, converged, iterations, warnings)


def _fd_hessian(score_fun, u, step) -> np.ndarray:
    """Central-difference Jacobian of the analytic score, symmetrized."""
    p = u.size
    J = np.empty((p, p))
    for j in range(p):
        h = step * (1.0 + abs(u[j]))
        up, down = u.copy(), u.copy()
        up[j] += h
        down[j] -= h
        J[:, j] = (score_fun(up) - score_fun(down)) / (2.0 * h)
    return 0.5 * (J + J.T)


def _psd_inverse(A) -> np.ndarray:
    eigval, eigvec = np.linalg.eigh(A)
    floor = max(np.max(eigval), 0.0) * 1e-14
    inv = np.where(eigval > floor, 1.0 / np.where(eigval > floor, eigval, 1.0), 0.0)
    return (eigvec * inv) @ eigvec.T


def _covariance_from_score(score_fun, u, options):
    """(covariance, warnings) from the observed information at ``u``."""
    warnings = []

    def cov_at(step):
        H = _fd_hessian(score_fun, u, step)
        info = -H
        eigval = np.linalg.eigvalsh(info)
        if np.min(eigval) <= 0.0:
            return _psd_inverse(info), True
        return np.linalg.inv(info), False

    cov, degenerate = cov_at(options.hessian_step)
    if degenerate:
        warnings.append("hessian_not_negative_definite")
    cov2, _ = cov_at(2.0 * options.hessian_step)
    scale = float(np.max(np.abs(cov))) + 1e-300
    if float(np.max(np.abs(cov - cov2))) / scale > 1e-6:
        warnings.append("covariance_step_sensitive")
    cov = 0.5 * (cov + cov.T)
    return cov, warnings


def _default_labels(k):
    return tuple(["intercept"] + [f"x{j}" for j in range(1, k)])


def _validate_design(X, y, labels, min_extra=0):
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    if X.ndim != 2:
        raise ValueError("X must be a two-dimensional design matrix")
    n, k = X.shape
    if y.shape != (n,):
        raise ValueError("y length does not match the design matrix")
    if np.any(y < 0) or not np.all(np.equal(np.mod(y, 1), 0)):
        raise ValueError("response must contain nonnegative integers")
    if n <= k + min_extra:
        raise ValueError(f"need more observations than parameters (n={n}, k={k})")
    if np.linalg.matrix_rank(X) < k:
        raise ValueError("design matrix is rank deficient")
    if labels is None:
        labels = _default_labels(k)
    elif len(labels) != k:
        raise ValueError("labels length does not match the design matrix")
    return X, y.astype(np.int64), tuple(labels)


def fit_poisson(X, y, options: FitOptions | None = None, labels=None) -> FittedModel:
    """Poisson regression under the log link."""
    options = options or FitOptions()
    X, y, labels = _validate_design(X, y, labels)
    n, k = X.shape
    yf = y.astype(float)
    const = float(np.sum(ln_gamma(yf + 1.0)))

    def fun_grad_weights(beta):
        theta = link_mean(X, beta)
        value = float(np.sum(yf * np.log(theta) - theta)) - const
        return value, X.T @ (yf - theta), theta

    beta0 = np.zeros(k)
    beta0[0] = math.log(max(float(np.mean(yf)), 1e-8))
    state = _newton_maximize(fun_grad_weights, X, beta0, options)

    cov, cov_warnings = _covariance_from_score(
        lambda b: poisson_score(b, X, y), state.u, options
    )
    estimates = dict(zip(labels, state.u.tolist()))
    return FittedModel(
        family="P",
        names=labels,
        estimates=estimates,
        params_unconstrained=state.u,
        covariance=cov,
        covariance_unconstrained=cov,
        loglik=state.value,
        n=n,
        k_mean=k,
        k_hurdle=0,
        n_params=k,
        converged=state.converged,
        iterations=state.iterations,
        gradient_norm=_max_norm(state.grad),
        mean_names=labels,
        warnings=tuple(state.warnings + cov_warnings),
    )


def _moment_start_r(y) -> float:
    ybar = float(np.mean(y))
    s2 = float(np.var(y, ddof=1)) if y.size > 1 else 0.0
    if ybar <= 0.0:
        return 1e-3
    return max((s2 - ybar) / ybar**2, 1e-3)


def fit_nb(X, y, options: FitOptions | None = None, labels=None) -> FittedModel:
    """Negative binomial regression; beta starts at the Poisson fit."""
    options = options or FitOptions()
    X, y, labels = _validate_design(X, y, labels, min_extra=1)
    n, k = X.shape
    poisson = fit_poisson(X, y, options=options, labels=labels)
    u0 = np.concatenate([poisson.params_unconstrained, [math.log(_moment_start_r(y))]])

    def fun_grad(u):
        if abs(u[k]) > _LOG_R_WINDOW:
            return -math.inf, np.zeros(k + 1)
        params = NbRegParams(beta=u[:k], log_r=float(u[k]))
        return nb_loglik(params, X, y), nb_score(params, X, y)

    def score_fun(u):
        return nb_score(NbRegParams(beta=u[:k], log_r=float(u[k])), X, y)

    state = _bfgs_maximize(fun_grad, u0, options)
    r_hat = math.exp(float(state.u[k]))
    warnings = list(state.warnings)
    if r_hat < _POISSON_BOUNDARY_R:
        warnings.append("poisson_boundary")

    cov_u, cov_warnings = _covariance_from_score(score_fun, state.u, options)
    warnings += cov_warnings
    scale = np.ones(k + 1)
    scale[k] = r_hat  # delta method: d r / d log r = r
    cov_nat = cov_u * np.outer(scale, scale)

    names = labels + ("r",)
    estimates = dict(zip(labels, state.u[:k].tolist()))
    estimates["r"] = r_hat
    return FittedModel(
        family="NB",
        names=names,
        estimates=estimates,
        params_unconstrained=state.u,
        covariance=cov_nat,
        covariance_unconstrained=cov_u,
        loglik=state.value,
        n=n,
        k_mean=k,
        k_hurdle=0,
        n_params=k + 1,
        converged=state.converged,
        iterations=state.iterations,
        gradient_norm=_max_norm(state.grad),
        mean_names=labels,
        warnings=tuple(warnings),
    )


def _separation_guard(X_h, hurdle_labels):
    varying = [j for j in range(X_h.shape[1]) if np.ptp(X_h[:, j]) > 0.0]

    def guard(delta):
        if float(np.max(np.abs(delta))) > _SEPARATION_BOUND:
            if varying:
                worst = max(varying, key=lambda j: abs(delta[j]))
            else:
                worst = int(np.argmax(np.abs(delta)))
            raise SeparationError(hurdle_labels[worst])

    return guard


def fit_hnb(X, X_h, y, options: FitOptions | None = None, labels=None, hurdle_labels=None) -> FittedModel:
    """Hurdle NB fit: logistic zero part and zero-truncated NB part.

    The two parts maximize independently; the joint log-likelihood is their
    sum and the covariance is block diagonal.
    """
    options = options or FitOptions()
    X, y, labels = _validate_design(X, y, labels, min_extra=1)
    X_h = np.asarray(X_h, dtype=float)
    if X_h.ndim != 2 or X_h.shape[0] != X.shape[0]:
        raise ValueError("hurdle design must have the same number of rows as X")
    if np.linalg.matrix_rank(X_h) < X_h.shape[1]:
        raise ValueError("hurdle design matrix is rank deficient")
    if hurdle_labels is None:
        hurdle_labels = _default_labels(X_h.shape[1])
    hurdle_labels = tuple(hurdle_labels)
    n, k = X.shape
    k_h = X_h.shape[1]

    zero = y == 0
    if not zero.any() or zero.all():
        raise ValueError("hurdle fit needs both zero and positive counts")

    # Binary part: logistic regression of I(y == 0) on X_h.
    z = zero.astype(float)

    def binary_fun(delta):
        eta = np.clip(X_h @ delta, -700.0, 700.0)
        value = float(np.sum(z * eta - np.logaddexp(0.0, eta)))
        phi = link_hurdle(X_h, delta)
        return value, X_h.T @ (z - phi), phi * (1.0 - phi)

    delta0 = np.zeros(k_h)
    zbar = float(np.mean(z))
    delta0[0] = math.log(zbar / (1.0 - zbar))
    binary_state = _newton_maximize(
        binary_fun, X_h, delta0, options, guard=_separation_guard(X_h, hurdle_labels)
    )

    # Zero-truncated part on the positive rows only.
    Xp = X[~zero]
    yp = y[~zero].astype(float)
    poisson = fit_poisson(Xp, y[~zero], options=options, labels=labels)
    u0 = np.concatenate(
        [poisson.params_unconstrained, [math.log(_moment_start_r(y[~zero]))]]
    )

    def truncated_value(u):
        params = NbRegParams(beta=u[:k], log_r=float(u[k]))
        return float(np.sum(_truncated_nb_loglik_terms(params, Xp, yp, full=True)))

    def truncated_score(u):
        return _truncated_nb_score(NbRegParams(beta=u[:k], log_r=float(u[k])), Xp, yp)

    def truncated_fun(u):
        if abs(u[k]) > _LOG_R_WINDOW:
            return -math.inf, np.zeros(k + 1)
        return truncated_value(u), truncated_score(u)

    truncated_state = _bfgs_maximize(truncated_fun, u0, options)
    r_hat = math.exp(float(truncated_state.u[k]))

    warnings = list(binary_state.warnings) + list(truncated_state.warnings)
    if r_hat < _POISSON_BOUNDARY_R:
        warnings.append("poisson_boundary")

    cov_trunc, w1 = _covariance_from_score(truncated_score, truncated_state.u, options)

    def binary_score(delta):
        phi = link_hurdle(X_h, delta)
        return X_h.T @ (z - phi)

    cov_binary, w2 = _covariance_from_score(binary_score, binary_state.u, options)
    warnings += w1 + w2

    p_total = k + 1 + k_h
    cov_u = np.zeros((p_total, p_total))
    cov_u[: k + 1, : k + 1] = cov_trunc
    cov_u[k + 1 :, k + 1 :] = cov_binary
    scale = np.ones(p_total)
    scale[k] = r_hat
    cov_nat = cov_u * np.outer(scale, scale)

    zero_names = tuple(f"zero:{name}" for name in hurdle_labels)
    names = labels + ("r",) + zero_names
    params_u = np.concatenate([truncated_state.u, binary_state.u])
    estimates = dict(zip(labels, truncated_state.u[:k].tolist()))
    estimates["r"] = r_hat
    estimates.update(dict(zip(zero_names, binary_state.u.tolist())))

    return FittedModel(
        family="HNB",
        names=names,
        estimates=estimates,
        params_unconstrained=params_u,
        covariance=cov_nat,
        covariance_unconstrained=cov_u,
        loglik=binary_state.value + truncated_state.value,
        n=n,
        k_mean=k,
        k_hurdle=k_h,
        n_params=p_total,
        converged=binary_state.converged and truncated_state.converged,
        iterations=binary_state.iterations + truncated_state.iterations,
        gradient_norm=max(_max_norm(binary_state.grad), _max_norm(truncated_state.grad)),
        mean_names=labels,
        hurdle_names=zero_names,
        warnings=tuple(warnings),
    )


def fit_homogeneous(family: str, y, options: FitOptions | None = None) -> FittedModel:
    """Intercept-only fit of the requested family."""
    y = np.asarray(y)
    if y.size == 0:
        raise ValueError("y must be nonempty")
    X = np.ones((y.shape[0], 1))
    if family == "P":
        return fit_poisson(X, y, options=options)
    if family == "NB":
        return fit_nb(X, y, options=options)
    if family == "HNB":
        return fit_hnb(X, X, y, options=options)
    raise ValueError(f"unknown family {family!r}; expected P, NB, or HNB")
