"""Random-intercept linear mixed-effects model.

    response_ij = b0 + b . x_ij + u_i + e_ij,   u_i ~ N(0, s_u^2),  e_ij ~ N(0, s^2)

Given the variance ratio lam = s_u^2 / s^2 the fixed effects and residual
variance have closed forms, so the (restricted) likelihood is profiled down
to a one-dimensional function of log(lam) and maximised by golden-section
search. Per-participant sums make each evaluation O(groups * p^2).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .errors import CollinearPredictors, LengthMismatch, NonConvergence, SingularDesign, UnfittedModel, ZeroVariance
from .stats import t_ppf

LOG_LAMBDA_BOUNDS = (-30.0, 30.0)
TOLERANCE = 1e-10
MAX_ITER = 200
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
_LOG_2PI = math.log(2.0 * math.pi)


class _Profile:
    """Sufficient statistics of one dataset and the profiled log-likelihood."""

    def __init__(self, groups, D, y, reml):
        self.participants, inverse = np.unique(np.asarray(groups), return_inverse=True)
        self.sizes = np.bincount(inverse).astype(float)
        g, p = len(self.participants), D.shape[1]
        self.n, self.p, self.reml = len(y), p, reml
        self.XtX = D.T @ D
        self.Xty = D.T @ y
        self.yty = float(y @ y)
        self.Sx = np.stack([np.bincount(inverse, D[:, j], minlength=g) for j in range(p)], axis=1)
        self.Sy = np.bincount(inverse, y, minlength=g)

    def solve(self, lam):
        w = lam / (1.0 + self.sizes * lam)
        A = self.XtX - (self.Sx * w[:, None]).T @ self.Sx
        b = self.Xty - self.Sx.T @ (w * self.Sy)
        c = self.yty - float(np.dot(w, self.Sy * self.Sy))
        beta = np.linalg.solve(A, b)
        Q = c - float(b @ beta)
        return w, A, beta, Q

    def loglik(self, lam) -> float:
        _, A, _, Q = self.solve(lam)
        if not Q > 0:
            return -math.inf
        logdet_h = float(np.sum(np.log1p(self.sizes * lam)))
        if self.reml:
            dof = self.n - self.p
            sign, logdet_a = np.linalg.slogdet(A)
            if sign <= 0:
                return -math.inf
            return -0.5 * (dof * (_LOG_2PI + math.log(Q / dof)) + logdet_h + logdet_a + dof)
        return -0.5 * (self.n * (_LOG_2PI + math.log(Q / self.n)) + logdet_h + self.n)

    def at(self, theta) -> float:
        return self.loglik(math.exp(theta))


@dataclass(frozen=True, eq=False)
class LmmFit:
    names: tuple[str, ...]
    beta: np.ndarray
    se: np.ndarray
    cov_beta: np.ndarray
    sigma_u2: float
    sigma2: float
    participants: tuple
    u: np.ndarray
    loglik: float
    loglik_ols: float
    method: str
    converged: bool
    iterations: int
    log_lambda: float
    at_boundary: bool
    identifiable: bool
    n_obs: int
    response: str = "response"
    response_transform: tuple[float, float] | None = None
    predictor_transforms: tuple[tuple[float, float], ...] | None = None
    predictor_range: tuple[np.ndarray, np.ndarray] | None = field(default=None, repr=False)

    @property
    def df_resid(self) -> int:
        return self.n_obs - len(self.beta)

    @property
    def coefficients(self) -> dict[str, float]:
        return dict(zip(self.names, self.beta.tolist()))

    def random_effect(self, participant) -> float:
        idx = {p: i for i, p in enumerate(self.participants)}
        return float(self.u[idx[participant]])


def _golden(f, a, b, max_iter):
    """Maximise a unimodal ``f`` on [a, b]; returns (x, f(x), iterations, converged)."""
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    for it in range(1, max_iter + 1):
        if abs(b - a) <= TOLERANCE * max(1.0, abs(a) + abs(b)):
            x = 0.5 * (a + b)
            return x, f(x), it, True
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x), max_iter, False


def _maximise(profile: _Profile, max_iter):
    lo, hi = LOG_LAMBDA_BOUNDS
    expanded = False
    while True:
        grid = np.linspace(lo, hi, 121)
        values = np.array([profile.at(th) for th in grid])
        k = int(np.argmax(values))
        if k == len(grid) - 1 and not expanded:
            lo, hi, expanded = hi, hi + (hi - LOG_LAMBDA_BOUNDS[0]), True
            continue
        break
    a = grid[max(k - 1, 0)]
    b = grid[min(k + 1, len(grid) - 1)]
    theta, value, iterations, converged = _golden(profile.at, a, b, max_iter)
    if values[k] > value:
        theta, value = float(grid[k]), float(values[k])
    at_boundary = k in (0, len(grid) - 1)
    return theta, value, iterations, converged, at_boundary


def _standardize(values, name):
    sd = float(np.std(values, ddof=1)) if values.size > 1 else 0.0
    if np.ptp(values) == 0 or sd == 0:
        raise ZeroVariance(f"{name!r} is constant and cannot be standardised")
    center = float(values.mean())
    return (values - center) / sd, (center, sd)


def fit_lmm(
    groups,
    X,
    y,
    method: str = "reml",
    *,
    predictor_names: Sequence[str] | None = None,
    response_name: str = "response",
    standardize: bool = False,
    max_iter: int = MAX_ITER,
) -> LmmFit:
    """Fit the random-intercept model by (RE)ML.

    ``X`` holds predictors without an intercept column. With
    ``standardize=True`` the response and every predictor are z-scored
    (pooled mean, sample sd) first and the transforms are kept for
    :func:`lmm_predict`.
    """
    method = method.lower()
    if method not in ("reml", "ml"):
        raise ValueError("method must be 'reml' or 'ml'")
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    y = np.asarray(y, dtype=float).ravel()
    groups = np.asarray(groups)
    if not (len(X) == len(y) == len(groups)):
        raise LengthMismatch("groups, X and y must have the same number of observations")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise ValueError("X and y must be finite")
    k = X.shape[1]
    names = tuple(predictor_names) if predictor_names is not None else tuple(f"x{j + 1}" for j in range(k))
    if len(names) != k:
        raise LengthMismatch(f"{len(names)} predictor names for {k} predictors")

    x_range = (X.min(axis=0), X.max(axis=0), X.std(axis=0, ddof=1) if len(X) > 1 else np.zeros(k))
    resp_t = pred_t = None
    if standardize:
        y, resp_t = _standardize(y, response_name)
        cols, pred_t = [], []
        for j in range(k):
            col, t = _standardize(X[:, j], names[j])
            cols.append(col)
            pred_t.append(t)
        X = np.column_stack(cols) if cols else X
        pred_t = tuple(pred_t)

    D = np.column_stack([np.ones(len(y)), X])
    n, p = D.shape
    if n <= p:
        raise SingularDesign(f"{n} observations cannot identify {p} fixed effects")
    if np.linalg.matrix_rank(D) < p:
        raise CollinearPredictors("design matrix [1, X] is rank deficient")

    profile = _Profile(groups, D, y, reml=method == "reml")
    if len(profile.participants) < 2:
        raise SingularDesign("need at least 2 participants")

    loglik_ols = profile.loglik(0.0)
    identifiable = bool(profile.sizes.max() > 1)
    if identifiable:
        theta, value, iterations, converged, at_boundary = _maximise(profile, max_iter)
        if not converged:
            raise NonConvergence(f"variance-ratio search did not converge in {max_iter} iterations")
        lam = math.exp(theta)
        if loglik_ols >= value:
            lam, theta, value = 0.0, -math.inf, loglik_ols
    else:
        warnings.warn("every participant has one observation; random-intercept variance is not identifiable", stacklevel=2)
        lam, theta, value, iterations, converged, at_boundary = 0.0, -math.inf, loglik_ols, 0, True, True

    w, A, beta, Q = profile.solve(lam)
    sigma2 = Q / (n - p if profile.reml else n)
    cov = sigma2 * np.linalg.inv(A)
    u = w * (profile.Sy - profile.Sx @ beta)
    return LmmFit(
        names=("intercept",) + names,
        beta=beta,
        se=np.sqrt(np.diag(cov)),
        cov_beta=cov,
        sigma_u2=lam * sigma2,
        sigma2=sigma2,
        participants=tuple(profile.participants.tolist()),
        u=u,
        loglik=value,
        loglik_ols=loglik_ols,
        method=method,
        converged=converged,
        iterations=iterations,
        log_lambda=theta,
        at_boundary=at_boundary,
        identifiable=identifiable,
        n_obs=n,
        response=response_name,
        response_transform=resp_t,
        predictor_transforms=pred_t,
        predictor_range=x_range,
    )


@dataclass(frozen=True, eq=False)
class Prediction:
    mean: np.ndarray
    ci_low: np.ndarray
    ci_high: np.ndarray


def lmm_predict(
    fit: LmmFit | None,
    X,
    *,
    population_level: bool = True,
    participant=None,
    raw: bool = False,
    ci_level: float = 0.95,
) -> Prediction:
    """Predict the response with a confidence interval for the mean.

    ``raw=True`` takes predictors on their original scale and returns the
    response on its original scale, through the stored z-score transforms.
    """
    if fit is None:
        raise UnfittedModel("model has not been fitted")
    X = np.atleast_2d(np.asarray(X, dtype=float))
    k = len(fit.beta) - 1
    if X.shape[1] != k:
        raise LengthMismatch(f"expected {k} predictors, got {X.shape[1]}")
    if raw and fit.predictor_range is not None:
        lo, hi, sd = fit.predictor_range
        if np.any(X < lo - 3 * sd) or np.any(X > hi + 3 * sd):
            warnings.warn("predictors lie more than 3 sd outside the training range", stacklevel=2)
    if raw and fit.predictor_transforms is not None:
        centers = np.array([t[0] for t in fit.predictor_transforms])
        scales = np.array([t[1] for t in fit.predictor_transforms])
        X = (X - centers) / scales
    D = np.column_stack([np.ones(len(X)), X])
    mean = D @ fit.beta
    if not population_level:
        if participant is None:
            raise ValueError("participant is required for participant-level predictions")
        mean = mean + fit.random_effect(participant)
    se = np.sqrt(np.einsum("ij,jk,ik->i", D, fit.cov_beta, D))
    half = t_ppf(0.5 + 0.5 * ci_level, fit.df_resid) * se
    low, high = mean - half, mean + half
    if raw and fit.response_transform is not None:
        center, scale = fit.response_transform
        mean, low, high = (v * scale + center for v in (mean, low, high))
    return Prediction(mean, low, high)


class RandomInterceptLMM(RegressorMixin, BaseEstimator):
    """Scikit-learn style estimator for the random-intercept model.

    ``fit(X, y, groups)``; ``predict(X)`` gives population-level predictions,
    ``predict(X, groups)`` adds each known participant's random intercept.
    """

    def __init__(self, method="reml", standardize=False):
        self.method = method
        self.standardize = standardize

    def fit(self, X, y, groups):
        X = check_array(X)
        y = np.asarray(y, dtype=float)
        self.fit_ = fit_lmm(groups, X, y, self.method, standardize=self.standardize)
        self.intercept_ = float(self.fit_.beta[0])
        self.coef_ = self.fit_.beta[1:]
        self.sigma_u2_ = self.fit_.sigma_u2
        self.sigma2_ = self.fit_.sigma2
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X, groups=None):
        check_is_fitted(self, "fit_")
        X = check_array(X)
        raw = self.standardize
        if groups is None:
            return lmm_predict(self.fit_, X, raw=raw).mean
        out = np.empty(len(X))
        for i, (row, g) in enumerate(zip(X, groups)):
            out[i] = lmm_predict(self.fit_, row, population_level=False, participant=g, raw=raw).mean[0]
        return out
