"""Kriging estimation and prediction.

All fitting happens in standardized units (see :class:`hkrig.data.Transform`);
a fitted :class:`KrigingModel` accepts and returns original units.  Every
linear solve goes through the Cholesky factor of the correlation matrix and
the R factor of the whitened information matrix; no explicit inverses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.linalg import solve_triangular

from .data import Dataset, Transform
from .errors import (
    AllInfeasibleError,
    FitError,
    InsufficientDataError,
    NotPositiveDefiniteError,
    ShapeError,
    UnderdeterminedTrendError,
)
from .kernels import (
    CorrelationMatrix,
    CorrelationSpec,
    abs_differences,
    corr_from_differences,
    cross_corr,
    expand_theta,
    factorize,
)
from .optimize import INFEASIBLE, OptimizerSpec, minimize
from .trend import RANK_RTOL, TrendKind, TrendSpec, check_rank, eval_basis_matrix

LOG10_THETA_BOUNDS = (-3.0, 2.0)
SIGMA2_FLOOR = 1e-300
CLAMP_REPORT_RTOL = 1e-8
_LOG_2PI = math.log(2.0 * math.pi)


class Estimation(str, Enum):
    MLE = "MLE"
    CV = "CV"


@dataclass(frozen=True)
class Prediction:
    """Posterior mean and variance at a batch of points (original units).

    ``clamped`` counts points whose computed variance was negative by more
    than 1e-8 * sigma2 before being clamped to zero.
    """

    mean: np.ndarray
    variance: np.ndarray
    clamped: int = 0


# ---------------------------------------------------------------------------
# Generalized least squares
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _GLS:
    beta: np.ndarray
    sigma2: float
    Ft: np.ndarray  # L^-1 F
    Q: np.ndarray  # Ft = Q Rf
    Rf: np.ndarray
    resid_w: np.ndarray  # L^-1 (Y - F beta)


def _lower_factor(R_factored) -> np.ndarray:
    if isinstance(R_factored, CorrelationMatrix):
        return R_factored.L
    return np.asarray(R_factored, dtype=float)


def _gls(L, F, Y) -> _GLS:
    n = L.shape[0]
    if F.shape[0] != n or Y.shape[0] != n:
        raise ShapeError(f"F has {F.shape[0]} rows and Y {Y.shape[0]}; expected {n}")
    Ft = solve_triangular(L, F, lower=True, check_finite=False)
    yt = solve_triangular(L, Y, lower=True, check_finite=False)
    Q, Rf = np.linalg.qr(Ft)
    d = np.abs(np.diag(Rf))
    if d.size == 0 or d.max() == 0.0 or np.any(d < RANK_RTOL * d.max()):
        raise UnderdeterminedTrendError("F^T R^-1 F is singular; trend not identifiable")
    beta = solve_triangular(Rf, Q.T @ yt, lower=False, check_finite=False)
    resid_w = yt - Ft @ beta
    sigma2 = float(resid_w @ resid_w) / n
    return _GLS(beta, sigma2, Ft, Q, Rf, resid_w)


def gls_estimates(R_factored, F, Y):
    """Generalized least-squares trend coefficients and process variance.

    Parameters
    ----------
    R_factored : CorrelationMatrix or ndarray
        The factorized correlation matrix, or directly its lower Cholesky factor.
    F : (n, P) array
    Y : (n,) array

    Returns
    -------
    beta_hat : (P,) array
    sigma2_hat : float
        Residual quadratic form divided by n.
    """
    F = np.asarray(F, dtype=float)
    if F.ndim == 1:
        F = F[:, None]
    g = _gls(_lower_factor(R_factored), F, np.asarray(Y, dtype=float).reshape(-1))
    return g.beta, g.sigma2


# ---------------------------------------------------------------------------
# Hyperparameter objectives
# ---------------------------------------------------------------------------


class _Problem:
    """Fixed data for repeated objective evaluations at different theta."""

    def __init__(self, X, Y, F, spec: CorrelationSpec, noise_diag=None):
        self.X = np.asarray(X, dtype=float)
        if self.X.ndim == 1:
            self.X = self.X[:, None]
        self.Y = np.asarray(Y, dtype=float).reshape(-1)
        F = np.asarray(F, dtype=float)
        self.F = F[:, None] if F.ndim == 1 else F
        n, self.d = self.X.shape
        if self.Y.size != n or self.F.shape[0] != n:
            raise ShapeError("X, Y and F must have the same number of rows")
        self.noise = np.zeros(n) if noise_diag is None else np.asarray(noise_diag, float)
        if self.noise.shape != (n,):
            raise ShapeError(f"noise_diag must have length {n}")
        self.spec = spec
        self.absdiff = abs_differences(self.X, self.X)

    @property
    def n(self):
        return self.Y.size

    def factor(self, theta) -> CorrelationMatrix:
        th = expand_theta(self.spec, theta, self.d)
        R = corr_from_differences(self.spec, self.absdiff, th)
        np.fill_diagonal(R, 1.0)
        return factorize(R, self.noise, theta=th)

    def nll(self, theta, reduced=False) -> float:
        try:
            C = self.factor(theta)
            g = _gls(C.L, self.F, self.Y)
        except (NotPositiveDefiniteError, UnderdeterminedTrendError):
            return INFEASIBLE
        n = self.n
        s2 = max(g.sigma2, SIGMA2_FLOOR)
        if reduced:
            return 0.5 * C.log_det() + 0.5 * n * math.log(s2)
        return 0.5 * C.log_det() + 0.5 * n * (_LOG_2PI + math.log(s2)) + 0.5 * n

    def loo_residuals(self, theta) -> np.ndarray:
        """Leave-one-out residuals Y_i - mu_(-i)(x_i) at fixed theta.

        Uses e = Q Y / diag(Q) with Q = R^-1 - R^-1 F (F^T R^-1 F)^-1 F^T R^-1,
        i.e. the held-out predictor re-estimates beta by GLS without point i.
        """
        C = self.factor(theta)
        g = _gls(C.L, self.F, self.Y)
        n = self.n
        A = solve_triangular(C.L, np.eye(n), lower=True, check_finite=False)
        B = A - g.Q @ (g.Q.T @ A)
        q_diag = np.einsum("ij,ij->j", B, B)
        alpha = solve_triangular(C.L.T, g.resid_w, lower=False, check_finite=False)
        if np.any(q_diag <= 1e-14 * np.max(np.einsum("ij,ij->j", A, A))):
            raise UnderdeterminedTrendError("leave-one-out fit is not identifiable")
        return alpha / q_diag

    def loo(self, theta) -> float:
        try:
            e = self.loo_residuals(theta)
        except (NotPositiveDefiniteError, UnderdeterminedTrendError):
            return INFEASIBLE
        return float(e @ e)


def neg_log_likelihood(theta, X, Y, F, spec: CorrelationSpec, noise_diag=None,
                       reduced: bool = False) -> float:
    """Profiled negative log-likelihood at correlation lengths ``theta``.

    With beta and sigma2 replaced by their GLS estimates this is
    ``0.5 log det R + (n/2) log(2 pi sigma2) + n/2``, which equals the negative
    log-density of Y under N(F beta, sigma2 R).  ``reduced=True`` drops the
    theta-independent constants.  sigma2 is floored at 1e-300 inside the log.
    Returns :data:`hkrig.optimize.INFEASIBLE` when R cannot be factorized.
    """
    return _Problem(X, Y, F, spec, noise_diag).nll(theta, reduced)


def loo_cv_objective(theta, X, Y, F, spec: CorrelationSpec, noise_diag=None) -> float:
    """Sum of squared leave-one-out errors of the Kriging mean at ``theta``."""
    Y = np.asarray(Y, dtype=float).reshape(-1)
    if Y.size < 2:
        raise InsufficientDataError("leave-one-out needs at least 2 points")
    return _Problem(X, Y, F, spec, noise_diag).loo(theta)


# ---------------------------------------------------------------------------
# Fitted model
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class KrigingModel:
    """Fitted Kriging surrogate.

    Use :func:`fit` to estimate one, or :meth:`assemble` to build one at
    given correlation lengths.  ``theta`` is in standardized input units.
    """

    data: Dataset
    spec: CorrelationSpec
    trend: TrendSpec
    theta: np.ndarray
    transform: Transform
    estimation: Estimation = Estimation.MLE
    info: dict = field(default_factory=dict)
    # derived in assemble()
    X_std: np.ndarray = None
    Y_std: np.ndarray = None
    noise_std: np.ndarray = None
    F: np.ndarray = None
    corr: CorrelationMatrix = None
    beta: np.ndarray = None
    sigma2: float = None
    _Ft: np.ndarray = field(default=None, repr=False)
    _Rf: np.ndarray = field(default=None, repr=False)
    _alpha: np.ndarray = field(default=None, repr=False)

    @classmethod
    def assemble(cls, data: Dataset, spec: CorrelationSpec, trend: TrendSpec, theta,
                 transform: Transform | None = None, estimation=Estimation.MLE,
                 info=None) -> "KrigingModel":
        if transform is None:
            transform = Transform.fit(data, center_output=_centers(trend))
        X_std = transform.x_forward(data.X)
        Y_std = transform.y_forward(data.Y)
        noise_std = transform.var_forward(data.noise_var)
        F = _basis(trend, transform, data.X, X_std)
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        expand_theta(spec, theta, data.d)
        prob = _Problem(X_std, Y_std, F, spec, noise_std)
        C = prob.factor(theta)
        g = _gls(C.L, F, Y_std)
        alpha = solve_triangular(C.L.T, g.resid_w, lower=False, check_finite=False)
        return cls(data, spec, trend, theta, transform, Estimation(estimation), dict(info or {}),
                   X_std, Y_std, noise_std, F, C, g.beta, g.sigma2, g.Ft, g.Rf, alpha)

    @property
    def d(self) -> int:
        return self.data.d

    @property
    def n(self) -> int:
        return self.data.n

    @property
    def sigma2_original(self) -> float:
        """Process variance in original output units squared."""
        return float(self.transform.var_inverse(self.sigma2))

    def _as_points(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.ndim == 0:
            x = x.reshape(1, 1)
        elif x.ndim == 1:
            x = x[:, None] if self.d == 1 else x[None, :]
        if x.ndim != 2 or x.shape[1] != self.d:
            raise ShapeError(f"query points have shape {x.shape}; model expects d={self.d}")
        return x

    def predict(self, x) -> Prediction:
        """Posterior mean and variance at one or more points (original units)."""
        X = self._as_points(x)
        U = self.transform.x_forward(X)
        f = _basis(self.trend, self.transform, X, U)
        r = cross_corr(self.spec, U, self.X_std, self.theta)
        mean_s = f @ self.beta + r @ self._alpha
        rt = solve_triangular(self.corr.L, r.T, lower=True, check_finite=False)
        u = self._Ft.T @ rt - f.T
        v = solve_triangular(self._Rf.T, u, lower=True, check_finite=False)
        var_s = self.sigma2 * (1.0 - np.sum(rt * rt, axis=0) + np.sum(v * v, axis=0))
        clamped = int(np.sum(var_s < -CLAMP_REPORT_RTOL * self.sigma2))
        var_s = np.maximum(var_s, 0.0)
        return Prediction(self.transform.y_inverse(mean_s),
                          self.transform.var_inverse(var_s), clamped)


def _centers(trend: TrendSpec) -> bool:
    # a lone predictor column has no intercept to absorb an output shift
    return trend.kind is not TrendKind.EXTERNAL


def _basis(trend: TrendSpec, transform: Transform, X, U) -> np.ndarray:
    """Trend basis in standardized output units at original points X / scaled U."""
    if trend.kind is TrendKind.EXTERNAL:
        F = eval_basis_matrix(trend, X)
        F = F.copy()
        F[:, -1] = F[:, -1] / transform.y_scale
        return F
    return eval_basis_matrix(trend, U)


def predict(model: KrigingModel, x) -> Prediction:
    return model.predict(x)


def fit(data: Dataset, spec: CorrelationSpec = None, trend: TrendSpec = None,
        estimation=Estimation.MLE, optimizer: OptimizerSpec | None = None,
        seed: int = 0, log10_bounds=LOG10_THETA_BOUNDS) -> KrigingModel:
    """Estimate correlation lengths and build the fitted model.

    The search variable is log10(theta) in standardized input units, within
    ``log10_bounds`` per dimension, starting from 0 for the local method.
    """
    spec = spec or CorrelationSpec()
    trend = trend or TrendSpec.ordinary()
    estimation = Estimation(estimation)
    optimizer = (optimizer or OptimizerSpec()).with_seed(seed)

    transform = Transform.fit(data, center_output=_centers(trend))
    U = transform.x_forward(data.X)
    F = _basis(trend, transform, data.X, U)
    check_rank(F)
    if estimation is Estimation.CV:
        if data.n < 2:
            raise InsufficientDataError("cross-validation needs at least 2 points")
        if data.n - 1 < F.shape[1]:
            raise UnderdeterminedTrendError(
                f"leave-one-out with {data.n - 1} points cannot fit {F.shape[1]} trend terms"
            )
    prob = _Problem(U, transform.y_forward(data.Y), F, spec,
                    transform.var_forward(data.noise_var))

    if estimation is Estimation.MLE:
        def objective(z):
            return prob.nll(10.0 ** z, reduced=True)
    else:
        def objective(z):
            return prob.loo(10.0 ** z)

    k = spec.n_theta(data.d)
    bounds = [log10_bounds] * k
    try:
        res = minimize(objective, bounds, optimizer, x0=np.zeros(k))
    except AllInfeasibleError as exc:
        raise FitError(f"no feasible correlation lengths: {exc}") from exc
    theta = 10.0 ** res.x_best
    if estimation is Estimation.MLE:
        value = prob.nll(theta)
    else:
        value = res.f_best
    info = {
        "objective": float(value),
        "log10_theta": [float(z) for z in res.x_best],
        "evaluations": int(res.evaluations),
        "converged": bool(res.converged),
        "optimizer": optimizer.method.value,
        "seed": int(seed),
    }
    try:
        return KrigingModel.assemble(data, spec, trend, theta, transform, estimation, info)
    except (NotPositiveDefiniteError, UnderdeterminedTrendError) as exc:
        raise FitError(str(exc)) from exc
