"""Stationary correlation functions and correlation-matrix assembly.

Five one-dimensional families are available (Gaussian, exponential,
Matern 3/2, Matern 5/2 and linear).  Multivariate correlations are built
either as a product of 1-D correlations (separable) or by applying the 1-D
profile to a scaled radial distance (ellipsoidal).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import (
    InvalidHyperparameterError,
    InvalidInputError,
    NotPositiveDefiniteError,
    ShapeError,
)

_SQRT3 = math.sqrt(3.0)
_SQRT5 = math.sqrt(5.0)

# jitter escalates by x10 between these multiples of mean(diagonal)
JITTER_START = 1e-10
JITTER_MAX = 1e-6


class Family(str, Enum):
    GAUSSIAN = "Gaussian"
    EXPONENTIAL = "Exponential"
    MATERN32 = "Matern32"
    MATERN52 = "Matern52"
    LINEAR = "Linear"


class Structure(str, Enum):
    SEPARABLE = "Separable"
    ELLIPSOIDAL = "Ellipsoidal"


@dataclass(frozen=True)
class CorrelationSpec:
    """Kernel family, multivariate structure and isotropy flag."""

    family: Family = Family.GAUSSIAN
    structure: Structure = Structure.SEPARABLE
    isotropic: bool = False

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        object.__setattr__(self, "structure", Structure(self.structure))
        object.__setattr__(self, "isotropic", bool(self.isotropic))

    def n_theta(self, d: int) -> int:
        """Number of correlation lengths for a ``d``-dimensional input."""
        return 1 if self.isotropic else d

    def to_dict(self) -> dict:
        return {
            "family": self.family.value,
            "structure": self.structure.value,
            "isotropic": self.isotropic,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "CorrelationSpec":
        return cls(doc["family"], doc["structure"], doc["isotropic"])


@dataclass(frozen=True)
class CorrelationMatrix:
    """Correlation matrix of a design plus the Cholesky factor actually used.

    ``R`` has a unit diagonal.  ``L`` is the lower factor of
    ``R + diag(noise) + jitter * I``.
    """

    R: np.ndarray
    noise: np.ndarray
    L: np.ndarray
    jitter: float

    @property
    def K(self) -> np.ndarray:
        """The matrix that was factorized."""
        n = self.R.shape[0]
        return self.R + np.diag(self.noise) + self.jitter * np.eye(n)

    def log_det(self) -> float:
        return 2.0 * float(np.sum(np.log(np.diag(self.L))))


def _profile(family: Family, u):
    """1-D correlation as a function of the scaled distance u = |h| / theta."""
    if family is Family.GAUSSIAN:
        return np.exp(-u * u)
    if family is Family.EXPONENTIAL:
        return np.exp(-u)
    if family is Family.MATERN32:
        s = _SQRT3 * u
        return (1.0 + s) * np.exp(-s)
    if family is Family.MATERN52:
        s = _SQRT5 * u
        return (1.0 + s + (5.0 / 3.0) * u * u) * np.exp(-s)
    if family is Family.LINEAR:
        return np.maximum(0.0, 1.0 - u)
    raise ValueError(f"unknown correlation family {family!r}")


def _check_theta(theta, n_expected: int | None = None) -> np.ndarray:
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    if theta.ndim != 1:
        raise ShapeError(f"theta must be a vector, got shape {theta.shape}")
    if not np.all(np.isfinite(theta)) or np.any(theta <= 0.0):
        raise InvalidHyperparameterError(f"theta must be finite and > 0, got {theta}")
    if n_expected is not None and theta.size != n_expected:
        raise ShapeError(f"expected {n_expected} correlation lengths, got {theta.size}")
    return theta


def expand_theta(spec: CorrelationSpec, theta, d: int) -> np.ndarray:
    """Validate ``theta`` against ``spec`` and broadcast it to length ``d``."""
    theta = _check_theta(theta, spec.n_theta(d))
    if theta.size == 1 and d > 1:
        theta = np.full(d, theta[0])
    return theta


def corr1d(family, h: float, theta_q: float) -> float:
    """Single-coordinate correlation R(h | theta_q)."""
    family = Family(family)
    if not math.isfinite(h):
        raise InvalidInputError(f"distance must be finite, got {h}")
    if not (math.isfinite(theta_q) and theta_q > 0.0):
        raise InvalidHyperparameterError(f"theta must be finite and > 0, got {theta_q}")
    return float(_profile(family, abs(h) / theta_q))


def abs_differences(X1: np.ndarray, X2: np.ndarray) -> np.ndarray:
    """Coordinate-wise |x - x'| for all pairs, shape (n1, n2, d)."""
    return np.abs(X1[:, None, :] - X2[None, :, :])


def corr_from_differences(spec: CorrelationSpec, absdiff: np.ndarray, theta) -> np.ndarray:
    """Correlations from precomputed absolute coordinate differences.

    ``theta`` must already be expanded to length d.
    """
    scaled = absdiff / theta
    if spec.structure is Structure.SEPARABLE:
        if spec.family is Family.GAUSSIAN:
            # product of exponentials, summed in the exponent
            return np.exp(-np.sum(scaled * scaled, axis=-1))
        return np.prod(_profile(spec.family, scaled), axis=-1)
    h = np.sqrt(np.sum(scaled * scaled, axis=-1))
    return _profile(spec.family, h)


def _as_design(X, name="X") -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2:
        raise ShapeError(f"{name} must be 2-D (n, d), got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise InvalidInputError(f"{name} contains non-finite values")
    return X


def corr(spec: CorrelationSpec, x, x_prime, theta) -> float:
    """Correlation between two points."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    x_prime = np.atleast_1d(np.asarray(x_prime, dtype=float))
    if x.shape != x_prime.shape or x.ndim != 1:
        raise ShapeError(f"point shapes differ: {x.shape} vs {x_prime.shape}")
    th = expand_theta(spec, theta, x.size)
    return float(corr_from_differences(spec, np.abs(x - x_prime), th))


def cross_corr(spec: CorrelationSpec, X1, X2, theta) -> np.ndarray:
    """Correlation block between two point sets, shape (n1, n2)."""
    X1 = _as_design(X1, "X1")
    X2 = _as_design(X2, "X2")
    if X1.shape[1] != X2.shape[1]:
        raise ShapeError(f"dimension mismatch: {X1.shape[1]} vs {X2.shape[1]}")
    th = expand_theta(spec, theta, X1.shape[1])
    return corr_from_differences(spec, abs_differences(X1, X2), th)


def cross_corr_vector(spec: CorrelationSpec, X, x_star, theta) -> np.ndarray:
    """Vector r with r_i = corr(x_star, X[i]); no noise is ever added here."""
    X = _as_design(X)
    x_star = np.atleast_1d(np.asarray(x_star, dtype=float))
    if x_star.ndim != 1 or x_star.size != X.shape[1]:
        raise ShapeError(f"x_star has {x_star.size} coordinates, design has {X.shape[1]}")
    return cross_corr(spec, x_star[None, :], X, theta)[0]


def factorize(R: np.ndarray, noise=None, theta=None) -> CorrelationMatrix:
    """Cholesky factor of R + diag(noise), escalating jitter on failure."""
    n = R.shape[0]
    noise = np.zeros(n) if noise is None else np.asarray(noise, dtype=float)
    K = R + np.diag(noise)
    try:
        return CorrelationMatrix(R, noise, np.linalg.cholesky(K), 0.0)
    except np.linalg.LinAlgError:
        pass
    scale = float(np.mean(np.diag(K)))
    eye = np.eye(n)
    level = JITTER_START
    while level <= JITTER_MAX * (1.0 + 1e-9):
        jitter = level * scale
        try:
            return CorrelationMatrix(R, noise, np.linalg.cholesky(K + jitter * eye), jitter)
        except np.linalg.LinAlgError:
            level *= 10.0
    raise NotPositiveDefiniteError(
        f"correlation matrix not positive definite at theta={theta} "
        f"even with jitter {JITTER_MAX:g} x mean(diag)",
        theta=theta,
    )


def corr_matrix(spec: CorrelationSpec, X, theta, noise_diag=None) -> CorrelationMatrix:
    """Assemble and factorize the (possibly noisy) correlation matrix of X."""
    X = _as_design(X)
    n = X.shape[0]
    if n < 1:
        raise ShapeError("design must contain at least one point")
    if noise_diag is None:
        noise_diag = np.zeros(n)
    noise_diag = np.asarray(noise_diag, dtype=float)
    if noise_diag.shape != (n,):
        raise ShapeError(f"noise_diag must have length {n}, got shape {noise_diag.shape}")
    if np.any(noise_diag < 0.0) or not np.all(np.isfinite(noise_diag)):
        raise InvalidInputError("noise variances must be finite and non-negative")
    th = expand_theta(spec, theta, X.shape[1])
    R = corr_from_differences(spec, abs_differences(X, X), th)
    np.fill_diagonal(R, 1.0)
    return factorize(R, noise_diag, theta=th)
