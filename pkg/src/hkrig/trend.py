"""Trend bases for ordinary, polynomial (universal) and hierarchical Kriging."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum
from math import comb
from typing import Any

import numpy as np
from scipy.linalg import qr

from .errors import ShapeError, UnderdeterminedTrendError

RANK_RTOL = 1e-10


class TrendKind(str, Enum):
    ORDINARY = "Ordinary"
    POLYNOMIAL = "Polynomial"
    EXTERNAL = "ExternalPredictor"


@dataclass(frozen=True)
class TrendSpec:
    """Mean-function basis of a Kriging model.

    ``kind='ExternalPredictor'`` uses the posterior mean of another fitted
    model (anything with a ``predict(X)`` method returning an object with a
    ``mean`` array) as the single basis function.  ``intercept`` adds a
    constant column in front of it.
    """

    kind: TrendKind = TrendKind.ORDINARY
    degree: int = 0
    predictor: Any = None
    intercept: bool = False

    def __post_init__(self):
        object.__setattr__(self, "kind", TrendKind(self.kind))
        if self.kind is TrendKind.POLYNOMIAL and self.degree not in (1, 2, 3, 4):
            raise ValueError(f"polynomial degree must be in 1..4, got {self.degree}")
        if self.kind is TrendKind.EXTERNAL and self.predictor is None:
            raise ValueError("ExternalPredictor trend needs a fitted predictor")

    @classmethod
    def ordinary(cls) -> "TrendSpec":
        return cls(TrendKind.ORDINARY)

    @classmethod
    def polynomial(cls, degree: int) -> "TrendSpec":
        return cls(TrendKind.POLYNOMIAL, degree)

    @classmethod
    def external(cls, predictor, intercept: bool = False) -> "TrendSpec":
        return cls(TrendKind.EXTERNAL, predictor=predictor, intercept=intercept)

    @property
    def label(self) -> str:
        if self.kind is TrendKind.POLYNOMIAL:
            return f"Polynomial{self.degree}"
        return self.kind.value

    @classmethod
    def from_label(cls, label: str) -> "TrendSpec":
        """Inverse of :attr:`label` for the non-external kinds."""
        if label == TrendKind.ORDINARY.value:
            return cls.ordinary()
        if label.startswith("Polynomial"):
            return cls.polynomial(int(label[len("Polynomial"):]))
        raise ValueError(f"unknown trend {label!r}")

    def n_basis(self, d: int) -> int:
        if self.kind is TrendKind.ORDINARY:
            return 1
        if self.kind is TrendKind.POLYNOMIAL:
            return comb(d + self.degree, self.degree)
        return 2 if self.intercept else 1


def monomial_exponents(d: int, degree: int) -> np.ndarray:
    """Exponent table of all monomials of total degree <= ``degree``.

    Rows are in graded-lexicographic order: by total degree, then
    lexicographically on the variable indices, e.g. for d=2, degree=2:
    1, x1, x2, x1^2, x1*x2, x2^2.
    """
    rows = []
    for k in range(degree + 1):
        for combo in itertools.combinations_with_replacement(range(d), k):
            e = [0] * d
            for q in combo:
                e[q] += 1
            rows.append(e)
    return np.array(rows, dtype=int).reshape(-1, d)


def _poly_basis(X: np.ndarray, degree: int) -> np.ndarray:
    exps = monomial_exponents(X.shape[1], degree)
    # exact integer powers, column by column
    out = np.ones((X.shape[0], exps.shape[0]))
    for j, e in enumerate(exps):
        for q, p in enumerate(e):
            if p:
                out[:, j] *= X[:, q] ** p
    return out


def eval_basis_matrix(spec: TrendSpec, X) -> np.ndarray:
    """Basis functions evaluated at each row of X, shape (n, P)."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2:
        raise ShapeError(f"X must be 2-D, got shape {X.shape}")
    n = X.shape[0]
    if spec.kind is TrendKind.ORDINARY:
        return np.ones((n, 1))
    if spec.kind is TrendKind.POLYNOMIAL:
        return _poly_basis(X, spec.degree)
    mu = np.asarray(spec.predictor.predict(X).mean, dtype=float).reshape(n, 1)
    if spec.intercept:
        return np.hstack([np.ones((n, 1)), mu])
    return mu


def eval_basis(spec: TrendSpec, x, d: int | None = None) -> np.ndarray:
    """Basis vector f(x) at a single point."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.ndim != 1:
        raise ShapeError(f"x must be a single point, got shape {x.shape}")
    if d is not None and x.size != d:
        raise ShapeError(f"x has {x.size} coordinates, model has {d}")
    return eval_basis_matrix(spec, x[None, :])[0]


def check_rank(F: np.ndarray, rtol: float = RANK_RTOL) -> None:
    """Raise if F has fewer rows than columns or is numerically rank deficient."""
    n, P = F.shape
    if n < P:
        raise UnderdeterminedTrendError(f"{n} samples cannot identify {P} trend coefficients")
    R = qr(F, mode="r", pivoting=True)[0]
    diag = np.abs(np.diag(R))
    if diag.size == 0 or diag[0] == 0.0 or np.any(diag < rtol * diag[0]):
        raise UnderdeterminedTrendError(f"trend information matrix is rank deficient (P={P})")


def build_information_matrix(spec: TrendSpec, X) -> np.ndarray:
    """Information matrix F (rows = basis at each design point), rank-checked."""
    F = eval_basis_matrix(spec, X)
    check_rank(F)
    return F
