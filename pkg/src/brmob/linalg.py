"""Dense symmetric positive-definite linear algebra.

Thin, contract-checked wrappers around LAPACK (via numpy/scipy) for the
covariance matrices used everywhere else: Cholesky factorization, weighted
norms through the factor, SPD inversion, and eigenvalue extremes.  All
values are immutable after construction and every operation is pure.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_solve, solve_triangular

from .errors import DimensionMismatch, NotPositiveDefinite, OutOfRange

#: Desk-scale guardrail on matrix/vector dimensions.
MAX_DIM = 4096

#: Relative asymmetry tolerated before an input is rejected outright.
SYMMETRY_RTOL = 1e-12

#: A Cholesky pivot at or below this fraction of the largest diagonal
#: entry is treated as numerically indefinite.
PIVOT_RTOL = 1e-14


def _as_square(entries: np.ndarray) -> np.ndarray:
    arr = np.asarray(entries, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {arr.shape}")
    if arr.shape[0] == 0 or arr.shape[0] > MAX_DIM:
        raise OutOfRange(f"dimension {arr.shape[0]} outside [1, {MAX_DIM}]")
    return arr


@dataclass(frozen=True)
class SpdMatrix:
    """Symmetric positive-definite matrix.

    Construction symmetrizes the input as ``(M + M.T) / 2`` after checking
    that the asymmetry is within ``SYMMETRY_RTOL`` relative to the largest
    entry; positive definiteness itself is only certified by a successful
    :func:`cholesky`.
    """

    entries: np.ndarray

    def __post_init__(self) -> None:
        arr = _as_square(self.entries)
        scale = np.max(np.abs(arr)) or 1.0
        if np.max(np.abs(arr - arr.T)) > SYMMETRY_RTOL * scale:
            raise NotPositiveDefinite("matrix is not symmetric within tolerance")
        sym = (arr + arr.T) / 2.0
        sym.flags.writeable = False
        object.__setattr__(self, "entries", sym)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @staticmethod
    def identity(dim: int) -> "SpdMatrix":
        return SpdMatrix(np.eye(dim))


@dataclass(frozen=True)
class SpdFactor:
    """Lower-triangular Cholesky factor L with ``L @ L.T`` equal to the source."""

    lower: np.ndarray

    def __post_init__(self) -> None:
        arr = _as_square(self.lower)
        if np.any(np.diag(arr) <= 0.0):
            raise NotPositiveDefinite("factor diagonal must be strictly positive")
        tri = np.tril(arr)
        tri.flags.writeable = False
        object.__setattr__(self, "lower", tri)

    @property
    def dim(self) -> int:
        return self.lower.shape[0]


def cholesky(m: SpdMatrix) -> SpdFactor:
    """Factor ``m = L @ L.T``.

    Raises :class:`NotPositiveDefinite` when LAPACK rejects the matrix or
    when any pivot (squared factor diagonal) falls at or below
    ``PIVOT_RTOL`` times the largest diagonal entry.
    """
    try:
        lower = np.linalg.cholesky(m.entries)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(str(exc)) from exc
    pivots = np.diag(lower) ** 2
    if np.min(pivots) <= PIVOT_RTOL * np.max(np.diag(m.entries)):
        raise NotPositiveDefinite("pivot below tolerance; matrix numerically singular")
    return SpdFactor(lower)


def _check_vector(x: np.ndarray, dim: int) -> np.ndarray:
    vec = np.asarray(x, dtype=float)
    if vec.shape != (dim,):
        raise DimensionMismatch(f"expected vector of shape ({dim},), got {vec.shape}")
    return vec


def weighted_norm(x: np.ndarray, f: SpdFactor) -> float:
    """Norm ``sqrt(x.T @ S @ x)`` for the matrix S factored by ``f``."""
    vec = _check_vector(x, f.dim)
    return float(np.linalg.norm(f.lower.T @ vec))


def inverse_weighted_norm(x: np.ndarray, f: SpdFactor) -> float:
    """Norm ``sqrt(x.T @ inv(S) @ x)`` via a triangular solve, no explicit inverse."""
    vec = _check_vector(x, f.dim)
    y = solve_triangular(f.lower, vec, lower=True)
    return float(np.linalg.norm(y))


def spd_inverse(m: SpdMatrix) -> SpdMatrix:
    """Inverse of an SPD matrix through its Cholesky factor."""
    factor = cholesky(m)
    inv = cho_solve((factor.lower, True), np.eye(m.dim))
    return SpdMatrix((inv + inv.T) / 2.0)


def max_eigenvalue(m: SpdMatrix) -> float:
    """Largest eigenvalue of an SPD matrix (symmetric eigensolve)."""
    return float(np.linalg.eigvalsh(m.entries)[-1])
