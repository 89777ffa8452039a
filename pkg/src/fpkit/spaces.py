"""Finite-dimensional real vectors, the three workhorse norms, and induced
operator norms.

Everything is float64. Vectors are 1-D numpy arrays, matrices are square 2-D
arrays. The l2 operator norm is estimated by power iteration on M^T M with a
deterministic start vector, so results are reproducible bit for bit on a given
platform; the l1 and l-infinity operator norms are exact column/row sums.
"""

from __future__ import annotations

import math
from enum import Enum

import numpy as np

from .errors import InvariantViolation, NoConvergence

# Dimension guard for user-supplied data. Generous for the intended desk-scale
# experiments; raise it explicitly when constructing bigger problems.
DIM_CAP = 64

# Power-iteration defaults for the l2 operator norm.
POWER_ITER_TOL = 1e-12
POWER_ITER_BUDGET = 10_000


class NormKind(str, Enum):
    L1 = "l1"
    L2 = "l2"
    LINF = "linf"


def as_vector(x, *, dim_cap: int = DIM_CAP, name: str = "vector") -> np.ndarray:
    """Coerce to a finite 1-D float64 array, validating shape and entries."""
    v = np.asarray(x, dtype=float)
    if v.ndim != 1 or v.size == 0:
        raise InvariantViolation(f"{name}: expected a non-empty 1-D array, got shape {v.shape}")
    if v.size > dim_cap:
        raise InvariantViolation(f"{name}: dimension {v.size} exceeds cap {dim_cap}")
    if not np.all(np.isfinite(v)):
        raise InvariantViolation(f"{name}: entries must be finite")
    return v


def as_matrix(m, *, dim_cap: int = DIM_CAP, name: str = "matrix") -> np.ndarray:
    """Coerce to a finite square float64 matrix."""
    a = np.asarray(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise InvariantViolation(f"{name}: expected a non-empty square matrix, got shape {a.shape}")
    if a.shape[0] > dim_cap:
        raise InvariantViolation(f"{name}: dimension {a.shape[0]} exceeds cap {dim_cap}")
    if not np.all(np.isfinite(a)):
        raise InvariantViolation(f"{name}: entries must be finite")
    return a


def norm(v, kind: NormKind = NormKind.L2) -> float:
    """Vector norm of the requested kind. Zero exactly on the zero vector."""
    v = np.asarray(v, dtype=float)
    kind = NormKind(kind)
    if kind is NormKind.L1:
        return float(np.sum(np.abs(v)))
    if kind is NormKind.L2:
        return float(np.linalg.norm(v))
    return float(np.max(np.abs(v)))


def norms_rowwise(rows: np.ndarray, kind: NormKind = NormKind.L2) -> np.ndarray:
    """Norm of each row of a 2-D array, vectorized."""
    kind = NormKind(kind)
    if kind is NormKind.L1:
        return np.sum(np.abs(rows), axis=1)
    if kind is NormKind.L2:
        return np.sqrt(np.sum(rows * rows, axis=1))
    return np.max(np.abs(rows), axis=1)


def operator_norm(
    M,
    kind: NormKind = NormKind.L2,
    *,
    tol: float = POWER_ITER_TOL,
    max_iter: int = POWER_ITER_BUDGET,
) -> float:
    """Induced operator norm of a square matrix.

    l1 and l-infinity are the exact maximum absolute column and row sums. l2
    (the largest singular value) is estimated by power iteration on ``M^T M``
    starting from ``(1, ..., 1)/sqrt(d)``; the iteration stops once successive
    Rayleigh quotients agree to ``tol`` (relative, floored at 1 absolute).

    Raises
    ------
    NoConvergence
        If the Rayleigh quotients fail to stabilize within ``max_iter``
        multiplications. Matrices whose two largest singular values are
        nearly equal but distinct can need more than the default budget.
    """
    M = as_matrix(M)
    kind = NormKind(kind)
    if kind is NormKind.L1:
        return float(np.max(np.sum(np.abs(M), axis=0)))
    if kind is NormKind.LINF:
        return float(np.max(np.sum(np.abs(M), axis=1)))
    return _spectral_norm_power(M, tol, max_iter)


def _spectral_norm_power(M: np.ndarray, tol: float, max_iter: int) -> float:
    d = M.shape[0]
    B = M.T @ M
    if not np.any(B):
        return 0.0
    # Deterministic starts: the uniform direction first, canonical basis
    # vectors as fallbacks if an iterate lands exactly in the null space.
    starts = [np.full(d, 1.0 / math.sqrt(d))]
    starts.extend(np.eye(d)[i] for i in range(d))
    for x in starts:
        rq_prev = float(x @ B @ x)
        stalled = False
        for _ in range(max_iter):
            y = B @ x
            ny = float(np.linalg.norm(y))
            if ny == 0.0:
                stalled = True  # start was annihilated; try the next one
                break
            x = y / ny
            rq = float(x @ B @ x)
            if abs(rq - rq_prev) <= tol * max(1.0, abs(rq)):
                return math.sqrt(max(rq, 0.0))
            rq_prev = rq
        if not stalled:
            raise NoConvergence(
                f"l2 operator norm: Rayleigh quotient did not stabilize within {max_iter} iterations"
            )
    raise NoConvergence("l2 operator norm: every deterministic start vector was annihilated")
