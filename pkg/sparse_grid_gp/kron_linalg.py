"""Factorizations of small component matrices and Kronecker-product solves.

Row-major convention throughout: for factors S_1, ..., S_d the vector
index runs with dimension d fastest, matching ``np.reshape`` in C order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from sparse_grid_gp.exceptions import NonSPDError, ShapeError


@dataclass(frozen=True, eq=False)
class ComponentFactorization:
    """Cholesky factor of one S_{i,j} with its log-determinant.

    A factorization of size 0 stands for level 0 (|S_{i,0}| := 1).
    """

    factor: Optional[np.ndarray]
    logdet: float
    size: int
    dimension: Optional[int] = None
    level: Optional[int] = None

    def solve(self, b: np.ndarray) -> np.ndarray:
        return cho_solve((self.factor, True), b, check_finite=False)


def factorize(matrix, dimension: Optional[int] = None,
              level: Optional[int] = None) -> ComponentFactorization:
    """Cholesky-factorize an SPD matrix.

    Raises:
        ShapeError: matrix is not square
        NonSPDError: the factorization fails
    """
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ShapeError(f"expected a square matrix, got shape {matrix.shape}")
    if matrix.shape[0] == 0:
        return level_zero(dimension)
    try:
        c, _ = cho_factor(matrix, lower=True)
    except (np.linalg.LinAlgError, ValueError) as exc:
        where = "" if dimension is None else f" (dimension {dimension}, level {level})"
        raise NonSPDError(f"matrix of size {matrix.shape[0]}{where} is not positive definite") from exc
    logdet = 2.0 * float(np.sum(np.log(np.diag(c))))
    return ComponentFactorization(c, logdet, matrix.shape[0], dimension, level)


def level_zero(dimension: Optional[int] = None) -> ComponentFactorization:
    return ComponentFactorization(None, 0.0, 0, dimension, 0)


def component_logdet(factor: Optional[ComponentFactorization]) -> float:
    """log det S_{i,j}; level 0 (or None) gives 0."""
    if factor is None:
        return 0.0
    return factor.logdet


def _as_columns(B: np.ndarray, n: int):
    B = np.asarray(B, dtype=float)
    vector = B.ndim == 1
    if vector:
        B = B[:, None]
    if B.ndim != 2 or B.shape[0] != n:
        raise ShapeError(f"right-hand side has shape {B.shape}, expected {n} rows")
    return B, vector


def _apply_along_axes(sizes, B, apply):
    n = math.prod(sizes)
    B, vector = _as_columns(B, n)
    if n == 0:
        return B[:, 0] if vector else B
    m = B.shape[1]
    X = B.reshape(*sizes, m)
    for i, size in enumerate(sizes):
        X = np.moveaxis(X, i, 0)
        shape = X.shape
        X = apply(i, X.reshape(size, -1)).reshape(shape)
        X = np.moveaxis(X, 0, i)
    out = np.ascontiguousarray(X.reshape(n, m))
    return out[:, 0] if vector else out


def kron_solve(factors, B) -> np.ndarray:
    """(S_1 kron ... kron S_d)^{-1} B without forming the Kronecker product.

    Args:
        factors (list[ComponentFactorization]): factors of S_1, ..., S_d
        B (np.ndarray): prod(m_i) rows, row-major with dimension d fastest

    Returns:
        np.ndarray: same shape as B
    """
    return _apply_along_axes([f.size for f in factors], B, lambda i, X: factors[i].solve(X))


def kron_matvec(matrices, B) -> np.ndarray:
    """(A_1 kron ... kron A_d) B without forming the Kronecker product."""
    matrices = [np.asarray(A, dtype=float) for A in matrices]
    return _apply_along_axes([A.shape[0] for A in matrices], B, lambda i, X: matrices[i] @ X)
