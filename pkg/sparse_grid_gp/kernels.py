"""Separable Matern covariances and mean basis functions"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache, partial

import numpy as np

from sparse_grid_gp import constant
from sparse_grid_gp.exceptions import (InvalidParameterError, NonSPDError,
                                       UnsupportedSmoothnessError)
from sparse_grid_gp.kron_linalg import factorize


@lru_cache(maxsize=None)
def _matern_coefficients(p: int) -> tuple:
    # nu = p + 1/2: exp(-a) * sum_i c_i a^(p-i), a = sqrt(2 nu) h
    scale = math.factorial(p) / math.factorial(2 * p)
    return tuple(
        scale * math.factorial(p + i) / (math.factorial(i) * math.factorial(p - i)) * 2 ** (p - i)
        for i in range(p + 1)
    )


def _check_nu(nu: float) -> int:
    if nu not in constant.SUPPORTED_NU:
        raise UnsupportedSmoothnessError(
            f"nu={nu} has no closed form here, expected one of {constant.SUPPORTED_NU}")
    return int(nu - 0.5)


def matern_eval(nu: float, phi: float, x, y):
    """Matern correlation with half-integer smoothness, h = |x - y| / phi.

    Broadcasts over array inputs; returns a float for scalar inputs.
    """
    p = _check_nu(nu)
    if not phi > 0:
        raise InvalidParameterError(f"lengthscale must be positive, got phi={phi}")
    a = math.sqrt(2.0 * nu) * np.abs(np.subtract(x, y)) / phi
    coefficients = _matern_coefficients(p)
    poly = np.full_like(a, coefficients[0])
    for coef in coefficients[1:]:
        poly = poly * a + coef
    value = poly * np.exp(-a)
    return float(value) if np.ndim(value) == 0 else value


@dataclass(frozen=True)
class MaternKernel1D:
    """One-dimensional Matern correlation.

    ``nugget`` is added wherever the two inputs are the same float, which puts
    it on the diagonal of every matrix built from distinct points.
    """

    nu: float
    phi: float
    nugget: float = 0.0

    def __post_init__(self):
        _check_nu(self.nu)
        if not self.phi > 0:
            raise InvalidParameterError(f"lengthscale must be positive, got phi={self.phi}")
        if self.nugget < 0:
            raise InvalidParameterError(f"nugget must be nonnegative, got {self.nugget}")

    def __call__(self, x, y):
        value = matern_eval(self.nu, self.phi, x, y)
        if self.nugget:
            value = value + self.nugget * np.equal(x, y)
        return value

    def with_phi(self, phi: float) -> "MaternKernel1D":
        return MaternKernel1D(self.nu, phi, self.nugget)


@dataclass(frozen=True)
class SeparableKernel:
    """C(x1, x2) = sigma2 * prod_i R_i(x1[i], x2[i])"""

    components: tuple
    sigma2: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))
        if not self.components:
            raise InvalidParameterError("a separable kernel needs at least one component")
        if not self.sigma2 > 0:
            raise InvalidParameterError(f"process variance must be positive, got {self.sigma2}")

    @classmethod
    def isotropic(cls, d: int, nu: float, phi: float, sigma2: float = 1.0,
                  nugget: float = 0.0) -> "SeparableKernel":
        return cls((MaternKernel1D(nu, phi, nugget),) * d, sigma2)

    @property
    def d(self) -> int:
        return len(self.components)

    def correlation(self) -> "SeparableKernel":
        return SeparableKernel(self.components, 1.0)

    def with_phi(self, phi: float) -> "SeparableKernel":
        return SeparableKernel(tuple(c.with_phi(phi) for c in self.components), self.sigma2)

    def with_sigma2(self, sigma2: float) -> "SeparableKernel":
        return SeparableKernel(self.components, sigma2)

    def __call__(self, X1, X2) -> np.ndarray:
        """Cross-covariance matrix of shape (n1, n2)."""
        X1 = np.atleast_2d(np.asarray(X1, dtype=float))
        X2 = np.atleast_2d(np.asarray(X2, dtype=float))
        K = np.full((X1.shape[0], X2.shape[0]), self.sigma2)
        for i, component in enumerate(self.components):
            K *= component(X1[:, i, None], X2[None, :, i])
        return K

    def diag(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        out = np.full(X.shape[0], self.sigma2)
        for i, component in enumerate(self.components):
            out *= component(X[:, i], X[:, i])
        return out


def _ones(X):
    return np.ones(X.shape[0])


def _coordinate(i, X):
    return X[:, i]


@dataclass(frozen=True)
class MeanBasis:
    """Mean basis f_1..f_p; each function maps an (n, d) array to n values."""

    functions: tuple
    name: str = "custom"

    @classmethod
    def constant(cls) -> "MeanBasis":
        return cls((_ones,), "constant")

    @classmethod
    def linear(cls, d: int) -> "MeanBasis":
        return cls((_ones,) + tuple(partial(_coordinate, i) for i in range(d)), "linear")

    @property
    def p(self) -> int:
        return len(self.functions)

    def __call__(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return np.column_stack([f(X) for f in self.functions])


def kernel_matrix(kernel, pts, sigma2: float = 1.0, check: bool = True) -> np.ndarray:
    """Matrix sigma2 * [C(x, x')] over 1-D points ``pts``.

    Raises:
        NonSPDError: the matrix fails its Cholesky factorization (``check=True``)
    """
    pts = np.asarray(pts, dtype=float).ravel()
    K = sigma2 * kernel(pts[:, None], pts[None, :])
    if check:
        try:
            factorize(K)
        except NonSPDError:
            raise NonSPDError(f"kernel matrix on {pts.size} points is not positive definite")
    return K
