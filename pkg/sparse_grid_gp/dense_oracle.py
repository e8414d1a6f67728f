"""Reference Gaussian process built on the full N x N covariance.

Works on any point set. It checks the sparse grid fast path and runs the
lattice and Latin hypercube baselines.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from sparse_grid_gp import settings
from sparse_grid_gp.exceptions import (DenseSizeError, InvalidDesignError,
                                       NonSPDError, ShapeError)
from sparse_grid_gp.items import MleResult
from sparse_grid_gp.kernels import MeanBasis, SeparableKernel
from sparse_grid_gp.likelihood import (ProfilePoint, check_sigma2, gls_solve,
                                       search_mle)

logger = logging.getLogger(__name__)


def _points(points) -> np.ndarray:
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if points.shape[0] == 0:
        raise InvalidDesignError("design has no points")
    return points


def dense_factor(points, kernel: SeparableKernel, max_points: int = settings.DENSE_MAX_POINTS):
    """Build Sigma over ``points`` and Cholesky-factorize it.

    Returns:
        tuple: (Sigma, (lower factor, True)) for scipy's cho_solve

    Raises:
        DenseSizeError: more than ``max_points`` points
        NonSPDError: Sigma is not numerically positive definite, including
            designs with repeated points and factors whose smallest squared
            pivot falls below n * eps * max(diag(Sigma))
    """
    points = _points(points)
    n = points.shape[0]
    if n > max_points:
        raise DenseSizeError(
            f"dense covariance on {n} points exceeds the limit of {max_points}; reduce the design size")
    if np.unique(points, axis=0).shape[0] < n:
        raise NonSPDError(f"dense covariance on {n} points is singular: the design repeats a point")
    sigma = kernel(points, points)
    try:
        factor = cho_factor(sigma, lower=True)
    except np.linalg.LinAlgError as exc:
        raise NonSPDError(f"dense covariance on {n} points is not positive definite "
                          "(repeated points or a near-singular lengthscale)") from exc
    pivot = float(np.min(np.diag(factor[0]))) ** 2
    if pivot < n * np.finfo(float).eps * float(np.max(np.diag(sigma))):
        raise NonSPDError(f"dense covariance on {n} points is numerically singular "
                          f"(smallest squared pivot {pivot:.3g})")
    return sigma, factor


def dense_weights(points, kernel: SeparableKernel, B,
                  max_points: int = settings.DENSE_MAX_POINTS) -> np.ndarray:
    """Sigma^{-1} B by a dense Cholesky solve."""
    _, factor = dense_factor(points, kernel, max_points)
    return cho_solve(factor, np.asarray(B, dtype=float))


def dense_logdet(points, kernel: SeparableKernel,
                 max_points: int = settings.DENSE_MAX_POINTS) -> float:
    _, (c, _) = dense_factor(points, kernel, max_points)
    return 2.0 * float(np.sum(np.log(np.diag(c))))


@dataclass(eq=False)
class DenseGpModel:
    """Kriging model with an explicitly factorized covariance.

    Attributes:
        points (np.ndarray): (N, d) design points
        kernel (SeparableKernel): covariance including sigma2
        basis (MeanBasis): mean basis; the mean is basis(x) @ beta
        beta (np.ndarray): mean coefficients
        y (np.ndarray): observations
        sigma (np.ndarray): N x N covariance
        factor (tuple): Cholesky factor of sigma for cho_solve
        w (np.ndarray): Sigma^{-1} (y - mu)
    """

    points: np.ndarray
    kernel: SeparableKernel
    basis: Optional[MeanBasis]
    beta: np.ndarray
    y: np.ndarray
    sigma: np.ndarray
    factor: tuple
    w: np.ndarray

    @property
    def N(self) -> int:
        return self.points.shape[0]

    @property
    def F(self) -> np.ndarray:
        if self.basis is None:
            return np.zeros((self.N, 0))
        return self.basis(self.points)

    @property
    def mu(self) -> np.ndarray:
        return self.mean_at(self.points)

    def mean_at(self, X) -> np.ndarray:
        X = np.atleast_2d(X)
        if self.basis is None:
            return np.zeros(X.shape[0])
        return self.basis(X) @ self.beta

    def solve(self, B) -> np.ndarray:
        return cho_solve(self.factor, np.asarray(B, dtype=float))


def dense_fit(points, kernel: SeparableKernel, basis: Optional[MeanBasis], y, beta=None,
              max_points: int = settings.DENSE_MAX_POINTS) -> DenseGpModel:
    """Factorize Sigma and compute w = Sigma^{-1} (y - F beta).

    With ``beta=None`` and a basis, beta is the GLS estimate; with no basis
    the mean is zero.
    """
    points = _points(points)
    y = np.asarray(y, dtype=float)
    if y.shape != (points.shape[0],):
        raise ShapeError(f"got {y.shape} observations for {points.shape[0]} points")
    sigma, factor = dense_factor(points, kernel, max_points)
    if basis is None:
        beta = np.zeros(0)
        mu = np.zeros_like(y)
    else:
        F = basis(points)
        if beta is None:
            QF = cho_solve(factor, F)
            beta = gls_solve(QF, F, QF.T @ y)
        beta = np.asarray(beta, dtype=float).reshape(-1)
        mu = F @ beta
    w = cho_solve(factor, y - mu)
    logger.debug("Dense fit on %d points", points.shape[0])
    return DenseGpModel(points, kernel, basis, beta, y, sigma, factor, w)


def dense_predict(model: DenseGpModel, x0):
    """Kriging mean mu(x0) + sigma(x0)^T w and variance C(x0,x0) - sigma(x0)^T Sigma^{-1} sigma(x0)."""
    single = np.ndim(x0) == 1
    X0 = np.atleast_2d(np.asarray(x0, dtype=float))
    cross = model.kernel(X0, model.points)
    mean = model.mean_at(X0) + cross @ model.w
    explained = np.sum(cross * model.solve(cross.T).T, axis=1)
    variance = np.maximum(model.kernel.diag(X0) - explained, 0.0)
    if single:
        return float(mean[0]), float(variance[0])
    return mean, variance


def dense_gls(points, correlation: SeparableKernel, F, y,
              max_points: int = settings.DENSE_MAX_POINTS):
    """(beta_hat, sigma2_hat) from the dense correlation matrix."""
    F = np.asarray(F, dtype=float)
    F = F[:, None] if F.ndim == 1 else F
    y = np.asarray(y, dtype=float)
    _, factor = dense_factor(points, correlation.correlation(), max_points)
    QF = cho_solve(factor, F)
    beta = gls_solve(QF, F, QF.T @ y)
    residual = y - F @ beta
    sigma2 = check_sigma2(float(residual @ cho_solve(factor, residual)) / y.shape[0], y)
    return beta, sigma2


def dense_profile_point(points, F, y, phi: float, nu: float = 2.5,
                        nugget: float = settings.NUGGET,
                        max_points: int = settings.DENSE_MAX_POINTS) -> ProfilePoint:
    points = _points(points)
    correlation = SeparableKernel.isotropic(points.shape[1], nu, phi, nugget=nugget)
    beta, sigma2 = dense_gls(points, correlation, F, y, max_points)
    logdet = dense_logdet(points, correlation, max_points)
    n = points.shape[0]
    loglik = math.inf if sigma2 == 0 else -0.5 * (n * math.log(sigma2) + logdet + n)
    return ProfilePoint(phi, beta, sigma2, logdet, loglik)


def dense_loglik(points, F, y, phi: float, nu: float = 2.5, nugget: float = settings.NUGGET,
                 beta=None, sigma2: Optional[float] = None,
                 max_points: int = settings.DENSE_MAX_POINTS) -> float:
    """Log-likelihood -(N log sigma2 + log|R| + r^T R^{-1} r / sigma2) / 2.

    beta and sigma2 default to their GLS plug-in values, which gives the
    profile log-likelihood.
    """
    points = _points(points)
    F = np.asarray(F, dtype=float)
    F = F[:, None] if F.ndim == 1 else F
    y = np.asarray(y, dtype=float)
    correlation = SeparableKernel.isotropic(points.shape[1], nu, phi, nugget=nugget)
    _, factor = dense_factor(points, correlation, max_points)
    if beta is None:
        QF = cho_solve(factor, F)
        beta = gls_solve(QF, F, QF.T @ y)
    residual = y - F @ np.asarray(beta, dtype=float).reshape(-1)
    quad = float(residual @ cho_solve(factor, residual))
    if sigma2 is None:
        sigma2 = check_sigma2(quad / y.shape[0], y)
    if not sigma2 > 0:
        return math.inf
    logdet = 2.0 * float(np.sum(np.log(np.diag(factor[0]))))
    return -0.5 * (y.shape[0] * math.log(sigma2) + logdet + quad / sigma2)


def dense_mle(points, F, y, phi_bracket=settings.PHI_BRACKET, nu: float = 2.5,
              nugget: float = settings.NUGGET, tol: float = settings.GOLDEN_TOL,
              max_evals: int = settings.GOLDEN_MAX_EVALS, probes=None,
              max_points: int = settings.DENSE_MAX_POINTS) -> MleResult:
    """Dense counterpart of likelihood.fit_mle, with the same optimizer."""
    points = _points(points)
    return search_mle(lambda phi: dense_profile_point(points, F, y, phi, nu, nugget, max_points),
                      phi_bracket, points.shape[0], nu, nugget, "dense", tol, max_evals, probes)
