"""Fast kriging on sparse grid designs.

The weights w = Sigma^{-1} (y - mu) are assembled from lattice-wise
Kronecker solves combined with signed Smolyak coefficients, so the N x N
covariance matrix is never formed.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from functools import lru_cache
from typing import Callable, Optional

import numpy as np

from sparse_grid_gp.designs import (SparseGridDesign, index_set_P,
                                    smolyak_coefficient)
from sparse_grid_gp.exceptions import ShapeError
from sparse_grid_gp.kernels import SeparableKernel, kernel_matrix
from sparse_grid_gp.kron_linalg import (ComponentFactorization, factorize,
                                        kron_solve, level_zero)

logger = logging.getLogger(__name__)

# Largest cross-covariance block (probes x design points) built at once
_CHUNK_ELEMENTS = 2_000_000


@lru_cache(maxsize=64)
def smolyak_terms(eta: int, d: int) -> tuple:
    """(j, a(j)) for j in P(eta), in lexicographic order."""
    return tuple((j, smolyak_coefficient(j, eta, d)) for j in index_set_P(eta, d))


class ComponentFactors:
    """Factorizations of the 1-D correlation matrices S_{i,j} of one design.

    Identical (1-D kernel, point set) pairs share one factorization, so a
    symmetric schedule with an isotropic kernel factorizes each level once.
    """

    def __init__(self, design: SparseGridDesign, kernel: SeparableKernel):
        if kernel.d != design.d:
            raise ShapeError(f"kernel has {kernel.d} components, design has d={design.d}")
        self.design = design
        self.components = kernel.components
        self._shared: dict = {}
        self._factors: dict = {}

    def factor(self, i: int, level: int) -> ComponentFactorization:
        """Factorization of S_{i+1,level} (``i`` is 0-based)."""
        key = (i, level)
        if key not in self._factors:
            if level == 0:
                self._factors[key] = level_zero(i + 1)
            else:
                schedule = self.design.schedules[i]
                shared_key = (self.components[i], schedule.coordinates[:schedule.size(level)])
                if shared_key not in self._shared:
                    matrix = kernel_matrix(self.components[i], schedule.points(level), check=False)
                    self._shared[shared_key] = factorize(matrix, i + 1, level)
                self._factors[key] = self._shared[shared_key]
        return self._factors[key]

    def factors_for(self, j) -> list:
        return [self.factor(i, level) for i, level in enumerate(j)]

    def prepare(self) -> "ComponentFactors":
        """Factorize every level up to eta - d + 1 in every dimension."""
        for i in range(self.design.d):
            for level in range(self.design.max_level + 1):
                self.factor(i, level)
        return self

    def logdets(self, i: int) -> np.ndarray:
        return np.array([self.factor(i, level).logdet for level in range(self.design.max_level + 1)])


def _columns(A, n: int, name: str):
    A = np.asarray(A, dtype=float)
    vector = A.ndim == 1
    if vector:
        A = A[:, None]
    if A.ndim != 2 or A.shape[0] != n:
        raise ShapeError(f"{name} has shape {A.shape}, expected {n} rows")
    return A, vector


def q_solve(design: SparseGridDesign, kernel: SeparableKernel, A,
            factors: Optional[ComponentFactors] = None,
            max_workers: Optional[int] = None) -> np.ndarray:
    """Sigma^{-1} A for any A with one row per design point.

    Each term gathers the lattice rows of A, applies the Kronecker inverse
    and scatters a(j) times the result back. Terms may run on a thread
    pool; the reduction always follows the sorted P(eta) order.
    """
    A, vector = _columns(A, design.N, "A")
    if factors is None:
        factors = ComponentFactors(design, kernel)
    factors.prepare()
    terms = smolyak_terms(design.eta, design.d)

    def solve_term(term):
        j, _ = term
        rows = design.lattice_maps[j]
        return rows, kron_solve(factors.factors_for(j), A[rows])

    out = np.zeros_like(A)
    if max_workers and max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as executor:
            results = list(executor.map(solve_term, terms))
    else:
        results = map(solve_term, terms)
    for (_, a), (rows, solved) in zip(terms, results):
        out[rows] += a * solved
    out /= kernel.sigma2
    logger.debug("q_solve over %d lattices, N=%d, %d columns", len(terms), design.N, A.shape[1])
    return out[:, 0] if vector else out


def compute_weights(design: SparseGridDesign, kernel: SeparableKernel, y, mu,
                    factors: Optional[ComponentFactors] = None,
                    max_workers: Optional[int] = None) -> np.ndarray:
    """w = Sigma^{-1} (y - mu), indexed by global point id.

    Raises:
        ShapeError: y or mu is not aligned with the design
        NonSPDError: a component matrix fails to factorize
    """
    y = np.asarray(y, dtype=float)
    mu = np.broadcast_to(np.asarray(mu, dtype=float), y.shape)
    if y.ndim != 1 or y.shape[0] != design.N:
        raise ShapeError(f"got {y.shape} observations for {design.N} design points")
    return q_solve(design, kernel, y - mu, factors=factors, max_workers=max_workers)


def _chunks(n_rows: int, n_cols: int):
    step = max(1, _CHUNK_ELEMENTS // max(n_cols, 1))
    for start in range(0, n_rows, step):
        yield slice(start, min(start + step, n_rows))


def predict_mean(design: SparseGridDesign, kernel: SeparableKernel, w,
                 mu_fn: Optional[Callable], x0):
    """mu(x0) + sigma(x0)^T w at one point (d,) or many (n, d)."""
    single = np.ndim(x0) == 1
    X0 = np.atleast_2d(np.asarray(x0, dtype=float))
    w = np.asarray(w, dtype=float)
    mean = np.zeros(X0.shape[0]) if mu_fn is None else np.asarray(mu_fn(X0), dtype=float).reshape(-1)
    for rows in _chunks(X0.shape[0], design.N):
        mean[rows] += kernel(X0[rows], design.points) @ w
    return float(mean[0]) if single else mean


class VarianceProfile:
    """One-dimensional prediction errors eps_{i,j} and their decrements Delta_{i,j}.

    All values are for the correlation (unit variance) kernel.
    """

    def __init__(self, design: SparseGridDesign, kernel: SeparableKernel,
                 factors: Optional[ComponentFactors] = None):
        self.design = design
        self.components = kernel.components
        self.factors = (factors or ComponentFactors(design, kernel)).prepare()

    def epsilon(self, i: int, level: int, x) -> np.ndarray:
        """eps_{i+1,level}(x) for scalar inputs ``x`` (``i`` is 0-based)."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        component = self.components[i]
        prior = component(x, x)
        if level == 0:
            return prior
        pts = self.design.schedules[i].points(level)
        r = component(x[:, None], pts[None, :])
        solved = self.factors.factor(i, level).solve(r.T)
        return prior - np.sum(r.T * solved, axis=0)

    def delta(self, i: int, level: int, x) -> np.ndarray:
        return self.epsilon(i, level - 1, x) - self.epsilon(i, level, x)

    def deltas(self, X0: np.ndarray) -> np.ndarray:
        """Array (d, max_level + 1, n); entry [i, j] holds Delta_{i,j}, row j=0 is unused."""
        X0 = np.atleast_2d(X0)
        L = self.design.max_level
        out = np.zeros((self.design.d, L + 1, X0.shape[0]))
        for i in range(self.design.d):
            eps = [self.epsilon(i, level, X0[:, i]) for level in range(L + 1)]
            for level in range(1, L + 1):
                out[i, level] = eps[level - 1] - eps[level]
        return out

    def explained(self, X0: np.ndarray) -> np.ndarray:
        """sum over J(eta) of prod_i Delta_{i,j_i}(x0)."""
        X0 = np.atleast_2d(X0)
        index = self.design.index_array
        total = np.zeros(X0.shape[0])
        for rows in _chunks(X0.shape[0], index.shape[0]):
            deltas = self.deltas(X0[rows])
            prod = np.ones((index.shape[0], deltas.shape[2]))
            for i in range(self.design.d):
                prod *= deltas[i, index[:, i]]
            total[rows] = prod.sum(axis=0)
        return total


def predict_variance(design: SparseGridDesign, kernel: SeparableKernel, x0,
                     profile: Optional[VarianceProfile] = None, return_raw: bool = False):
    """Predictive variance C(x0, x0) - sum_J prod_i Delta_{i,j_i}(x0), clamped at 0.

    With ``return_raw=True`` returns (clamped, raw).
    """
    single = np.ndim(x0) == 1
    X0 = np.atleast_2d(np.asarray(x0, dtype=float))
    if profile is None:
        profile = VarianceProfile(design, kernel)
    prior = kernel.correlation().diag(X0)
    raw = kernel.sigma2 * (prior - profile.explained(X0))
    clamped = np.maximum(raw, 0.0)
    n_negative = int(np.sum(raw < -1e-8 * kernel.sigma2 * prior))
    if n_negative:
        logger.warning("Clamped %d predictive variances below -1e-8 C(x0,x0) to 0", n_negative)
    if single:
        clamped, raw = float(clamped[0]), float(raw[0])
    return (clamped, raw) if return_raw else clamped


class SparseGridPredictor:
    """Kriging predictor on a sparse grid design with a fixed kernel and mean.

    Args:
        design (SparseGridDesign): design the observations were taken on
        kernel (SeparableKernel): covariance, including sigma2
        mu_fn (Callable, optional): mean function of an (n, d) array; zero when None
    """

    def __init__(self, design: SparseGridDesign, kernel: SeparableKernel,
                 mu_fn: Optional[Callable] = None, max_workers: Optional[int] = None):
        self.design = design
        self.kernel = kernel
        self.mu_fn = mu_fn
        self.max_workers = max_workers
        self.factors = ComponentFactors(design, kernel)
        self.w = None
        self._profile = None

    def fit(self, y) -> "SparseGridPredictor":
        mu = 0.0 if self.mu_fn is None else self.mu_fn(self.design.points)
        self.w = compute_weights(self.design, self.kernel, y, mu,
                                 factors=self.factors, max_workers=self.max_workers)
        return self

    def predict(self, x0, return_variance: bool = True):
        mean = predict_mean(self.design, self.kernel, self.w, self.mu_fn, x0)
        if not return_variance:
            return mean
        if self._profile is None:
            self._profile = VarianceProfile(self.design, self.kernel, self.factors)
        return mean, predict_variance(self.design, self.kernel, x0, profile=self._profile)
