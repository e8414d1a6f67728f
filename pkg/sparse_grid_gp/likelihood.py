"""Profile likelihood on sparse grid designs.

The log-determinant of the correlation matrix comes from the 1-D factor
log-determinants alone; beta and sigma2 have closed forms built on q_solve.
The additive constant -(N/2) log(2 pi) is dropped everywhere.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from sparse_grid_gp import settings
from sparse_grid_gp.designs import SparseGridDesign
from sparse_grid_gp.exceptions import (FitFailureError, InvalidParameterError,
                                       NonSPDError, NumericalFailureError,
                                       ShapeError, SingularBasisError)
from sparse_grid_gp.items import MleResult
from sparse_grid_gp.kernels import SeparableKernel
from sparse_grid_gp.sg_predictor import (ComponentFactors, VarianceProfile,
                                         predict_variance, q_solve)
from sparse_grid_gp.utils import rng_stream

logger = logging.getLogger(__name__)

_INV_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
# Condition number above which F^T R^{-1} F counts as singular
_BASIS_COND_LIMIT = 1e12


def sg_logdet(design: SparseGridDesign, kernel: SeparableKernel,
              factors: Optional[ComponentFactors] = None) -> float:
    """log |Sigma| without forming Sigma.

    Sum over j in J(eta) and dimensions i of
    (log|S_{i,j_i}| - log|S_{i,j_i - 1}|) * prod_{k != i} (m_k(j_k) - m_k(j_k - 1)),
    plus N log sigma2.
    """
    if factors is None:
        factors = ComponentFactors(design, kernel)
    factors.prepare()
    d = design.d
    index = design.index_array
    dims = np.arange(d)[None, :]
    increments = np.array([np.diff(design.sizes(i)) for i in range(d)], dtype=float)
    logdet_steps = np.array([np.diff(factors.logdets(i)) for i in range(d)])
    counts = increments[dims, index - 1]
    steps = logdet_steps[dims, index - 1]

    # products of the counts over k < i and over k > i
    before = np.ones_like(counts)
    before[:, 1:] = np.cumprod(counts[:, :-1], axis=1)
    after = np.ones_like(counts)
    after[:, :-1] = np.cumprod(counts[:, ::-1], axis=1)[:, ::-1][:, 1:]

    logdet = float(np.sum(steps * before * after))
    return logdet + design.N * math.log(kernel.sigma2)


def _check_basis(design: SparseGridDesign, F, y):
    F = np.asarray(F, dtype=float)
    if F.ndim == 1:
        F = F[:, None]
    y = np.asarray(y, dtype=float)
    if F.shape[0] != design.N or y.shape != (design.N,):
        raise ShapeError(f"F {F.shape} and y {y.shape} must have N={design.N} rows")
    if F.shape[1] > design.N:
        raise SingularBasisError(f"{F.shape[1]} basis functions for {design.N} points")
    return F, y


def gls_solve(QF: np.ndarray, F: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    M = QF.T @ F
    M = 0.5 * (M + M.T)
    if np.linalg.cond(M) > _BASIS_COND_LIMIT:
        raise SingularBasisError("F^T R^{-1} F is singular; the mean basis is rank deficient on the design")
    try:
        return cho_solve(cho_factor(M, lower=True), rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularBasisError("F^T R^{-1} F is not positive definite") from exc


def check_sigma2(value: float, y: np.ndarray) -> float:
    """Clamp a sigma2 estimate within round-off of zero to exactly 0.

    Raises:
        NumericalFailureError: the estimate is below -1e-12 ||y||^2
    """
    scale = float(y @ y)
    if value < -1e-12 * scale:
        raise NumericalFailureError(f"sigma2 estimate is negative ({value:.3e})")
    return value if value > 1e-12 * scale / y.shape[0] else 0.0


def beta_hat(design: SparseGridDesign, correlation: SeparableKernel, F, y,
             factors: Optional[ComponentFactors] = None) -> np.ndarray:
    """Generalized least squares (F^T R^{-1} F)^{-1} F^T R^{-1} y.

    Raises:
        SingularBasisError: F^T R^{-1} F is singular
    """
    F, y = _check_basis(design, F, y)
    QF = q_solve(design, correlation.correlation(), F, factors=factors)
    return gls_solve(QF, F, QF.T @ y)


def sigma2_hat(design: SparseGridDesign, correlation: SeparableKernel, F, y, beta,
               factors: Optional[ComponentFactors] = None) -> float:
    """N^{-1} (y - F beta)^T R^{-1} (y - F beta), clamped at 0 within round-off."""
    F, y = _check_basis(design, F, y)
    residual = y - F @ np.asarray(beta, dtype=float).reshape(-1)
    Qr = q_solve(design, correlation.correlation(), residual, factors=factors)
    return check_sigma2(float(Qr @ residual) / design.N, y)


@dataclass(frozen=True)
class ProfilePoint:
    """Profile likelihood at one lengthscale with the plug-in estimates."""

    phi: float
    beta: np.ndarray
    sigma2: float
    logdet: float
    loglik: float


def profile_point(design: SparseGridDesign, F, y, phi: float, nu: float = 2.5,
                  nugget: float = settings.NUGGET,
                  kernel: Optional[SeparableKernel] = None) -> ProfilePoint:
    """beta, sigma2 and the profile log-likelihood at ``phi``.

    One q_solve on [F, y] gives both R^{-1} F and R^{-1} y.
    ``kernel`` (when given) fixes the smoothness and nugget of every component.
    """
    if not phi > 0:
        raise InvalidParameterError(f"lengthscale must be positive, got phi={phi}")
    F, y = _check_basis(design, F, y)
    if kernel is None:
        correlation = SeparableKernel.isotropic(design.d, nu, phi, nugget=nugget)
    else:
        correlation = kernel.correlation().with_phi(phi)
    factors = ComponentFactors(design, correlation)
    p = F.shape[1]
    QA = q_solve(design, correlation, np.column_stack([F, y]), factors=factors)
    QF, Qy = QA[:, :p], QA[:, p]
    beta = gls_solve(QF, F, QF.T @ y)
    residual = y - F @ beta
    sigma2 = check_sigma2(float((Qy - QF @ beta) @ residual) / design.N, y)
    logdet = sg_logdet(design, correlation, factors)
    if sigma2 == 0:
        loglik = math.inf
    else:
        loglik = -0.5 * (design.N * math.log(sigma2) + logdet + design.N)
    logger.debug("phi=%.6g sigma2=%.6g loglik=%.10g", phi, sigma2, loglik)
    return ProfilePoint(phi, beta, sigma2, logdet, loglik)


def profile_loglik(design: SparseGridDesign, F, y, phi: float, nu: float = 2.5,
                   nugget: float = settings.NUGGET) -> float:
    """L(beta_hat, sigma2_hat, phi) = -(N log sigma2_hat + log|R_phi| + N) / 2."""
    return profile_point(design, F, y, phi, nu, nugget).loglik


def golden_section_maximize(func: Callable[[float], float], lo: float, hi: float,
                            tol: float = settings.GOLDEN_TOL,
                            max_evals: int = settings.GOLDEN_MAX_EVALS):
    """Maximize ``func`` over [lo, hi] by golden-section search on log(phi).

    NaN values rank below everything. Stops once the log-bracket is at most
    ``tol`` wide or ``max_evals`` probes were spent.

    Returns:
        tuple: (best phi, best value, trace of (phi, value) probes in order)
    """
    if not (0 < lo <= hi) or not math.isfinite(hi):
        raise InvalidParameterError(f"need 0 < lo <= hi, got bracket ({lo}, {hi})")
    trace = []

    def probe(phi):
        value = float(func(phi))
        trace.append((phi, value))
        return -math.inf if math.isnan(value) else value

    if lo == hi:
        probe(lo)
    else:
        a, b = math.log(lo), math.log(hi)
        if b - a <= tol:
            probe(math.exp(0.5 * (a + b)))
        else:
            c = b - _INV_GOLDEN * (b - a)
            e = a + _INV_GOLDEN * (b - a)
            fc, fe = probe(math.exp(c)), probe(math.exp(e))
            while b - a > tol and len(trace) < max_evals:
                if fc >= fe:
                    b, e, fe = e, c, fc
                    c = b - _INV_GOLDEN * (b - a)
                    fc = probe(math.exp(c))
                else:
                    a, c, fc = c, e, fe
                    e = a + _INV_GOLDEN * (b - a)
                    fe = probe(math.exp(e))

    ranked = [-math.inf if math.isnan(v) else v for _, v in trace]
    best = int(np.argmax(ranked))
    return trace[best][0], trace[best][1], trace


def replay_probes(func: Callable[[float], float], probes):
    """Evaluate ``func`` at a fixed probe sequence; same return as golden_section_maximize."""
    probes = [float(phi) for phi in probes]
    if not probes:
        raise InvalidParameterError("probe sequence is empty")
    trace = [(phi, float(func(phi))) for phi in probes]
    ranked = [-math.inf if math.isnan(v) else v for _, v in trace]
    best = int(np.argmax(ranked))
    return trace[best][0], trace[best][1], trace


def _safe(evaluate: Callable[[float], "ProfilePoint"], cache: dict):
    def objective(phi):
        try:
            point = evaluate(phi)
        except (NonSPDError, SingularBasisError, NumericalFailureError) as exc:
            logger.debug("phi=%.6g scored -inf: %s", phi, exc)
            return -math.inf
        cache[phi] = point
        return point.loglik
    return objective


def search_mle(evaluate: Callable[[float], "ProfilePoint"], phi_bracket, n_points: int,
               nu: float, nugget: float, method: str, tol: float = settings.GOLDEN_TOL,
               max_evals: int = settings.GOLDEN_MAX_EVALS, probes=None) -> MleResult:
    """Shared driver behind fit_mle and dense_mle.

    A probe whose matrix fails to factorize scores -inf; one with sigma2 = 0
    scores +inf and wins.

    Raises:
        FitFailureError: no probe gave a usable likelihood
    """
    lo, hi = (float(v) for v in phi_bracket)
    cache: dict = {}
    objective = _safe(evaluate, cache)
    if probes is None:
        phi, value, trace = golden_section_maximize(objective, lo, hi, tol, max_evals)
    else:
        phi, value, trace = replay_probes(objective, probes)
    if math.isnan(value) or value == -math.inf:
        raise FitFailureError(f"likelihood was not finite at any of {len(trace)} probes in [{lo}, {hi}]")
    point = cache[phi]
    edge = lo < hi and min(math.log(phi) - math.log(lo), math.log(hi) - math.log(phi)) <= tol
    if edge:
        logger.warning("phi_hat=%.6g is at the edge of the bracket [%g, %g]", phi, lo, hi)
    logger.info("%s fit: phi_hat=%.6g sigma2_hat=%.6g loglik=%.10g after %d probes",
                method, phi, point.sigma2, point.loglik, len(trace))
    return MleResult(
        beta_hat=point.beta,
        sigma2_hat=point.sigma2,
        phi_hat=phi,
        loglik=point.loglik,
        n_evals=len(trace),
        bracket_edge=bool(edge),
        trace=trace,
        logdet=point.logdet,
        n_points=n_points,
        nu=nu,
        nugget=nugget,
        method=method,
    )


def fit_mle(design: SparseGridDesign, F, y, phi_bracket=settings.PHI_BRACKET,
            nu: float = 2.5, nugget: float = settings.NUGGET,
            tol: float = settings.GOLDEN_TOL, max_evals: int = settings.GOLDEN_MAX_EVALS,
            probes=None) -> MleResult:
    """Maximum likelihood fit of (beta, sigma2, phi) on a sparse grid design.

    Args:
        design (SparseGridDesign): design holding the observations
        F (np.ndarray): (N, p) mean basis evaluated at the design points
        y (np.ndarray): observations in design point order
        phi_bracket (tuple): (lo, hi) with 0 < lo <= hi
        probes (list, optional): evaluate exactly these lengthscales instead of searching

    Returns:
        MleResult: estimates with the (phi, loglik) probe trace
    """
    F, y = _check_basis(design, F, y)
    return search_mle(lambda phi: profile_point(design, F, y, phi, nu, nugget),
                      phi_bracket, design.N, nu, nugget, "sparse_grid", tol, max_evals, probes)


def design_entropy(design: SparseGridDesign, kernel: SeparableKernel) -> float:
    """Entropy of the Gaussian vector observed on the design: (N log(2 pi e) + log|Sigma|) / 2."""
    return 0.5 * (design.N * math.log(2.0 * math.pi * math.e) + sg_logdet(design, kernel))


def integrated_variance(design: SparseGridDesign, kernel: SeparableKernel,
                        n_probe: int = settings.N_PROBE, seed: int = 0) -> float:
    """Monte Carlo average of the predictive variance over uniform probes in [0, 1]^d."""
    probes = rng_stream(seed, 0).random((n_probe, design.d))
    profile = VarianceProfile(design, kernel)
    return float(np.mean(predict_variance(design, kernel, probes, profile=profile)))
