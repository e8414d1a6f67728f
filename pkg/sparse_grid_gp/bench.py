"""Benchmark studies comparing sparse grid, lattice and Latin hypercube designs.

Every random draw comes from a generator keyed on (seed, stream, index), so a
study gives the same numbers however its arms are ordered or scheduled.
Stream 0 draws probes, stream 1 draws sample-path replicates and stream 2
draws Latin hypercubes.
"""

from __future__ import annotations

import logging
import math
import time
from typing import Optional

import numpy as np
from scipy.linalg import cho_solve

from sparse_grid_gp import constant, settings
from sparse_grid_gp.dense_oracle import (dense_factor, dense_fit, dense_mle,
                                         dense_predict, dense_weights)
from sparse_grid_gp.designs import (build_lattice, build_lhs,
                                    build_sparse_grid, lattice_axis,
                                    resolve_schedules)
from sparse_grid_gp.exceptions import (BenchmarkGateError, ConfigError,
                                       DenseSizeError, InvalidParameterError,
                                       NonSPDError, SparseGridError)
from sparse_grid_gp.items import ExperimentReport
from sparse_grid_gp.kernels import MeanBasis, SeparableKernel
from sparse_grid_gp.likelihood import fit_mle
from sparse_grid_gp.sg_predictor import (compute_weights, predict_mean,
                                         q_solve)
from sparse_grid_gp.test_functions import get_test_function
from sparse_grid_gp.utils import rng_stream

logger = logging.getLogger(__name__)

PROBE_STREAM = 0
REPLICATE_STREAM = 1
LHS_STREAM = 2


def build_design(strategy: str, size: int, d: int, schedule: str = settings.DEFAULT_SCHEDULE,
                 seed: int = 0):
    """Points of one benchmark arm.

    ``size`` is the level eta for sparse grids, the per-axis count for
    lattices and the number of points for Latin hypercubes.

    Returns:
        tuple: (points, SparseGridDesign or None)
    """
    if strategy == "sparse_grid":
        design = build_sparse_grid(resolve_schedules(schedule, d, size), size)
        return design.points, design
    if strategy == "lattice":
        return build_lattice([lattice_axis(size)] * d), None
    if strategy == "lhs":
        lhs_seed = int(rng_stream(seed, LHS_STREAM, size).integers(2 ** 63 - 1))
        return build_lhs(size, d, lhs_seed), None
    raise ConfigError(f"unknown design strategy {strategy!r}, expected one of {constant.STRATEGIES}")


def _arms(strategies, sizes: dict):
    for strategy in strategies:
        if strategy not in constant.STRATEGIES:
            raise ConfigError(f"unknown design strategy {strategy!r}, expected one of {constant.STRATEGIES}")
        for size in sizes.get(strategy, []):
            yield strategy, int(size)


def _sample_paths(kernel: SeparableKernel, points: np.ndarray, n_mc: int, seed: int,
                  max_points: int) -> np.ndarray:
    """n_mc exact draws of the process at ``points``, one column per replicate."""
    try:
        _, (chol, _) = dense_factor(points, kernel, max_points)
    except NonSPDError:
        logger.warning("Joint covariance on %d points is singular; adding jitter %g",
                       points.shape[0], settings.SAMPLE_JITTER)
        jitter = settings.SAMPLE_JITTER * kernel.sigma2
        try:
            chol = np.linalg.cholesky(kernel(points, points) + jitter * np.eye(points.shape[0]))
        except np.linalg.LinAlgError as exc:
            raise NonSPDError(f"joint covariance on {points.shape[0]} points is not positive definite "
                              f"even with jitter {jitter:g}") from exc
    chol = np.tril(chol)
    normals = np.column_stack([rng_stream(seed, REPLICATE_STREAM, r).standard_normal(points.shape[0])
                               for r in range(n_mc)])
    return chol @ normals


def rmspe_study(d: int, nu: float, phi: float, strategies, etas_or_sizes: dict,
                n_mc: int = settings.N_MC, n_probe: int = settings.N_PROBE, seed: int = 0,
                schedule: str = settings.DEFAULT_SCHEDULE, nugget: float = settings.NUGGET,
                max_dense_points: int = settings.DENSE_MAX_POINTS,
                record_seconds: bool = False) -> list[ExperimentReport]:
    """Root mean square prediction error of kriging with a known kernel.

    For each arm, draws ``n_mc`` Gaussian process paths on design and probe
    points jointly, predicts the probe values from the design values and
    reports the error averaged over draws and probes.

    Args:
        etas_or_sizes (dict): strategy name -> list of sizes (see build_design)

    Raises:
        DenseSizeError: design plus probes exceed ``max_dense_points``
    """
    if n_mc == 0:
        return []
    kernel = SeparableKernel.isotropic(d, nu, phi, nugget=nugget)
    probes = rng_stream(seed, PROBE_STREAM).random((n_probe, d))
    reports = []
    for strategy, size in _arms(strategies, etas_or_sizes):
        start = time.perf_counter()
        points, design = build_design(strategy, size, d, schedule, seed)
        n = points.shape[0]
        if n + n_probe > max_dense_points:
            raise DenseSizeError(
                f"{strategy} arm needs a joint covariance on {n + n_probe} points, limit is "
                f"{max_dense_points}; reduce the design size or n_probe")
        paths = _sample_paths(kernel, np.vstack([points, probes]), n_mc, seed, max_dense_points)
        observed, truth = paths[:n], paths[n:]
        if design is not None:
            weights = q_solve(design, kernel, observed)
        else:
            weights = dense_weights(points, kernel, observed, max_dense_points)
        predicted = kernel(probes, points) @ weights
        value = float(np.sqrt(np.mean((predicted - truth) ** 2)))
        seconds = time.perf_counter() - start if record_seconds else 0.0
        logger.info("rmspe %s size=%d N=%d: %.6g", strategy, size, n, value)
        reports.append(ExperimentReport(
            strategy, n, d, "RMSPE", value, seconds, seed,
            settings={"size": size, "nu": nu, "phi": phi, "nugget": nugget,
                      "n_mc": n_mc, "n_probe": n_probe, "schedule": schedule},
        ))
    return reports


def mape_study(function_name, d: int, strategies, sizes: dict,
               n_probe: int = settings.N_PROBE, seed: int = 0,
               schedule: str = settings.DEFAULT_SCHEDULE, nu: float = 2.5,
               phi_bracket=settings.PHI_BRACKET, nugget: float = settings.NUGGET,
               max_dense_points: int = settings.DENSE_MAX_POINTS,
               record_seconds: bool = False) -> list[ExperimentReport]:
    """Median absolute prediction error of the fitted constant-mean predictor.

    ``function_name`` is a registered test function name or any callable on
    (n, d) arrays. An arm whose fit fails is reported with status "failed"
    and value NaN; the study carries on.
    """
    if callable(function_name):
        func, label = function_name, getattr(function_name, "__name__", "custom")
    else:
        func, label = get_test_function(function_name), function_name
        func.check_dimension(d)
    probes = rng_stream(seed, PROBE_STREAM).random((n_probe, d))
    truth = np.asarray(func(probes), dtype=float)
    basis = MeanBasis.constant()
    reports = []
    for strategy, size in _arms(strategies, sizes):
        start = time.perf_counter()
        points, design = build_design(strategy, size, d, schedule, seed)
        y = np.asarray(func(points), dtype=float)
        F = basis(points)
        arm_settings = {"size": size, "function": label, "nu": nu, "nugget": nugget,
                        "phi_bracket": [float(v) for v in phi_bracket], "schedule": schedule}
        try:
            if design is not None:
                fit = fit_mle(design, F, y, phi_bracket, nu, nugget)
                # the kriging mean does not depend on sigma2
                correlation = SeparableKernel.isotropic(d, nu, fit.phi_hat, nugget=nugget)
                w = compute_weights(design, correlation, y, F @ fit.beta_hat)
                predicted = predict_mean(design, correlation, w,
                                         lambda X: basis(X) @ fit.beta_hat, probes)
            else:
                fit = dense_mle(points, F, y, phi_bracket, nu, nugget, max_points=max_dense_points)
                correlation = SeparableKernel.isotropic(d, nu, fit.phi_hat, nugget=nugget)
                model = dense_fit(points, correlation, basis, y, beta=fit.beta_hat,
                                  max_points=max_dense_points)
                predicted, _ = dense_predict(model, probes)
        except SparseGridError as exc:
            logger.warning("mape %s size=%d failed: %s", strategy, size, exc)
            seconds = time.perf_counter() - start if record_seconds else 0.0
            reports.append(ExperimentReport(strategy, points.shape[0], d, "MAPE", math.nan,
                                            seconds, seed, settings=arm_settings, status="failed"))
            continue
        value = float(np.median(np.abs(predicted - truth)))
        seconds = time.perf_counter() - start if record_seconds else 0.0
        arm_settings.update({"phi_hat": fit.phi_hat, "sigma2_hat": fit.sigma2_hat,
                             "beta_hat": [float(b) for b in fit.beta_hat],
                             "bracket_edge": fit.bracket_edge})
        logger.info("mape %s size=%d N=%d: %.6g (phi_hat=%.4g)",
                    strategy, size, points.shape[0], value, fit.phi_hat)
        reports.append(ExperimentReport(strategy, points.shape[0], d, "MAPE", value, seconds,
                                        seed, settings=arm_settings))
    return reports


def timing_study(d: int, eta: int, trials: int = 3, seed: int = 0, nu: float = 2.5,
                 phi: float = 0.75, schedule: str = settings.DEFAULT_SCHEDULE,
                 nugget: float = settings.NUGGET,
                 max_dense_points: int = settings.DENSE_MAX_POINTS,
                 gate_tol: float = settings.WEIGHT_GATE_TOL):
    """Wall-clock medians of the fast and dense weight computations on the same input.

    The dense arm runs only when N <= ``max_dense_points``; otherwise the
    second report is None.

    Returns:
        tuple: (fast report, dense report or None)

    Raises:
        BenchmarkGateError: the two arms' weights disagree beyond ``gate_tol``
    """
    if trials < 1:
        raise InvalidParameterError(f"need at least one trial, got {trials}")
    design = build_sparse_grid(resolve_schedules(schedule, d, eta), eta)
    kernel = SeparableKernel.isotropic(d, nu, phi, nugget=nugget)
    y = rng_stream(seed, REPLICATE_STREAM, 0).standard_normal(design.N)
    arm_settings = {"eta": eta, "nu": nu, "phi": phi, "nugget": nugget,
                    "trials": trials, "schedule": schedule}

    fast_seconds = []
    for _ in range(trials):
        start = time.perf_counter()
        w_fast = compute_weights(design, kernel, y, 0.0)
        fast_seconds.append(time.perf_counter() - start)
    fast = ExperimentReport("sparse_grid", design.N, d, "weight_seconds",
                            float(np.median(fast_seconds)), float(np.sum(fast_seconds)),
                            seed, settings=dict(arm_settings))
    logger.info("timing fast N=%d: median %.4fs", design.N, fast.value)
    if design.N > max_dense_points:
        logger.warning("Skipping dense arm: N=%d exceeds the limit of %d", design.N, max_dense_points)
        return fast, None

    dense_seconds = []
    for _ in range(trials):
        start = time.perf_counter()
        _, factor = dense_factor(design.points, kernel, max_dense_points)
        w_dense = cho_solve(factor, y)
        dense_seconds.append(time.perf_counter() - start)
    error = float(np.max(np.abs(w_fast - w_dense)) / max(1.0, np.max(np.abs(w_dense))))
    if error > gate_tol:
        raise BenchmarkGateError(
            f"fast and dense weights differ by {error:.3e} (limit {gate_tol:g}) at N={design.N}")
    dense = ExperimentReport("dense", design.N, d, "weight_seconds",
                             float(np.median(dense_seconds)), float(np.sum(dense_seconds)),
                             seed, settings=dict(arm_settings, gate_error=error))
    logger.info("timing dense N=%d: median %.4fs", design.N, dense.value)
    return fast, dense


def fit_time_scaling(reports) -> dict:
    """Least-squares fit of log(seconds) = b0 + b1 log(N) per strategy.

    Strategies with fewer than two distinct N (or no positive timings) are left out.
    """
    by_strategy: dict = {}
    for report in reports:
        if report.seconds > 0 and report.status == "ok":
            by_strategy.setdefault(report.strategy, []).append((report.N, report.seconds))
    fits = {}
    for strategy, rows in by_strategy.items():
        n, seconds = np.array(rows, dtype=float).T
        if np.unique(n).size < 2:
            continue
        slope, intercept = np.polyfit(np.log(n), np.log(seconds), 1)
        fits[strategy] = (float(intercept), float(slope))
    return fits


def _sizes(config: dict) -> dict:
    return {"sparse_grid": config["etas"], "lattice": config["lattice_sizes"],
            "lhs": config["lhs_sizes"]}


def run_study(study: str, config: Optional[dict] = None) -> list[ExperimentReport]:
    """Run a named study with ``config`` laid over its defaults in settings.

    Raises:
        ConfigError: unknown study or config key
    """
    if study not in settings.STUDY_CONFIGS:
        raise ConfigError(f"unknown study {study!r}, expected one of {sorted(settings.STUDY_CONFIGS)}")
    defaults = settings.STUDY_CONFIGS[study]
    unknown = sorted(set(config or {}) - set(defaults))
    if unknown:
        raise ConfigError(f"unknown config keys for {study}: {unknown}")
    config = {**defaults, **(config or {})}
    logger.info("Running %s study", study)
    if study == "rmspe":
        return rmspe_study(config["d"], config["nu"], config["phi"], config["strategies"],
                           _sizes(config), config["n_mc"], config["n_probe"], config["seed"],
                           config["schedule"], config["nugget"], config["max_dense_points"],
                           config["record_seconds"])
    if study == "mape":
        return mape_study(config["function"], config["d"], config["strategies"], _sizes(config),
                          config["n_probe"], config["seed"], config["schedule"], config["nu"],
                          (config["phi_lo"], config["phi_hi"]), config["nugget"],
                          config["max_dense_points"], config["record_seconds"])
    fast, dense = timing_study(config["d"], config["eta"], config["trials"], config["seed"],
                               config["nu"], config["phi"], config["schedule"],
                               config["nugget"], config["max_dense_points"], config["gate_tol"])
    return [fast] if dense is None else [fast, dense]
