"""Utility Functions"""

import json
import math
import os

import numpy as np
from scipy.special import gamma, kv

from sparse_grid_gp.dense_oracle import dense_factor
from sparse_grid_gp.designs import build_sparse_grid, resolve_schedules
from sparse_grid_gp.exceptions import NonSPDError
from sparse_grid_gp.test.helpers.constant import (ORACLE_TOL, ORACLE_TOL_CAP,
                                                  RESIDUAL_FACTOR,
                                                  RESIDUAL_FLOOR, SLOW_ENV)


def get_fixture(path):
    """Load a JSON fixture

    Args:
        path (str): fixture path

    Returns:
        dict: fixture content
    """
    with open(path, "r") as f:
        return json.load(f)


def slow_tests_enabled():
    return os.environ.get(SLOW_ENV) == "1"


def small_design(schedule, d, eta):
    return build_sparse_grid(resolve_schedules(schedule, d, eta), eta)


def dense_condition(points, kernel):
    """Dense covariance on ``points`` and its condition number.

    Args:
        points (np.ndarray): design points
        kernel (SeparableKernel): covariance

    Returns:
        tuple or None: (Sigma, cond(Sigma)), or None when the dense covariance
        cannot be factorized at all
    """
    try:
        sigma, _ = dense_factor(points, kernel)
    except NonSPDError:
        return None
    return sigma, float(np.linalg.cond(sigma))


def ill_conditioned(cond, cap=ORACLE_TOL_CAP):
    return 1e3 * np.finfo(float).eps * cond > cap


def dense_oracle_tolerance(cond, tol=ORACLE_TOL, cap=ORACLE_TOL_CAP):
    """max(tol, 1e3 * eps * cond), never looser than ``cap``."""
    return min(max(tol, 1e3 * np.finfo(float).eps * cond), cap)


def relative_residual(sigma, w, y):
    """max over columns of ||Sigma w - y|| / ||y||"""
    residual = np.atleast_2d((sigma @ w - y).T)
    scale = np.atleast_2d(np.asarray(y, dtype=float).T)
    return float(np.max(np.linalg.norm(residual, axis=1) / np.linalg.norm(scale, axis=1)))


def residual_bound(sigma, w_dense, y):
    """Largest residual accepted from the sparse grid solve on an ill-conditioned Sigma."""
    return max(RESIDUAL_FACTOR * relative_residual(sigma, w_dense, y), RESIDUAL_FLOOR)


def matern_bessel(nu, phi, h):
    """Matern correlation from the general Bessel-function form."""
    h = np.atleast_1d(np.abs(np.asarray(h, dtype=float)))
    out = np.ones_like(h)
    scaled = math.sqrt(2.0 * nu) * h[h > 0] / phi
    out[h > 0] = 2.0 ** (1.0 - nu) / gamma(nu) * scaled ** nu * kv(nu, scaled)
    return out


def relative_error(a, b):
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    return float(np.max(np.abs(a - b)) / max(1.0, float(np.max(np.abs(b)))))
