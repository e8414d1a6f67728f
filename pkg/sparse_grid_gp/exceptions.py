"""Errors raised by sparse_grid_gp"""

import numpy as np


class SparseGridError(Exception):
    """Base class of every error raised by this package"""


class InvalidLevelError(SparseGridError, ValueError):
    pass


class InvalidScheduleError(SparseGridError, ValueError):
    pass


class ScheduleTooShortError(InvalidScheduleError):
    pass


class InvalidDesignError(SparseGridError, ValueError):
    pass


class UnsupportedSmoothnessError(SparseGridError, ValueError):
    pass


class InvalidParameterError(SparseGridError, ValueError):
    pass


class ShapeError(SparseGridError, ValueError):
    pass


class NonSPDError(SparseGridError, np.linalg.LinAlgError):
    """A covariance matrix failed its Cholesky factorization.

    Usually duplicate points or a lengthscale so large that the matrix is
    numerically singular.
    """


class SingularBasisError(SparseGridError, np.linalg.LinAlgError):
    pass


class NumericalFailureError(SparseGridError, ArithmeticError):
    pass


class FitFailureError(SparseGridError, RuntimeError):
    pass


class DenseSizeError(SparseGridError, ValueError):
    pass


class UnknownFunctionError(SparseGridError, ValueError):
    pass


class ConfigError(SparseGridError, ValueError):
    pass


class BenchmarkGateError(SparseGridError, RuntimeError):
    """Fast and dense arms disagree, so no timing is reported."""
