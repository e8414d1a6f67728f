# Record types passed between the likelihood, benchmark and report layers.

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from sparse_grid_gp import constant


def _json_float(value) -> Optional[float]:
    """float(value), or None for inf and nan, which JSON cannot hold."""
    value = float(value)
    return value if math.isfinite(value) else None


def _read_float(value, default: float) -> float:
    return default if value is None else float(value)


@dataclass
class MleResult:
    """Maximum likelihood estimate of (beta, sigma2, phi) with the optimizer trace."""

    beta_hat: np.ndarray
    sigma2_hat: float
    phi_hat: float
    loglik: float
    n_evals: int
    bracket_edge: bool
    trace: list = field(default_factory=list)
    logdet: float = float("nan")
    n_points: int = 0
    nu: float = 2.5
    nugget: float = 0.0
    method: str = "sparse_grid"

    def recompute_loglik(self) -> float:
        """-(N log sigma2 + log|R| + N) / 2 from the stored parts."""
        if self.sigma2_hat == 0:
            return math.inf
        return -0.5 * (self.n_points * math.log(self.sigma2_hat) + self.logdet + self.n_points)

    def to_dict(self) -> dict:
        data = {
            "beta_hat": [float(b) for b in np.atleast_1d(self.beta_hat)],
            "sigma2_hat": float(self.sigma2_hat),
            "phi_hat": float(self.phi_hat),
            "loglik": _json_float(self.loglik),
            "n_evals": int(self.n_evals),
            "bracket_edge": bool(self.bracket_edge),
        }
        data.update({
            "trace": [[float(phi), _json_float(value)] for phi, value in self.trace],
            "logdet": _json_float(self.logdet),
            "n_points": int(self.n_points),
            "nu": float(self.nu),
            "nugget": float(self.nugget),
            "method": self.method,
        })
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "MleResult":
        missing = [key for key in constant.FIT_REPORT_KEYS if key not in data]
        if missing:
            raise KeyError(f"fit report is missing {missing}")
        sigma2_hat = float(data["sigma2_hat"])
        # null loglik: +inf for an exact fit (sigma2_hat == 0), unknown otherwise
        return cls(
            beta_hat=np.asarray(data["beta_hat"], dtype=float),
            sigma2_hat=sigma2_hat,
            phi_hat=float(data["phi_hat"]),
            loglik=_read_float(data["loglik"], math.inf if sigma2_hat == 0 else math.nan),
            n_evals=int(data["n_evals"]),
            bracket_edge=bool(data["bracket_edge"]),
            trace=[(float(phi), _read_float(value, math.nan)) for phi, value in data.get("trace", [])],
            logdet=_read_float(data.get("logdet"), math.nan),
            n_points=int(data.get("n_points", 0)),
            nu=float(data.get("nu", 2.5)),
            nugget=float(data.get("nugget", 0.0)),
            method=data.get("method", "sparse_grid"),
        )


@dataclass
class ExperimentReport:
    """One benchmark arm: a design strategy at one size, with its metric."""

    strategy: str
    N: int
    d: int
    metric: str
    value: float
    seconds: float
    seed: int
    settings: dict = field(default_factory=dict)
    status: str = "ok"

    def row(self) -> dict:
        return {key: getattr(self, key) for key in constant.REPORT_COLUMNS}

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentReport":
        return cls(
            strategy=str(data["strategy"]),
            N=int(data["N"]),
            d=int(data["d"]),
            metric=str(data["metric"]),
            value=float(data["value"]),
            seconds=float(data["seconds"]),
            seed=int(data["seed"]),
            settings=dict(data.get("settings", {})),
            status=str(data.get("status", "ok")),
        )
