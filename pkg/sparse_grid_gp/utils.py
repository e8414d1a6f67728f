"""Utility Functions"""

import json
import logging

import numpy as np
import pandas as pd

from sparse_grid_gp import settings
from sparse_grid_gp.exceptions import ConfigError, ShapeError


def configure_logging(level: str = "WARNING") -> None:
    """Attach one stream handler to the package logger."""
    package_logger = logging.getLogger("sparse_grid_gp")
    if not package_logger.handlers:
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter(settings.LOG_FORMAT))
        package_logger.addHandler(handler)
    package_logger.setLevel(level.upper())


def rng_stream(seed: int, *keys: int) -> np.random.Generator:
    """Independent generator for (seed, *keys), so results do not depend on run order."""
    return np.random.default_rng([int(seed), *[int(k) for k in keys]])


def write_frame(path: str, frame: pd.DataFrame) -> None:
    frame.to_csv(path, index=False, float_format=settings.CSV_FLOAT_FORMAT)


def write_points_csv(path: str, points: np.ndarray) -> None:
    """Write ``id,x1,...,xd``, one row per point."""
    points = np.atleast_2d(points)
    frame = pd.DataFrame(points, columns=[f"x{i + 1}" for i in range(points.shape[1])])
    frame.insert(0, "id", np.arange(points.shape[0]))
    write_frame(path, frame)


def read_points_csv(path: str):
    """Read a points CSV written by :func:`write_points_csv`.

    Returns:
        tuple: (ids, points) with points of shape (N, d)
    """
    frame = pd.read_csv(path, float_precision="round_trip")
    columns = [c for c in frame.columns if c != "id"]
    if not columns:
        raise ShapeError(f"{path} has no coordinate columns")
    ids = frame["id"].to_numpy() if "id" in frame.columns else np.arange(len(frame))
    return ids, frame[columns].to_numpy(dtype=float)


def read_observations_csv(path: str, n: int) -> np.ndarray:
    """Read ``id,y`` observations and order them by id."""
    frame = pd.read_csv(path, float_precision="round_trip")
    column = "y" if "y" in frame.columns else frame.columns[-1]
    if "id" in frame.columns:
        frame = frame.sort_values("id")
    y = frame[column].to_numpy(dtype=float)
    if y.shape[0] != n:
        raise ShapeError(f"{path} holds {y.shape[0]} observations for {n} design points")
    return y


def write_json(path: str, data: dict) -> None:
    with open(path, "w") as f:
        json.dump(data, f, indent=2, allow_nan=False)


def read_json(path: str) -> dict:
    with open(path, "r") as f:
        return json.load(f)


def _coerce(key: str, raw: str, default):
    try:
        if isinstance(default, bool):
            lowered = raw.lower()
            if lowered not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(raw)
            return lowered in ("true", "1", "yes")
        if isinstance(default, list):
            kind = type(default[0]) if default else str
            return [kind(item.strip()) for item in raw.split(",") if item.strip()]
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
        return raw
    except ValueError:
        raise ConfigError(f"config key {key!r}: cannot read {raw!r} as {type(default).__name__}")


def parse_config(text: str, defaults: dict) -> dict:
    """Parse ``key = value`` lines over ``defaults``.

    Lines starting with ``#`` and blank lines are skipped; lists are comma
    separated; unknown keys raise ConfigError.
    """
    config = {key: (list(value) if isinstance(value, list) else value) for key, value in defaults.items()}
    for line_no, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {line_no}: expected 'key = value', got {line!r}")
        key, raw = (part.strip() for part in line.split("=", 1))
        if key not in defaults:
            raise ConfigError(f"line {line_no}: unknown config key {key!r}")
        config[key] = _coerce(key, raw, defaults[key])
    return config


def read_config(path: str, defaults: dict) -> dict:
    with open(path, "r") as f:
        return parse_config(f.read(), defaults)
