"""Component schedules, multi-index sets and sparse grid designs.

A sparse grid design is the union of the lattices
X_{1,j_1} x ... x X_{d,j_d} over all multi-indices j with |j| <= eta.
Points are identified by integer slot-ids into the per-dimension
coordinate pools, never by comparing floats.
"""

from __future__ import annotations

import itertools
import json
import logging
import math
import os
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.stats import qmc

from sparse_grid_gp import constant
from sparse_grid_gp.exceptions import (InvalidDesignError, InvalidLevelError,
                                       InvalidParameterError,
                                       InvalidScheduleError,
                                       ScheduleTooShortError)
from sparse_grid_gp.utils import read_points_csv, write_points_csv

logger = logging.getLogger(__name__)


def _check_level(eta: int, d: int) -> None:
    if d < 1:
        raise InvalidLevelError(f"dimension must be >= 1, got d={d}")
    if eta < d:
        raise InvalidLevelError(f"level of construction eta={eta} is below the dimension d={d}")


def _compositions(d: int, total: int):
    """Yield every d-tuple of positive integers with sum <= total, lexicographically."""
    if d == 1:
        for v in range(1, total + 1):
            yield (v,)
        return
    for v in range(1, total - d + 2):
        for rest in _compositions(d - 1, total - v):
            yield (v,) + rest


def index_set_J(eta: int, d: int) -> list[tuple[int, ...]]:
    """All multi-indices j >= 1 with |j| <= eta, in lexicographic order.

    Args:
        eta (int): level of construction, eta >= d
        d (int): dimension

    Raises:
        InvalidLevelError: eta < d

    Returns:
        list[tuple[int, ...]]: binomial(eta, d) multi-indices
    """
    _check_level(eta, d)
    return list(_compositions(d, eta))


def index_set_P(eta: int, d: int) -> list[tuple[int, ...]]:
    """Multi-indices with max(d, eta - d + 1) <= |j| <= eta, the terms of the fast solve."""
    _check_level(eta, d)
    low = max(d, eta - d + 1)
    return [j for j in _compositions(d, eta) if sum(j) >= low]


def smolyak_coefficient(j: tuple[int, ...], eta: int, d: int) -> int:
    """Signed combination coefficient (-1)^(eta-|j|) * binomial(d-1, eta-|j|)."""
    k = eta - sum(j)
    return (-1) ** k * math.comb(d - 1, k)


@dataclass(frozen=True)
class ComponentSchedule:
    """Nested sequence of 1-D designs for one input dimension.

    X_{i,j} is the first ``prefix_sizes[j-1]`` entries of ``coordinates``,
    so nestedness holds by construction.
    """

    dimension_id: int
    coordinates: tuple
    prefix_sizes: tuple

    def __post_init__(self):
        coordinates = tuple(float(x) for x in self.coordinates)
        prefix_sizes = tuple(int(m) for m in self.prefix_sizes)
        object.__setattr__(self, "coordinates", coordinates)
        object.__setattr__(self, "prefix_sizes", prefix_sizes)

        if len(set(coordinates)) != len(coordinates):
            raise InvalidScheduleError(
                f"dimension {self.dimension_id}: duplicate coordinates in schedule")
        if any(not 0.0 <= x <= 1.0 for x in coordinates):
            raise InvalidScheduleError(
                f"dimension {self.dimension_id}: coordinates must lie in [0, 1]")
        if not prefix_sizes or prefix_sizes[0] < 1:
            raise InvalidScheduleError(
                f"dimension {self.dimension_id}: level 1 must hold at least one point")
        if any(b < a for a, b in zip(prefix_sizes, prefix_sizes[1:])):
            raise InvalidScheduleError(
                f"dimension {self.dimension_id}: prefix sizes must be nondecreasing")
        if prefix_sizes[-1] != len(coordinates):
            raise InvalidScheduleError(
                f"dimension {self.dimension_id}: last prefix size {prefix_sizes[-1]} "
                f"does not match {len(coordinates)} coordinates")

    @property
    def max_level(self) -> int:
        return len(self.prefix_sizes)

    def size(self, level: int) -> int:
        """m(level), with m(0) = 0."""
        if level == 0:
            return 0
        if level > self.max_level:
            raise ScheduleTooShortError(
                f"dimension {self.dimension_id}: level {level} requested, "
                f"schedule defines {self.max_level}")
        return self.prefix_sizes[level - 1]

    def points(self, level: int) -> np.ndarray:
        return np.asarray(self.coordinates[:self.size(level)])

    def increment(self, level: int) -> tuple:
        return self.coordinates[self.size(level - 1):self.size(level)]

    def increments(self) -> list[tuple]:
        return [self.increment(level) for level in range(1, self.max_level + 1)]


def schedule_from_increments(dimension_id: int, increments) -> ComponentSchedule:
    """Build a schedule from its per-level increments X_{i,j} minus X_{i,j-1}."""
    coordinates = []
    prefix_sizes = []
    for inc in increments:
        coordinates.extend(inc)
        prefix_sizes.append(len(coordinates))
    return ComponentSchedule(dimension_id, tuple(coordinates), tuple(prefix_sizes))


def _midpoint_refinement(coordinates, n_levels: int) -> list[tuple]:
    """Extra levels that split the widest gap (leftmost first) and its mirror image."""
    pts = sorted(coordinates)
    increments = []
    for _ in range(n_levels):
        gaps = [(b - a, a, b) for a, b in zip(pts, pts[1:])]
        widest = max(g[0] for g in gaps)
        _, a, b = next(g for g in gaps if g[0] == widest)
        mid = (a + b) / 2
        new = tuple(sorted({mid, 1.0 - mid}))
        increments.append(new)
        pts = sorted(pts + list(new))
    return increments


def _builtin_increments(name: str, n_levels: int) -> list[tuple]:
    if name == "hyperbolic":
        return [tuple(k / 2 ** j for k in range(1, 2 ** j, 2)) for j in range(1, n_levels + 1)]
    if name == "centered":
        base = constant.CENTERED_INCREMENTS
    elif name == "boundary":
        base = constant.BOUNDARY_INCREMENTS
    else:
        raise InvalidScheduleError(
            f"unknown schedule {name!r}, expected one of {constant.SCHEDULE_NAMES}")
    increments = list(base[:n_levels])
    if n_levels > len(base):
        flat = [x for inc in base for x in inc]
        increments.extend(_midpoint_refinement(flat, n_levels - len(base)))
    return increments


def builtin_schedules(name: str, d: int, n_levels: int) -> list[ComponentSchedule]:
    """The same built-in schedule for every dimension, defined through ``n_levels``.

    Args:
        name (str): "centered", "boundary" or "hyperbolic"
        d (int): number of dimensions
        n_levels (int): number of levels to define, usually eta - d + 1

    Returns:
        list[ComponentSchedule]: one schedule per dimension
    """
    increments = _builtin_increments(name, max(n_levels, 1))
    return [schedule_from_increments(i + 1, increments) for i in range(d)]


def load_schedule_file(path: str) -> list[ComponentSchedule]:
    """Read a schedule file with lines ``dim level coord1 coord2 ...``.

    Coordinates on a line are the increment of that level. Blank lines and
    lines starting with ``#`` are ignored.
    """
    levels: dict[int, dict[int, tuple]] = {}
    with open(path, "r") as f:
        for line_no, line in enumerate(f, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            fields = line.split()
            try:
                dim, level = int(fields[0]), int(fields[1])
                coords = tuple(float(x) for x in fields[2:])
            except (ValueError, IndexError):
                raise InvalidScheduleError(f"{path}:{line_no}: cannot parse {line!r}")
            if level in levels.setdefault(dim, {}):
                raise InvalidScheduleError(f"{path}:{line_no}: level {level} of dimension {dim} repeated")
            levels[dim][level] = coords

    if not levels or sorted(levels) != list(range(1, len(levels) + 1)):
        raise InvalidScheduleError(f"{path}: dimensions must be numbered 1..d")
    schedules = []
    for dim in sorted(levels):
        if sorted(levels[dim]) != list(range(1, len(levels[dim]) + 1)):
            raise InvalidScheduleError(f"{path}: levels of dimension {dim} must be numbered 1..L")
        schedules.append(schedule_from_increments(dim, [levels[dim][k] for k in sorted(levels[dim])]))
    logger.debug("Loaded %d schedules from %s", len(schedules), path)
    return schedules


def resolve_schedules(schedule: str, d: int, eta: int) -> list[ComponentSchedule]:
    """Built-in schedule by name, or a schedule file path."""
    if schedule in constant.SCHEDULE_NAMES:
        return builtin_schedules(schedule, d, eta - d + 1)
    schedules = load_schedule_file(schedule)
    if len(schedules) != d:
        raise InvalidScheduleError(f"{schedule} defines {len(schedules)} dimensions, expected {d}")
    return schedules


def _check_schedules(schedules, eta: int) -> int:
    d = len(schedules)
    _check_level(eta, d)
    max_level = eta - d + 1
    for s in schedules:
        if s.max_level < max_level:
            raise ScheduleTooShortError(
                f"dimension {s.dimension_id}: eta={eta} needs {max_level} levels, "
                f"schedule defines {s.max_level}")
    return max_level


@dataclass(frozen=True, eq=False)
class SparseGridDesign:
    """Deduplicated sparse grid design.

    Attributes:
        d (int): dimension
        eta (int): level of construction
        schedules (tuple): one ComponentSchedule per dimension
        slots (np.ndarray): (N, d) slot-ids into the schedules' coordinate pools
        lattice_maps (dict): for each j in J(eta), the global point index of every
            lattice position in row-major order (dimension d varies fastest)
    """

    d: int
    eta: int
    schedules: tuple
    slots: np.ndarray
    lattice_maps: dict

    @property
    def N(self) -> int:
        return self.slots.shape[0]

    @property
    def max_level(self) -> int:
        return self.eta - self.d + 1

    @cached_property
    def points(self) -> np.ndarray:
        pts = np.empty(self.slots.shape, dtype=float)
        for i, s in enumerate(self.schedules):
            pts[:, i] = np.asarray(s.coordinates)[self.slots[:, i]]
        pts.flags.writeable = False
        return pts

    @cached_property
    def index_array(self) -> np.ndarray:
        """J(eta) as an integer array, one multi-index per row."""
        return np.array(list(self.lattice_maps), dtype=np.intp).reshape(-1, self.d)

    def sizes(self, i: int) -> list[int]:
        """m_i(0), ..., m_i(max_level) for dimension i (0-based)."""
        return [self.schedules[i].size(level) for level in range(self.max_level + 1)]

    def lattice_points(self, j: tuple) -> np.ndarray:
        return self.points[self.lattice_maps[tuple(j)]]


def _lattice_map(j, blocks, sizes) -> np.ndarray:
    d = len(j)
    out = np.empty(tuple(sizes[i][j[i]] for i in range(d)), dtype=np.intp)
    for k in itertools.product(*[range(1, ji + 1) for ji in j]):
        offset, block_shape = blocks[k]
        count = math.prod(block_shape)
        if count == 0:
            continue
        region = tuple(slice(sizes[i][k[i] - 1], sizes[i][k[i]]) for i in range(d))
        out[region] = np.arange(offset, offset + count).reshape(block_shape)
    out = out.ravel()
    out.flags.writeable = False
    return out


def build_sparse_grid(schedules, eta: int) -> SparseGridDesign:
    """Build the sparse grid design of level ``eta`` from ``schedules``.

    Each point is stored once, in the block of the multi-index at which all of
    its coordinates have first appeared. Blocks are laid out in J(eta) order.

    Raises:
        InvalidLevelError: eta < d
        ScheduleTooShortError: a schedule stops before level eta - d + 1
    """
    schedules = tuple(schedules)
    d = len(schedules)
    max_level = _check_schedules(schedules, eta)
    sizes = [[s.size(level) for level in range(max_level + 1)] for s in schedules]

    index_set = index_set_J(eta, d)
    blocks = {}
    slot_blocks = []
    offset = 0
    for j in index_set:
        ranges = [np.arange(sizes[i][j[i] - 1], sizes[i][j[i]]) for i in range(d)]
        block_shape = tuple(len(r) for r in ranges)
        count = math.prod(block_shape)
        blocks[j] = (offset, block_shape)
        if count:
            grids = np.meshgrid(*ranges, indexing="ij")
            slot_blocks.append(np.stack([g.ravel() for g in grids], axis=1))
        offset += count

    slots = np.concatenate(slot_blocks).astype(np.intp)
    slots.flags.writeable = False
    lattice_maps = {j: _lattice_map(j, blocks, sizes) for j in index_set}
    logger.debug("Built sparse grid d=%d eta=%d with %d points and %d lattices",
                 d, eta, slots.shape[0], len(lattice_maps))
    return SparseGridDesign(d, eta, schedules, slots, lattice_maps)


def sample_size(schedules, eta: int) -> int:
    """N_SG(eta) = sum over J(eta) of prod_i (m_i(j_i) - m_i(j_i - 1))."""
    max_level = _check_schedules(schedules, eta)
    inc = [[s.size(level) - s.size(level - 1) for level in range(1, max_level + 1)] for s in schedules]
    return sum(math.prod(inc[i][ji - 1] for i, ji in enumerate(j)) for j in index_set_J(eta, len(schedules)))


def sample_size_closed_form(kind: str, c: int, d: int, eta: int, c0: int = 1) -> int:
    """Closed-form sample size for symmetric schedules with #X_{i,j} = h(j).

    kind "linear": h(j) = c*j; "affine": h(j) = c*(j-1) + 1;
    "geometric": h(j) = c0*(c**j - 1).
    """
    _check_level(eta, d)
    if kind == "linear":
        return c ** d * math.comb(eta, d)
    if kind == "affine":
        return sum(c ** k * math.comb(d, k) * math.comb(eta - d, k)
                   for k in range(min(d, eta - d) + 1))
    if kind == "geometric":
        return c0 ** d * (c - 1) ** d * sum(c ** s * math.comb(s + d - 1, d - 1)
                                            for s in range(eta - d + 1))
    raise InvalidParameterError(f"unknown sample-size form {kind!r}")


def build_lattice(designs_1d) -> np.ndarray:
    """Cartesian product of 1-D designs, dimension d varying fastest."""
    if not designs_1d:
        raise InvalidDesignError("a lattice needs at least one component design")
    axes = []
    for i, axis in enumerate(designs_1d):
        axis = np.asarray(axis, dtype=float).ravel()
        if axis.size == 0:
            raise InvalidDesignError(f"component design {i + 1} is empty")
        if np.unique(axis).size != axis.size:
            raise InvalidDesignError(f"component design {i + 1} has repeated points")
        axes.append(axis)
    grids = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


def lattice_axis(n: int) -> np.ndarray:
    """1-D lattice component: {1/2}, {1/4, 3/4}, then n equispaced points on [0, 1]."""
    if n < 1:
        raise InvalidDesignError(f"lattice component needs n >= 1, got {n}")
    if n == 1:
        return np.array([0.5])
    if n == 2:
        return np.array([0.25, 0.75])
    return np.linspace(0.0, 1.0, n)


def build_lhs(n: int, d: int, seed: int) -> np.ndarray:
    """Latin hypercube of n points in [0, 1]^d, one point per stratum and column."""
    if n < 1 or d < 1:
        raise InvalidDesignError(f"Latin hypercube needs n >= 1 and d >= 1, got n={n}, d={d}")
    return qmc.LatinHypercube(d=d, seed=np.random.default_rng(seed)).random(n)


def design_metadata(design: SparseGridDesign) -> dict:
    return {
        "kind": "sparse_grid",
        "d": design.d,
        "eta": design.eta,
        "increments": [[list(inc) for inc in s.increments()] for s in design.schedules],
    }


def design_from_metadata(meta: dict) -> SparseGridDesign:
    if meta.get("kind") != "sparse_grid":
        raise InvalidDesignError(f"unsupported design metadata kind {meta.get('kind')!r}")
    schedules = [schedule_from_increments(i + 1, [tuple(inc) for inc in incs])
                 for i, incs in enumerate(meta["increments"])]
    return build_sparse_grid(schedules, int(meta["eta"]))


def export_design_csv(design, path: str) -> None:
    """Write ``id,x1,...,xd``; a SparseGridDesign also gets a ``.meta.json`` sidecar."""
    if isinstance(design, SparseGridDesign):
        write_points_csv(path, design.points)
        with open(path + constant.DESIGN_META_SUFFIX, "w") as f:
            json.dump(design_metadata(design), f)
    else:
        write_points_csv(path, np.asarray(design, dtype=float))
    logger.info("Exported design to %s", path)


def load_design(path: str):
    """Read a design CSV.

    Returns:
        tuple: (points, SparseGridDesign or None). The sparse grid is rebuilt from
        the sidecar and checked point by point against the CSV.
    """
    _, points = read_points_csv(path)
    meta_path = path + constant.DESIGN_META_SUFFIX
    if not os.path.exists(meta_path):
        return points, None
    with open(meta_path, "r") as f:
        design = design_from_metadata(json.load(f))
    if design.points.shape != points.shape or not np.array_equal(design.points, points):
        raise InvalidDesignError(f"{path} does not match its sparse grid metadata")
    return points, design
