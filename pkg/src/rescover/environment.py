"""Gaussian-mixture importance fields, motion-primitive actions, and the
disk-coverage objective built from them.

The field is a ``height x width`` grid of non-negative importance values
sampled at cell centers ``(ix + 0.5, iy + 0.5)``. An action covers every
cell whose center lies within its sensing radius of the action's resulting
position; the objective value of an action set is the importance sum over
the union of its footprints.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .kernels import union_value
from .objective import SetFunction

DIRECTIONS = ("forward", "backward", "left", "right")
_OFFSETS = {"forward": (1.0, 0.0), "backward": (-1.0, 0.0), "left": (0.0, 1.0), "right": (0.0, -1.0)}


def as_rng(seed_or_rng) -> np.random.Generator:
    if isinstance(seed_or_rng, np.random.Generator):
        return seed_or_rng
    return np.random.default_rng(seed_or_rng)


@dataclass(frozen=True, eq=False)
class GmmField:
    """Importance field: a weighted sum of isotropic Gaussian bumps."""

    width: int
    height: int
    means: np.ndarray  # (B, 2) bump centers, (x, y)
    sigmas: np.ndarray  # (B,)
    weights: np.ndarray  # (B,)
    importance: np.ndarray  # (height, width), row iy, column ix


def _field_importance(width, height, means, sigmas, weights) -> np.ndarray:
    xs = np.arange(width, dtype=np.float64) + 0.5
    ys = np.arange(height, dtype=np.float64) + 0.5
    imp = np.zeros((height, width), dtype=np.float64)
    for (mx, my), sig, w in zip(means, sigmas, weights):
        gx = np.exp(-((xs - mx) ** 2) / (2.0 * sig * sig))
        gy = np.exp(-((ys - my) ** 2) / (2.0 * sig * sig))
        imp += w * np.outer(gy, gx)
    return imp


def generate_field(
    width: int,
    height: int,
    rng,
    basis_count_range: tuple[int, int] = (3, 6),
    sigma_range: tuple[float, float] = (10.0, 40.0),
    weight_range: tuple[float, float] = (0.5, 1.0),
) -> GmmField:
    """Random field: bump count uniform over the basis range (inclusive),
    centers uniform over the field, widths and weights uniform over their
    ranges. Deterministic for a fixed seed; draw order is count, centers,
    widths, weights.
    """
    if width < 1 or height < 1:
        raise ValueError("field dimensions must be >= 1")
    rng = as_rng(rng)
    b = int(rng.integers(basis_count_range[0], basis_count_range[1] + 1))
    means = rng.uniform((0.0, 0.0), (float(width), float(height)), size=(b, 2))
    sigmas = rng.uniform(sigma_range[0], sigma_range[1], size=b)
    weights = rng.uniform(weight_range[0], weight_range[1], size=b)
    imp = _field_importance(width, height, means, sigmas, weights)
    return GmmField(width, height, means, sigmas, weights, imp)


def field_from_basis(width: int, height: int, means, sigmas, weights) -> GmmField:
    means = np.asarray(means, dtype=np.float64).reshape(-1, 2)
    sigmas = np.asarray(sigmas, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    imp = _field_importance(width, height, means, sigmas, weights)
    return GmmField(width, height, means, sigmas, weights, imp)


@dataclass(frozen=True)
class RobotPose:
    robot_id: int
    x: float
    y: float


def random_poses(
    n: int,
    rng,
    x_range: tuple[float, float] = (50.0, 100.0),
    y_range: tuple[float, float] = (50.0, 100.0),
) -> list[RobotPose]:
    rng = as_rng(rng)
    xs = rng.uniform(x_range[0], x_range[1], size=n)
    ys = rng.uniform(y_range[0], y_range[1], size=n)
    return [RobotPose(i, float(xs[i]), float(ys[i])) for i in range(n)]


@dataclass(frozen=True)
class MotionAction:
    """One candidate action: move one step in a direction and sense a disk."""

    id: int
    owner: int
    direction: str
    x: float
    y: float
    radius: float


def build_actions(
    poses: Sequence[RobotPose], step: float, radius: float, field: GmmField
) -> list[list[MotionAction]]:
    """Four actions per robot (one per direction), ids dense in
    (robot, direction) order, resulting positions clipped to the field box.
    """
    if step <= 0 or radius <= 0:
        raise ValueError("step and radius must be positive")
    out: list[list[MotionAction]] = []
    next_id = 0
    for pose in poses:
        acts = []
        for direction in DIRECTIONS:
            ox, oy = _OFFSETS[direction]
            x = min(max(pose.x + step * ox, 0.0), float(field.width))
            y = min(max(pose.y + step * oy, 0.0), float(field.height))
            acts.append(MotionAction(next_id, pose.robot_id, direction, x, y, radius))
            next_id += 1
        out.append(acts)
    return out


def _flatten_actions(actions) -> list[MotionAction]:
    if actions and isinstance(actions[0], MotionAction):
        flat = list(actions)
    else:
        flat = [a for group in actions for a in group]
    flat.sort(key=lambda a: a.id)
    if [a.id for a in flat] != list(range(len(flat))):
        raise ValueError("action ids must be dense 0..len-1")
    return flat


def _footprint_cells(field: GmmField, action: MotionAction) -> np.ndarray:
    xs = np.arange(field.width, dtype=np.float64) + 0.5
    ys = np.arange(field.height, dtype=np.float64) + 0.5
    dx2 = (xs - action.x) ** 2
    dy2 = (ys - action.y) ** 2
    mask = (dy2[:, None] + dx2[None, :]) <= action.radius**2
    return np.flatnonzero(mask.ravel()).astype(np.int32)


class CoverageObjective(SetFunction):
    """Importance covered by the union of the chosen actions' disks.

    Footprint cell lists are precomputed per action; evaluation runs the
    union kernel. Values are memoized on the canonical sorted id tuple,
    which is semantically invisible (the kernel is deterministic).
    """

    def __init__(self, field: GmmField, actions, use_numba: bool | None = None):
        flat = _flatten_actions(actions)
        super().__init__(a.id for a in flat)
        self.field = field
        self.actions = tuple(flat)
        self._weights = field.importance.ravel().astype(np.float64)
        cell_lists = [_footprint_cells(field, a) for a in flat]
        self._starts = np.zeros(len(flat) + 1, dtype=np.int64)
        np.cumsum([c.size for c in cell_lists], out=self._starts[1:])
        self._cells = (
            np.concatenate(cell_lists) if cell_lists else np.zeros(0, dtype=np.int32)
        )
        self._use_numba = use_numba
        self._cache: dict[tuple, float] = {}
        self._tls = threading.local()

    def _scratch(self) -> np.ndarray:
        buf = getattr(self._tls, "scratch", None)
        if buf is None:
            buf = np.zeros(self._weights.size, dtype=np.uint8)
            self._tls.scratch = buf
        return buf

    def evaluate(self, ids: Iterable[int]) -> float:
        key = tuple(sorted(set(ids)))
        cached = self._cache.get(key)
        if cached is not None:
            return cached
        value = union_value(
            self._starts,
            self._cells,
            self._weights,
            np.array(key, dtype=np.int64),
            self._scratch(),
            self._use_numba,
        )
        self._cache[key] = value
        return value

    def footprint(self, action_id: int) -> np.ndarray:
        """Flat cell indices covered by one action (ascending)."""
        return self._cells[self._starts[action_id] : self._starts[action_id + 1]]


def coverage_objective(field: GmmField, actions, use_numba: bool | None = None) -> CoverageObjective:
    return CoverageObjective(field, actions, use_numba)


class NoisyObjective(SetFunction):
    """Base objective plus a fixed non-negative per-action reward offset.

    The offset term is modular, so monotonicity and submodularity of the
    base objective carry over unchanged.
    """

    def __init__(self, base: SetFunction, offsets: np.ndarray):
        super().__init__(base.ground_set)
        if offsets.shape != (len(base.ground_set),):
            raise ValueError("need one offset per ground-set action")
        self.base = base
        self.offsets = offsets

    def evaluate(self, ids: Iterable[int]) -> float:
        key = tuple(sorted(set(ids)))
        if not key:
            return self.base.evaluate(key)
        return self.base.evaluate(key) + float(self.offsets[np.array(key, dtype=np.int64)].sum())


def noisy_objective(
    base: SetFunction, noise_mean_frac: float, noise_var_frac: float, rng
) -> NoisyObjective:
    """Perturb per-action rewards with Gaussian noise scaled by the action's
    standalone value (mean = mean_frac * f(a), variance = var_frac * f(a)),
    clamped at 0. One draw per action in ascending id order.
    """
    if noise_mean_frac < 0 or noise_var_frac < 0:
        raise ValueError("noise fractions must be >= 0")
    rng = as_rng(rng)
    ids = sorted(base.ground_set)
    offsets = np.zeros(len(ids), dtype=np.float64)
    for a in ids:
        solo = base.evaluate((a,))
        eta = rng.normal(noise_mean_frac * solo, np.sqrt(noise_var_frac * solo))
        offsets[a] = max(0.0, float(eta))
    return NoisyObjective(base, offsets)


def write_field_grid(importance: np.ndarray, path) -> None:
    """One row per line, space-separated decimals (17 significant digits,
    enough to round-trip float64 exactly).
    """
    with open(path, "w") as fh:
        for row in importance:
            fh.write(" ".join(format(v, ".17g") for v in row))
            fh.write("\n")


def read_field_grid(path) -> np.ndarray:
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                rows.append([float(tok) for tok in line.split()])
    if not rows:
        raise ValueError(f"empty field grid: {path}")
    return np.array(rows, dtype=np.float64)
