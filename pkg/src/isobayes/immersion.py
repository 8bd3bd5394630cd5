"""Block max-min / min-max isotonization of step functions.

For a cell ``j0`` the lower map takes, over lower corners ``j1 <= j0``, the
maximum of the minimum over upper corners ``j2 >= j0`` of the count-weighted
block mean of ``theta`` on ``[j1:j2]``; blocks with no observations are
excluded from the inner extremum.  The upper map swaps the two extrema.

All block means are read off a prefix table of ``N_j * theta_j`` so a point
evaluation costs one pass over the ``j1 x j2`` corner pairs.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import StateError
from .grid import BinStats, GridSpec, bin_index, corner_blocks, prefix_table

__all__ = [
    "ImmersionKind",
    "StepFunction",
    "immersion_values",
    "immersion_at_cell",
    "iota_lower_at",
    "iota_upper_at",
    "iota_at",
    "isotonize_surface",
    "pava_1d",
]

# bound on the number of block means held in memory at once
_CHUNK_ELEMENTS = 4_000_000


class ImmersionKind(enum.Enum):
    LOWER = "lower"
    UPPER = "upper"
    AVERAGE = "average"

    @property
    def zb_kind(self) -> int:
        """Index of the matching limiting variable (1, 2 or 3)."""
        return {"lower": 1, "upper": 2, "average": 3}[self.value]

    @classmethod
    def parse(cls, value) -> "ImmersionKind":
        if isinstance(value, cls):
            return value
        if isinstance(value, (int, np.integer)) or (isinstance(value, str) and value.isdigit()):
            return {1: cls.LOWER, 2: cls.UPPER, 3: cls.AVERAGE}[int(value)]
        return cls(str(value).lower())


@dataclass(frozen=True)
class StepFunction:
    grid: GridSpec
    theta: np.ndarray

    def __call__(self, x) -> float:
        j = bin_index(x, self.grid)
        return float(self.theta[tuple(k - 1 for k in j)])


def _extrema(S: np.ndarray, C: np.ndarray, d: int) -> tuple[np.ndarray, np.ndarray]:
    feasible = C > 0
    with np.errstate(invalid="ignore", divide="ignore"):
        M = S / np.where(feasible, C, 1)
    lo_axes = tuple(range(1, d + 1))
    hi_axes = tuple(range(d + 1, 2 * d + 1))

    # max over j1 of min over feasible j2
    inner = np.where(feasible, M, np.inf).min(axis=hi_axes)
    row_ok = feasible.any(axis=hi_axes)
    lower = np.where(row_ok, inner, -np.inf).max(axis=lo_axes)

    # min over j2 of max over feasible j1
    inner = np.where(feasible, M, -np.inf).max(axis=lo_axes)
    col_ok = feasible.any(axis=lo_axes)
    upper = np.where(col_ok, inner, np.inf).min(axis=lo_axes)
    return lower, upper


def immersion_values(theta_draws: np.ndarray, stats: BinStats, j0) -> tuple[np.ndarray, np.ndarray]:
    """Lower and upper immersion values at 1-based cell ``j0`` for a batch of draws.

    ``theta_draws`` has shape ``(B,) + grid shape``; returns two ``(B,)`` arrays.
    """
    grid = stats.grid
    d = grid.d
    theta_draws = np.asarray(theta_draws, dtype=float)
    if theta_draws.shape[1:] != grid.shape:
        raise ValueError(f"theta batch has shape {theta_draws.shape[1:]}, grid is {grid.shape}")
    if stats.n == 0:
        raise StateError("no observations; immersion maps are undefined")
    j0 = tuple(int(v) for v in j0)
    C = corner_blocks(stats.prefix_counts, j0, d)
    per_draw = C.size
    chunk = max(1, _CHUNK_ELEMENTS // per_draw)
    B = theta_draws.shape[0]
    lower = np.empty(B)
    upper = np.empty(B)
    counts = stats.counts.astype(float)
    for start in range(0, B, chunk):
        sl = slice(start, min(B, start + chunk))
        P = prefix_table(theta_draws[sl] * counts, d)
        S = corner_blocks(P, j0, d)
        lower[sl], upper[sl] = _extrema(S, C[None], d)
    if not (np.all(np.isfinite(lower)) and np.all(np.isfinite(upper))):
        raise StateError("no feasible block around the evaluation cell")
    return lower, upper


def immersion_at_cell(theta_draws: np.ndarray, stats: BinStats, j0, kind) -> np.ndarray:
    kind = ImmersionKind.parse(kind)
    lower, upper = immersion_values(theta_draws, stats, j0)
    if kind is ImmersionKind.LOWER:
        return lower
    if kind is ImmersionKind.UPPER:
        return upper
    return (lower + upper) / 2.0


def _single(theta, stats: BinStats, x0):
    theta = np.asarray(theta, dtype=float)
    return immersion_values(theta[None], stats, bin_index(x0, stats.grid))


def iota_lower_at(theta, stats: BinStats, x0) -> float:
    return float(_single(theta, stats, x0)[0][0])


def iota_upper_at(theta, stats: BinStats, x0) -> float:
    return float(_single(theta, stats, x0)[1][0])


def iota_at(kind, theta, stats: BinStats, x0) -> float:
    theta = np.asarray(theta, dtype=float)
    j0 = bin_index(x0, stats.grid)
    return float(immersion_at_cell(theta[None], stats, j0, kind)[0])


def isotonize_surface(theta, stats: BinStats, kind) -> StepFunction:
    """Apply the immersion map at every cell (each cell evaluated at its own index)."""
    kind = ImmersionKind.parse(kind)
    theta = np.asarray(theta, dtype=float)
    out = np.empty(stats.grid.shape)
    for idx in np.ndindex(*stats.grid.shape):
        j0 = tuple(i + 1 for i in idx)
        out[idx] = immersion_at_cell(theta[None], stats, j0, kind)[0]
    return StepFunction(stats.grid, out)


def pava_1d(theta, weights) -> np.ndarray:
    """Weighted least-squares nondecreasing fit by pooling adjacent violators."""
    y = np.asarray(theta, dtype=float).ravel()
    w = np.asarray(weights, dtype=float).ravel()
    if y.shape != w.shape:
        raise ValueError("theta and weights must have the same length")
    if np.any(w <= 0):
        raise ValueError("weights must be positive")
    means: list[float] = []
    wsum: list[float] = []
    sizes: list[int] = []
    for yi, wi in zip(y, w):
        means.append(yi)
        wsum.append(wi)
        sizes.append(1)
        while len(means) > 1 and means[-2] > means[-1]:
            m2, w2, s2 = means.pop(), wsum.pop(), sizes.pop()
            w1 = wsum[-1]
            means[-1] = (means[-1] * w1 + m2 * w2) / (w1 + w2)
            wsum[-1] = w1 + w2
            sizes[-1] += s2
    return np.repeat(means, sizes)
