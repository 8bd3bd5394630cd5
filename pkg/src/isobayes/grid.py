"""Hyperrectangular partition of the unit cube, binning and block aggregation.

Cells are indexed 1-based as in ``[1:J]``.  Cell ``j`` covers
``prod_k ((j_k - 1)/J_k, j_k/J_k]``, except that the first cell along each
axis is also closed at 0.  Arrays over the grid are stored with shape ``J``
and indexed 0-based internally.

Block sums use zero-padded inclusive prefix tables, so any hyperrectangular
block aggregate is an inclusion-exclusion over ``2**d`` corners.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError

__all__ = [
    "GridSpec",
    "RegressionDataset",
    "BinStats",
    "bin_index",
    "bin_indices",
    "compute_bin_stats",
    "prefix_table",
    "block_query",
    "corner_blocks",
    "block_mean",
    "is_monotone",
]


@dataclass(frozen=True)
class GridSpec:
    J: tuple[int, ...]

    def __post_init__(self):
        J = tuple(int(j) for j in np.atleast_1d(self.J))
        if len(J) == 0:
            raise ValueError("grid needs at least one axis")
        if any(j < 1 for j in J):
            raise ValueError(f"cells per axis must be positive, got {J}")
        total = 1
        for j in J:
            total *= j
        if total > np.iinfo(np.intp).max:
            raise ValueError(f"grid with {total} cells exceeds the index range")
        object.__setattr__(self, "J", J)

    @property
    def d(self) -> int:
        return len(self.J)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.J

    @property
    def n_cells(self) -> int:
        return math.prod(self.J)

    @classmethod
    def uniform(cls, J: int, d: int) -> "GridSpec":
        return cls((J,) * d)

    @classmethod
    def from_sample_size(cls, n: int, d: int) -> "GridSpec":
        """``J = ceil(n**(1/3) * log(log n))`` cells on every axis (natural log)."""
        if n < 1:
            raise ValueError("sample size must be positive")
        loglog = math.log(math.log(n)) if n > math.e else 0.0
        J = max(1, math.ceil(n ** (1.0 / 3.0) * loglog))
        return cls.uniform(J, d)


@dataclass(frozen=True)
class RegressionDataset:
    """``n`` observations with covariates in ``[0,1]^d`` and real responses."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float).reshape(-1)
        if x.ndim == 1:
            x = x.reshape(len(y), -1) if len(y) else x.reshape(0, 1)
        if x.ndim != 2 or x.shape[0] != y.shape[0]:
            raise DataError(f"x has shape {x.shape} but y has {y.shape[0]} entries")
        if x.shape[1] < 1:
            raise DataError("covariates need at least one coordinate")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise DataError("non-finite values in dataset")
        bad = np.nonzero(np.any((x < 0.0) | (x > 1.0), axis=1))[0]
        if bad.size:
            raise DataError(
                f"covariate outside [0,1] at observation {int(bad[0])}: {x[bad[0]].tolist()}"
            )
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.y.shape[0]

    @property
    def d(self) -> int:
        return self.x.shape[1]

    @classmethod
    def empty(cls, d: int) -> "RegressionDataset":
        return cls(np.zeros((0, d)), np.zeros(0))


def bin_indices(x, grid: GridSpec) -> np.ndarray:
    """0-based cell indices for an ``(n, d)`` array of covariates."""
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[None, :]
    if x.shape[1] != grid.d:
        raise ValueError(f"points have dimension {x.shape[1]}, grid has {grid.d}")
    if np.any((x < 0.0) | (x > 1.0)) or not np.all(np.isfinite(x)):
        raise DataError("coordinate outside [0,1]")
    J = np.asarray(grid.J, dtype=float)
    j = np.ceil(x * J)
    # x*J rounds; re-check against the cell edges as the grid defines them
    j = np.where(x <= (j - 1.0) / J, j - 1.0, j)
    j = np.where(x > j / J, j + 1.0, j)
    j = np.clip(j, 1.0, J)
    return j.astype(np.intp) - 1


def bin_index(x, grid: GridSpec) -> tuple[int, ...]:
    """1-based cell index ``j0(x)`` of a single point."""
    x = np.asarray(x, dtype=float).reshape(-1)
    return tuple(int(v) + 1 for v in bin_indices(x[None, :], grid)[0])


def prefix_table(a: np.ndarray, d: int) -> np.ndarray:
    """Inclusive cumulative sums over the last ``d`` axes, zero-padded in front.

    ``P[..., i_1, ..., i_d]`` is the sum of ``a`` over the block ``[1:i]`` in
    1-based cell indices; any index equal to 0 gives 0.
    """
    a = np.asarray(a)
    lead = a.ndim - d
    pad = [(0, 0)] * lead + [(1, 0)] * d
    P = np.pad(a, pad)
    for ax in range(lead, a.ndim):
        P = np.cumsum(P, axis=ax)
    return P


def block_query(P: np.ndarray, j1, j2, d: int):
    """Sum over the 1-based inclusive block ``[j1:j2]`` from a padded prefix table."""
    total = 0
    for corner in itertools.product((0, 1), repeat=d):
        idx = tuple(j1[k] - 1 if c else j2[k] for k, c in enumerate(corner))
        sign = -1 if sum(corner) % 2 else 1
        total = total + sign * P[(Ellipsis,) + idx]
    return total


def corner_blocks(P: np.ndarray, j0, d: int, lo=None, hi=None) -> np.ndarray:
    """Block sums for every ``j1 <= j0 <= j2`` at once.

    ``j0`` is 1-based.  Returns an array of shape
    ``lead + (j0_1, ..., j0_d) + (J_1 - j0_1 + 1, ..., J_d - j0_d + 1)``; entry
    ``[..., a, b]`` is the block with lower corner ``j1 = a + 1`` and upper
    corner ``j2 = j0 + b`` (0-based ``a``, ``b``).
    """
    lead = P.shape[: P.ndim - d]
    J = [s - 1 for s in P.shape[P.ndim - d :]]
    if lo is None:
        lo = [np.arange(0, j0[k]) for k in range(d)]  # j1 - 1
    if hi is None:
        hi = [np.arange(j0[k], J[k] + 1) for k in range(d)]  # j2
    out_shape = lead + tuple(len(v) for v in lo) + tuple(len(v) for v in hi)
    out = np.zeros(out_shape, dtype=P.dtype)
    nl = len(lead)
    for corner in itertools.product((0, 1), repeat=d):
        sub = P
        for k, c in enumerate(corner):
            sub = np.take(sub, lo[k] if c else hi[k], axis=nl + k)
        sub = sub.reshape(sub.shape + (1,) * d)
        for k, c in enumerate(corner):
            if not c:
                sub = sub.swapaxes(nl + k, nl + d + k)
        if sum(corner) % 2:
            out -= sub
        else:
            out += sub
    return out


@dataclass(frozen=True)
class BinStats:
    grid: GridSpec
    counts: np.ndarray
    sums: np.ndarray
    prefix_counts: np.ndarray = field(repr=False)
    prefix_sums: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return int(self.counts.sum())

    @property
    def means(self) -> np.ndarray:
        """Bin means, NaN on empty cells."""
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(self.counts > 0, self.sums / np.maximum(self.counts, 1), np.nan)

    def block_count(self, j1, j2) -> int:
        _check_block(self.grid, j1, j2)
        return int(block_query(self.prefix_counts, j1, j2, self.grid.d))

    def block_sum(self, j1, j2) -> float:
        _check_block(self.grid, j1, j2)
        return float(block_query(self.prefix_sums, j1, j2, self.grid.d))


def compute_bin_stats(data: RegressionDataset, grid: GridSpec) -> BinStats:
    if data.d != grid.d:
        raise ValueError(f"dataset has d={data.d}, grid has d={grid.d}")
    counts = np.zeros(grid.shape, dtype=np.int64)
    sums = np.zeros(grid.shape, dtype=float)
    if data.n:
        idx = tuple(bin_indices(data.x, grid).T)
        np.add.at(counts, idx, 1)
        np.add.at(sums, idx, data.y)
    pc = prefix_table(counts, grid.d)
    ps = prefix_table(sums, grid.d)
    for a in (counts, sums, pc, ps):
        a.setflags(write=False)
    return BinStats(grid, counts, sums, pc, ps)


def _check_block(grid: GridSpec, j1, j2):
    j1 = tuple(j1)
    j2 = tuple(j2)
    if len(j1) != grid.d or len(j2) != grid.d:
        raise ValueError("block corners must have one index per axis")
    for a, b, J in zip(j1, j2, grid.J):
        if not (1 <= a <= J and 1 <= b <= J):
            raise ValueError(f"block corner outside [1:J]: {j1}, {j2}")
        if a > b:
            raise ValueError(f"block corners not ordered: {j1} vs {j2}")


def block_mean(stats: BinStats, j1, j2, theta) -> float | None:
    """Count-weighted mean of ``theta`` over ``[j1:j2]``; None for an empty block."""
    _check_block(stats.grid, j1, j2)
    theta = np.asarray(theta, dtype=float)
    if theta.shape != stats.grid.shape:
        raise ValueError(f"theta has shape {theta.shape}, grid is {stats.grid.shape}")
    d = stats.grid.d
    count = block_query(stats.prefix_counts, j1, j2, d)
    if count == 0:
        return None
    weighted = prefix_table(stats.counts * theta, d)
    return float(block_query(weighted, j1, j2, d) / count)


def is_monotone(theta: np.ndarray, tol: float = 0.0) -> bool:
    """True when ``theta`` is nondecreasing along every axis."""
    theta = np.asarray(theta)
    return all(np.all(np.diff(theta, axis=ax) >= -tol) for ax in range(theta.ndim))
