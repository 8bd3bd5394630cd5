"""Frequentist block max-min / min-max estimator on raw observations.

The lower estimate maximizes, over lower corners ``u <= x0``, the minimum over
upper corners ``v >= x0`` of the mean response in the closed box ``[u, v]``
(empty boxes excluded); the upper estimate swaps the extrema.  Corners only
matter through which observations they include, so per axis they range over
the observed coordinates plus ``x0``.  On that rank lattice the problem is the
same block aggregation as on a binned grid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._kernels import block_maxmin_2d
from .errors import StateError
from .grid import RegressionDataset, block_query, corner_blocks, prefix_table
from .intervals import CredibleInterval

__all__ = ["DhzEstimate", "dhz_estimate", "dhz_interval"]

_CHUNK_ELEMENTS = 4_000_000


@dataclass(frozen=True)
class DhzEstimate:
    f_minus: float
    f_plus: float
    f_hat: float
    block_count: int
    u_hat: tuple[float, ...]
    v_hat: tuple[float, ...]


def _rank_lattice(data: RegressionDataset, x0: np.ndarray):
    axes, ranks, j0 = [], [], []
    for k in range(data.d):
        vals = np.unique(np.concatenate([data.x[:, k], [x0[k]]]))
        axes.append(vals)
        ranks.append(np.searchsorted(vals, data.x[:, k]))
        j0.append(int(np.searchsorted(vals, x0[k])) + 1)
    shape = tuple(len(a) for a in axes)
    counts = np.zeros(shape)
    sums = np.zeros(shape)
    idx = tuple(ranks)
    np.add.at(counts, idx, 1.0)
    np.add.at(sums, idx, data.y)
    return axes, tuple(j0), prefix_table(counts, data.d), prefix_table(sums, data.d)


def _extrema_numpy(Pc, Ps, j0, d, lo, hi):
    hi_axes = tuple(range(d, 2 * d))
    lo_axes = tuple(range(d))
    per_row = np.prod([len(h) for h in hi]) * np.prod([len(v) for v in lo[1:]])
    chunk = max(1, int(_CHUNK_ELEMENTS // per_row))

    best, best_u = -np.inf, None
    colmax = np.full(tuple(len(h) for h in hi), -np.inf)
    for start in range(0, len(lo[0]), chunk):
        lo_c = [lo[0][start:start + chunk]] + lo[1:]
        C = corner_blocks(Pc, j0, d, lo_c, hi)
        S = corner_blocks(Ps, j0, d, lo_c, hi)
        feasible = C > 0
        with np.errstate(invalid="ignore", divide="ignore"):
            mean = S / np.where(feasible, C, 1.0)
        inner = np.where(feasible, mean, np.inf).min(axis=hi_axes)
        inner = np.where(feasible.any(axis=hi_axes), inner, -np.inf)
        flat = int(np.argmax(inner))
        if inner.flat[flat] > best:
            best = float(inner.flat[flat])
            a = np.unravel_index(flat, inner.shape)
            best_u = (int(lo_c[0][a[0]]),) + tuple(int(lo[k][a[k]]) for k in range(1, d))
        colmax = np.maximum(colmax, np.where(feasible, mean, -np.inf).max(axis=lo_axes))
    return best, best_u, colmax


def _extrema_compiled(Pc, Ps, j0, d):
    if d == 1:
        # a second axis holding a single cell turns the 1-d lattice into a 2-d one
        Pc = np.stack([np.zeros_like(Pc), Pc], axis=1)
        Ps = np.stack([np.zeros_like(Ps), Ps], axis=1)
        j0 = (j0[0], 1)
    M1, M2 = Pc.shape[0] - 1, Pc.shape[1] - 1
    colmax = np.empty((M1 - j0[0] + 1, M2 - j0[1] + 1))
    best, a1, a2 = block_maxmin_2d(np.ascontiguousarray(Pc), np.ascontiguousarray(Ps),
                                   j0[0], j0[1], colmax)
    best_u = None if a1 < 0 else (int(a1), int(a2))[:d]
    return float(best), best_u, colmax.reshape(colmax.shape[:d])


def dhz_estimate(data: RegressionDataset, x0) -> DhzEstimate:
    if data.n == 0:
        raise StateError("no observations")
    x0 = np.asarray(x0, dtype=float).reshape(-1)
    if x0.size != data.d:
        raise ValueError(f"x0 has dimension {x0.size}, data has {data.d}")
    d = data.d
    axes, j0, Pc, Ps = _rank_lattice(data, x0)
    M = [len(a) for a in axes]
    lo = [np.arange(0, j0[k]) for k in range(d)]
    hi = [np.arange(j0[k], M[k] + 1) for k in range(d)]
    if d <= 2:
        best, best_u, colmax = _extrema_compiled(Pc, Ps, j0, d)
    else:
        best, best_u, colmax = _extrema_numpy(Pc, Ps, j0, d, lo, hi)
    # every lower corner pairs with the full upper box, which holds all points above it;
    # the lowest corner therefore always has a feasible block
    colmax = np.where(np.isfinite(colmax), colmax, np.inf)
    flat = int(np.argmin(colmax))
    f_plus = float(colmax.flat[flat])
    b = np.unravel_index(flat, colmax.shape)
    best_v = tuple(int(hi[k][b[k]]) for k in range(d))
    if best_u is None or not np.isfinite(best) or not np.isfinite(f_plus):
        raise StateError("no nonempty box around x0")

    # lattice positions: lower corner index a means u_k = axes[k][a], upper b means v_k = axes[k][b-1]
    j1 = tuple(a + 1 for a in best_u)
    count = int(round(block_query(Pc, j1, best_v, d)))
    if count == 0:
        # box from the lower argmax and the upper argmin holds no data; use the
        # lower estimate's own minimizing box instead
        C = corner_blocks(Pc, j0, d, [np.array([a]) for a in best_u], hi)[(0,) * d]
        S = corner_blocks(Ps, j0, d, [np.array([a]) for a in best_u], hi)[(0,) * d]
        with np.errstate(invalid="ignore", divide="ignore"):
            mean = np.where(C > 0, S / np.where(C > 0, C, 1.0), np.inf)
        count = int(round(C.flat[int(np.argmin(mean))]))
    u_hat = tuple(float(axes[k][best_u[k]]) for k in range(d))
    v_hat = tuple(float(axes[k][best_v[k] - 1]) for k in range(d))
    return DhzEstimate(best, f_plus, (best + f_plus) / 2.0, count, u_hat, v_hat)


def dhz_interval(est: DhzEstimate, sigma_hat: float, c_gamma: float,
                 level: float | None = None) -> CredibleInterval:
    """``f_hat -/+ c_gamma * sigma_hat / sqrt(block_count)``."""
    if c_gamma < 0 or sigma_hat < 0:
        raise ValueError("c_gamma and sigma_hat must be nonnegative")
    half = c_gamma * sigma_hat / np.sqrt(est.block_count)
    conf = float("nan") if level is None else 1.0 - level
    return CredibleInterval(est.f_hat - half, est.f_hat + half, conf, None, ())
