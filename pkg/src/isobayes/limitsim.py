"""Monte Carlo simulation of the limiting sup-inf / inf-sup functionals.

The two independent Gaussian processes ``H1``, ``H2`` with covariance
``prod_k (u_k ^ u'_k + v_k ^ v'_k)`` are discretised on a lattice of step
``1/m`` by cumulative sums of standard normals (d=1: one sum per half-axis;
d=2: four quadrant sums).  Given ``H1``, the fraction of ``H2`` realizations
whose functional of

    U(u, v) = (H1 + H2)(u, v) / prod_k (u_k + v_k)
              + sum_k (v_k**(b_k+1) - (-u_k)**(b_k+1)) / (u_k + v_k)

is non-positive is one sample of ``Z_B``.  Kind 1 is the sup-inf, kind 2 the
inf-sup and kind 3 their average, all on the same realization.

The lattice starts at ``1/m`` on every axis, so ``u_k + v_k > 0`` everywhere.

Random numbers: outer sample ``o`` draws from its own stream
``SeedSequence(seed, spawn_key=(o,))`` (first ``H1``, then the inner block of
``H2`` fields), so tables do not depend on how the outer loop is split across
workers.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from ._parallel import map_index_blocks
from .intervals import ZbTable

__all__ = [
    "DriftSpec",
    "ProcessField1D",
    "ProcessField2D",
    "PRESETS",
    "simulate_H_1d",
    "simulate_H_2d",
    "drift_values",
    "u_field",
    "supinf",
    "infsup",
    "zb_from_fields",
    "functional_pairs",
    "zb_sample",
    "zb_counts",
    "zb_distribution",
    "zb_tables",
    "outer_rng",
]

PRESETS = {
    # full-size lattice and Monte Carlo settings
    "full-1d": dict(d=1, m=50, horizon=7.0, n_inner=500, n_outer=50_000),
    "full-2d": dict(d=2, m=5, horizon=5.0, n_inner=500, n_outer=50_000),
    # reduced sizes that run on a desktop in minutes
    "desk-1d": dict(d=1, m=50, horizon=7.0, n_inner=200, n_outer=2_000),
    "desk-2d": dict(d=2, m=5, horizon=5.0, n_inner=100, n_outer=500),
}


def _steps(m: int, length: float) -> int:
    """Number of lattice points ``ceil(m * length)``, robust to float noise."""
    return int(math.ceil(round(m * length, 9)))


@dataclass(frozen=True)
class DriftSpec:
    beta: tuple[int, ...]

    def __post_init__(self):
        beta = tuple(int(b) for b in np.atleast_1d(self.beta))
        if not beta or any(b < 1 for b in beta):
            raise ValueError(f"smoothness levels must be integers >= 1, got {self.beta}")
        object.__setattr__(self, "beta", beta)

    @property
    def d(self) -> int:
        return len(self.beta)


@dataclass(frozen=True)
class ProcessField1D:
    """Discretised ``H(u, v) = m**-1/2 (sum_{j<=ceil(mu)} z_j + sum_{j<=ceil(mv)} z'_j)``.

    ``u_cum`` and ``v_cum`` are zero-padded, unscaled cumulative sums.
    """

    m: int
    horizon: float
    u_cum: np.ndarray
    v_cum: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return (self.u_cum.size - 1, self.v_cum.size - 1)

    def __call__(self, u: float, v: float) -> float:
        iu, iv = _steps(self.m, u), _steps(self.m, v)
        return float((self.u_cum[iu] + self.v_cum[iv]) / math.sqrt(self.m))

    def grid_values(self) -> np.ndarray:
        """Field on the lattice ``(i/m, k/m)``, ``i, k >= 1``."""
        s = 1.0 / math.sqrt(self.m)
        return self.u_cum[1:, None] * s + self.v_cum[None, 1:] * s

    def __add__(self, other: "ProcessField1D") -> "ProcessField1D":
        return ProcessField1D(self.m, self.horizon, self.u_cum + other.u_cum, self.v_cum + other.v_cum)

    def __mul__(self, c: float) -> "ProcessField1D":
        return ProcessField1D(self.m, self.horizon, self.u_cum * c, self.v_cum * c)

    def __neg__(self) -> "ProcessField1D":
        return self * -1.0


def _cum1(z: np.ndarray) -> np.ndarray:
    return np.concatenate([[0.0], np.cumsum(z)])


def simulate_H_1d(m: int, c: float, rng: np.random.Generator) -> ProcessField1D:
    if m < 1 or not c > 0:
        raise ValueError("need m >= 1 and a positive horizon")
    K = _steps(m, c)
    z = rng.standard_normal(2 * K)
    return ProcessField1D(m, float(c), _cum1(z[:K]), _cum1(z[K:]))


def _cum2(z: np.ndarray) -> np.ndarray:
    P = np.zeros((z.shape[0] + 1, z.shape[1] + 1))
    P[1:, 1:] = z.cumsum(axis=0).cumsum(axis=1)
    return P


def _horizons_2d(horizons) -> tuple[float, float, float, float]:
    h = np.atleast_1d(np.asarray(horizons, dtype=float))
    if h.size == 1:
        h = np.repeat(h, 4)
    if h.size != 4 or np.any(h <= 0):
        raise ValueError("horizons must be one positive value or (t1, t2, s1, s2)")
    return tuple(float(x) for x in h)


@dataclass(frozen=True)
class ProcessField2D:
    """Four-quadrant discretisation of ``H`` on ``[0,s1]x[0,s2]`` (u) by ``[0,t1]x[0,t2]`` (v).

    ``Q1..Q4`` are zero-padded, unscaled 2-d prefix sums indexed
    ``[v1, v2]``, ``[u1, v2]``, ``[u1, u2]`` and ``[v1, u2]``.
    """

    m: int
    horizons: tuple[float, float, float, float]  # t1, t2, s1, s2
    Q1: np.ndarray
    Q2: np.ndarray
    Q3: np.ndarray
    Q4: np.ndarray

    @property
    def shape(self) -> tuple[int, int, int, int]:
        return (self.Q3.shape[0] - 1, self.Q3.shape[1] - 1, self.Q1.shape[0] - 1, self.Q1.shape[1] - 1)

    def __call__(self, u, v) -> float:
        a, b = (_steps(self.m, x) for x in u)
        c, e = (_steps(self.m, x) for x in v)
        return float((self.Q1[c, e] + self.Q2[a, e] + self.Q3[a, b] + self.Q4[c, b]) / self.m)

    def grid_values(self) -> np.ndarray:
        """Field on the lattice, shape ``(Ku1, Ku2, Kv1, Kv2)``."""
        Q1, Q2, Q3, Q4 = (Q[1:, 1:] / self.m for Q in (self.Q1, self.Q2, self.Q3, self.Q4))
        return (Q1[None, None, :, :] + Q2[:, None, None, :]
                + Q3[:, :, None, None] + Q4.T[None, :, :, None])

    def __add__(self, other: "ProcessField2D") -> "ProcessField2D":
        return ProcessField2D(self.m, self.horizons, self.Q1 + other.Q1, self.Q2 + other.Q2,
                              self.Q3 + other.Q3, self.Q4 + other.Q4)

    def __mul__(self, c: float) -> "ProcessField2D":
        return ProcessField2D(self.m, self.horizons, self.Q1 * c, self.Q2 * c, self.Q3 * c, self.Q4 * c)

    def __neg__(self) -> "ProcessField2D":
        return self * -1.0


def _quadrant_shapes(m: int, horizons) -> list[tuple[int, int]]:
    t1, t2, s1, s2 = horizons
    Kt1, Kt2, Ks1, Ks2 = (_steps(m, h) for h in (t1, t2, s1, s2))
    return [(Kt1, Kt2), (Ks1, Kt2), (Ks1, Ks2), (Kt1, Ks2)]


def simulate_H_2d(m: int, horizons, rng: np.random.Generator) -> ProcessField2D:
    if m < 1:
        raise ValueError("need m >= 1")
    horizons = _horizons_2d(horizons)
    shapes = _quadrant_shapes(m, horizons)
    z = rng.standard_normal(sum(a * b for a, b in shapes))
    Q = []
    pos = 0
    for a, b in shapes:
        Q.append(_cum2(z[pos:pos + a * b].reshape(a, b)))
        pos += a * b
    return ProcessField2D(m, horizons, *Q)


def drift_values(beta, u_points, v_points) -> np.ndarray:
    """Drift ``sum_k (v_k**(b+1) - (-u_k)**(b+1)) / (u_k + v_k)`` on a product lattice.

    ``u_points``/``v_points`` are per-axis 1-d coordinate arrays; result has
    shape ``(len(u_1), ..., len(u_d), len(v_1), ..., len(v_d))``.
    """
    beta = DriftSpec(beta).beta
    d = len(beta)
    shape = [len(p) for p in u_points] + [len(p) for p in v_points]
    out = np.zeros(shape)
    for k, b in enumerate(beta):
        u = np.asarray(u_points[k], dtype=float)
        v = np.asarray(v_points[k], dtype=float)
        if np.any((u[:, None] + v[None, :]) <= 0):
            raise ValueError("lattice contains u_k = v_k = 0; it must start at 1/m")
        term = (v[None, :] ** (b + 1) - (-u[:, None]) ** (b + 1)) / (u[:, None] + v[None, :])
        s = [1] * (2 * d)
        s[k], s[d + k] = len(u), len(v)
        out = out + term.reshape(s)
    return out


def _inv_denominator(u_points, v_points) -> np.ndarray:
    d = len(u_points)
    shape = [len(p) for p in u_points] + [len(p) for p in v_points]
    out = np.ones(shape)
    for k in range(d):
        s = [1] * (2 * d)
        s[k], s[d + k] = len(u_points[k]), len(v_points[k])
        out = out * (np.asarray(u_points[k])[:, None] + np.asarray(v_points[k])[None, :]).reshape(s)
    return 1.0 / out


@functools.lru_cache(maxsize=32)
def _lattice_arrays(m: int, u_sizes: tuple[int, ...], v_sizes: tuple[int, ...], beta: tuple[int, ...]):
    u_pts = [np.arange(1, K + 1) / m for K in u_sizes]
    v_pts = [np.arange(1, K + 1) / m for K in v_sizes]
    inv = _inv_denominator(u_pts, v_pts)
    drift = drift_values(beta, u_pts, v_pts)
    inv.setflags(write=False)
    drift.setflags(write=False)
    return inv, drift


def _sizes(H) -> tuple[tuple[int, ...], tuple[int, ...]]:
    s = H.shape
    d = len(s) // 2
    return tuple(s[:d]), tuple(s[d:])


def u_field(H1, H2, drift: DriftSpec, u_index=None, v_index=None) -> np.ndarray:
    """``U`` on the lattice, shape ``(Ku..., Kv...)``.

    ``u_index``/``v_index`` optionally restrict to per-axis 1-based lattice
    indices; index 0 (the origin) is rejected.
    """
    if not isinstance(drift, DriftSpec):
        drift = DriftSpec(drift)
    if type(H1) is not type(H2) or H1.shape != H2.shape or H1.m != H2.m:
        raise ValueError("H1 and H2 must live on the same lattice")
    d = len(H1.shape) // 2
    if drift.d != d:
        raise ValueError(f"drift has d={drift.d}, fields have d={d}")
    u_sizes, v_sizes = _sizes(H1)
    inv, dr = _lattice_arrays(H1.m, u_sizes, v_sizes, drift.beta)
    U = (H1.grid_values() + H2.grid_values()) * inv + dr
    if u_index is None and v_index is None:
        return U
    u_index = u_index or [np.arange(1, K + 1) for K in u_sizes]
    v_index = v_index or [np.arange(1, K + 1) for K in v_sizes]
    for idx, sizes in ((u_index, u_sizes), (v_index, v_sizes)):
        for ix, K in zip(idx, sizes):
            ix = np.asarray(ix)
            if np.any(ix < 1):
                raise ValueError("lattice index 0 is the origin, where U is undefined")
            if np.any(ix > K):
                raise ValueError("lattice index beyond the simulated horizon")
    sel = [np.asarray(i) - 1 for i in list(u_index) + list(v_index)]
    return U[np.ix_(*sel)]


def supinf(field: np.ndarray) -> float:
    """``max_u min_v`` of a field laid out as ``(u axes..., v axes...)``."""
    field = np.asarray(field)
    d = field.ndim // 2
    F = field.reshape(math.prod(field.shape[:d]), -1)
    return float(F.min(axis=1).max())


def infsup(field: np.ndarray) -> float:
    """``min_v max_u`` of a field laid out as ``(u axes..., v axes...)``."""
    field = np.asarray(field)
    d = field.ndim // 2
    F = field.reshape(math.prod(field.shape[:d]), -1)
    return float(F.max(axis=0).min())


def _nonpositive(pairs: np.ndarray, kind: int) -> np.ndarray:
    a, b = pairs[:, 0], pairs[:, 1]
    if kind == 1:
        return a <= 0
    if kind == 2:
        return b <= 0
    if kind == 3:
        return a <= -b
    raise ValueError(f"kind must be 1, 2 or 3, got {kind}")


def zb_from_fields(fields, kind: int) -> float:
    """Fraction of the given ``U`` fields whose kind-functional is non-positive."""
    pairs = np.array([(supinf(F), infsup(F)) for F in fields], dtype=float).reshape(-1, 2)
    if pairs.shape[0] == 0:
        raise ValueError("no fields")
    return float(_nonpositive(pairs, kind).mean())


def _draw_inner(H1, n_inner: int, rng: np.random.Generator):
    """Noise arrays (H1 + H2) for ``n_inner`` fresh H2 realizations, pre-scaled."""
    if isinstance(H1, ProcessField1D):
        Ku, Kv = H1.shape
        z = rng.standard_normal((n_inner, Ku + Kv))
        s = 1.0 / math.sqrt(H1.m)
        A = (np.cumsum(z[:, :Ku], axis=1) + H1.u_cum[1:]) * s
        B = (np.cumsum(z[:, Ku:], axis=1) + H1.v_cum[1:]) * s
        return (A, B)
    shapes = _quadrant_shapes(H1.m, H1.horizons)
    total = sum(a * b for a, b in shapes)
    z = rng.standard_normal((n_inner, total))
    out = []
    pos = 0
    for (a, b), Q in zip(shapes, (H1.Q1, H1.Q2, H1.Q3, H1.Q4)):
        blk = z[:, pos:pos + a * b].reshape(n_inner, a, b).cumsum(axis=1).cumsum(axis=2)
        out.append(np.ascontiguousarray((blk + Q[1:, 1:]) / H1.m))
        pos += a * b
    return tuple(out)


def functional_pairs(H1, n_inner: int, drift: DriftSpec, rng: np.random.Generator,
                     scale: float = 1.0) -> np.ndarray:
    """``(n_inner, 2)`` array of (sup-inf, inf-sup) of ``scale * U`` for fresh ``H2`` draws."""
    if not isinstance(drift, DriftSpec):
        drift = DriftSpec(drift)
    if n_inner < 1:
        raise ValueError("n_inner must be at least 1")
    u_sizes, v_sizes = _sizes(H1)
    if drift.d != len(u_sizes):
        raise ValueError(f"drift has d={drift.d}, field has d={len(u_sizes)}")
    inv, dr = _lattice_arrays(H1.m, u_sizes, v_sizes, drift.beta)
    noise = _draw_inner(H1, n_inner, rng)
    out = np.empty((n_inner, 2))
    if len(u_sizes) == 1:
        _kernels.supinf_infsup_1d(*noise, inv, dr, float(scale), out)
    elif len(u_sizes) == 2:
        _kernels.supinf_infsup_2d(*noise, inv, dr, float(scale), out)
    else:
        raise ValueError("only d = 1 and d = 2 are supported")
    return out


def zb_sample(H1, n_inner: int, drift: DriftSpec, kind: int, rng: np.random.Generator,
              scale: float = 1.0) -> float:
    """One draw of ``Z_B``: fraction of inner realizations with non-positive functional.

    ``scale`` multiplies every ``U`` value before the extrema are taken; the
    result does not depend on it for ``scale > 0``.
    """
    pairs = functional_pairs(H1, n_inner, drift, rng, scale)
    return float(_nonpositive(pairs, int(kind)).mean())


def outer_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(index,))))


def _simulate_H(d: int, m: int, horizon, rng):
    if d == 1:
        return simulate_H_1d(m, float(np.atleast_1d(horizon)[0]), rng)
    if d == 2:
        return simulate_H_2d(m, horizon, rng)
    raise ValueError("only d = 1 and d = 2 are supported")


def _count_block(indices, seed, m, horizon, beta, n_inner):
    drift = DriftSpec(beta)
    out = np.empty((len(indices), 3), dtype=np.int64)
    for row, o in enumerate(indices):
        rng = outer_rng(seed, o)
        H1 = _simulate_H(drift.d, m, horizon, rng)
        pairs = functional_pairs(H1, n_inner, drift, rng)
        out[row] = [_nonpositive(pairs, k).sum() for k in (1, 2, 3)]
    return out


def zb_counts(n_outer: int, n_inner: int, m: int, horizon, drift, seed: int,
              workers: int = 1) -> np.ndarray:
    """``(n_outer, 3)`` counts of non-positive kind-1/2/3 functionals per outer sample."""
    if not isinstance(drift, DriftSpec):
        drift = DriftSpec(drift)
    if n_outer < 1 or n_inner < 1:
        raise ValueError("n_outer and n_inner must be positive")
    parts = map_index_blocks(_count_block, n_outer, workers, seed, m, horizon, drift.beta, n_inner)
    return np.concatenate(parts, axis=0)


def zb_tables(n_outer: int, n_inner: int, m: int, horizon, drift, seed: int,
              workers: int = 1, kinds=(1, 2, 3), step: float = 0.001) -> dict[int, ZbTable]:
    """CDF tables for several kinds from one joint simulation."""
    if not isinstance(drift, DriftSpec):
        drift = DriftSpec(drift)
    counts = zb_counts(n_outer, n_inner, m, horizon, drift, seed, workers)
    meta = dict(n_outer=n_outer, n_inner=n_inner, m=m, horizon=horizon, seed=seed)
    return {k: ZbTable.from_samples(counts[:, k - 1], k, drift.beta, n_inner=n_inner,
                                    step=step, meta=meta)
            for k in kinds}


def zb_distribution(n_outer: int, n_inner: int, m: int, horizon, drift, kind: int,
                    seed: int, workers: int = 1, step: float = 0.001) -> ZbTable:
    return zb_tables(n_outer, n_inner, m, horizon, drift, seed, workers, (int(kind),), step)[int(kind)]
