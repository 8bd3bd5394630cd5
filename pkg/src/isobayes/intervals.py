"""Credible intervals from immersion-posterior draws and coverage recalibration.

Empirical quantiles use linear interpolation between order statistics (the
"type 7" rule, numpy's default).

A :class:`ZbTable` stores the CDF of one limiting variable ``Z_B`` on a grid of
``z`` values in ``[0, 1]``.  For a one-sided interval ``(-inf, Q]`` at
credibility ``c`` the limiting coverage is ``F(c)``; for an equal-tailed
interval it is ``F(1 - g/2) - F(g/2)`` with ``g = 1 - c``.
"""

from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import brentq

from .errors import DataError, TableRangeError
from .grid import GridSpec, RegressionDataset, bin_index, compute_bin_stats
from .immersion import ImmersionKind, immersion_values
from .posterior import PriorSpec, fit_posterior, sample_theta

__all__ = [
    "Sided",
    "ImmersionDraws",
    "CredibleInterval",
    "ZbTable",
    "immersion_draws_at",
    "credible_interval",
    "coverage_of_level",
    "recalibrate_level",
    "read_zb_tables",
    "write_zb_tables",
    "shipped_tables",
    "find_table",
]

ZB_HEADER = ["kind", "d", "beta", "z", "cdf"]


class Sided(enum.Enum):
    TWO_SIDED = "two_sided_equal_tail"
    UPPER_ONE_SIDED = "upper_one_sided"

    @classmethod
    def parse(cls, value) -> "Sided":
        if isinstance(value, cls):
            return value
        value = str(value).lower()
        aliases = {"two": cls.TWO_SIDED, "two_sided": cls.TWO_SIDED,
                   "one": cls.UPPER_ONE_SIDED, "one_sided": cls.UPPER_ONE_SIDED,
                   "upper": cls.UPPER_ONE_SIDED}
        return aliases.get(value) or cls(value)


@dataclass(frozen=True)
class ImmersionDraws:
    values: np.ndarray
    kind: ImmersionKind
    x0: tuple[float, ...]
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None


@dataclass(frozen=True)
class CredibleInterval:
    lower: float
    upper: float
    credibility: float
    kind: ImmersionKind | None
    x0: tuple[float, ...]

    def __post_init__(self):
        if not self.lower <= self.upper:
            raise ValueError(f"interval endpoints out of order: {self.lower} > {self.upper}")

    @property
    def length(self) -> float:
        return self.upper - self.lower

    def contains(self, value: float) -> bool:
        return self.lower <= value <= self.upper


def immersion_draws_at(data: RegressionDataset, grid: GridSpec, prior: PriorSpec, x0, kind,
                       n_draws: int, rng: np.random.Generator) -> ImmersionDraws:
    """Posterior draws of the immersed function value at ``x0``."""
    if n_draws < 2:
        raise ValueError("need at least two draws")
    kind = ImmersionKind.parse(kind)
    stats = compute_bin_stats(data, grid)
    params = fit_posterior(data, stats, prior)
    theta = sample_theta(params, n_draws, rng)
    lo, up = immersion_values(theta, stats, bin_index(x0, grid))
    x0 = tuple(float(v) for v in np.ravel(x0))
    if kind is ImmersionKind.LOWER:
        return ImmersionDraws(lo, kind, x0)
    if kind is ImmersionKind.UPPER:
        return ImmersionDraws(up, kind, x0)
    return ImmersionDraws((lo + up) / 2.0, kind, x0, lo, up)


def credible_interval(draws: ImmersionDraws | np.ndarray, credibility: float,
                      sided="two_sided_equal_tail") -> CredibleInterval:
    sided = Sided.parse(sided)
    if not 0.0 < credibility < 1.0:
        raise ValueError("credibility must lie in (0, 1)")
    if isinstance(draws, ImmersionDraws):
        values, kind, x0 = draws.values, draws.kind, draws.x0
    else:
        values, kind, x0 = np.asarray(draws, dtype=float), None, ()
    if values.size == 0:
        raise ValueError("no draws")
    gamma = 1.0 - credibility
    if sided is Sided.TWO_SIDED:
        lo, hi = np.quantile(values, [gamma / 2.0, 1.0 - gamma / 2.0])
    else:
        lo, hi = -np.inf, np.quantile(values, 1.0 - gamma)
    return CredibleInterval(float(lo), float(hi), credibility, kind, x0)


@dataclass(frozen=True)
class ZbTable:
    """Tabulated CDF of ``Z_B`` for one kind and smoothness vector."""

    kind: int
    beta: tuple[int, ...]
    z: np.ndarray
    cdf: np.ndarray
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        z = np.asarray(self.z, dtype=float)
        F = np.asarray(self.cdf, dtype=float)
        if z.ndim != 1 or z.shape != F.shape or z.size < 2:
            raise ValueError("z and cdf must be 1-d arrays of equal length >= 2")
        if np.any(np.diff(z) <= 0):
            raise ValueError("z grid must be strictly increasing")
        if np.any(np.diff(F) < 0) or F.min() < 0 or F.max() > 1:
            raise ValueError("cdf must be nondecreasing with values in [0, 1]")
        if self.kind not in (1, 2, 3):
            raise ValueError(f"kind must be 1, 2 or 3, got {self.kind}")
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "cdf", F)
        object.__setattr__(self, "beta", tuple(int(b) for b in self.beta))

    @property
    def d(self) -> int:
        return len(self.beta)

    @classmethod
    def from_samples(cls, samples, kind: int, beta, n_inner: int | None = None,
                     step: float = 0.001, meta: dict | None = None) -> "ZbTable":
        """Empirical CDF of ``samples`` on the grid ``0, step, ..., 1``.

        With ``n_inner`` given, ``samples`` are integer counts ``k`` of a
        proportion ``k / n_inner`` and the comparison is done in exact integer
        arithmetic.
        """
        n_steps = int(round(1.0 / step))
        i = np.arange(n_steps + 1)
        z = i / n_steps
        samples = np.asarray(samples)
        if n_inner is not None:
            k = np.sort(samples.astype(np.int64))
            # k / n_inner <= i / n_steps  <=>  k * n_steps <= i * n_inner
            F = np.searchsorted(k * n_steps, i * n_inner, side="right") / k.size
        else:
            s = np.sort(samples.astype(float))
            F = np.searchsorted(s, z, side="right") / s.size
        return cls(kind, tuple(beta), z, F, dict(meta or {}))

    @classmethod
    def identity(cls, kind: int = 1, beta=(1,), step: float = 0.001) -> "ZbTable":
        z = np.linspace(0.0, 1.0, int(round(1 / step)) + 1)
        return cls(kind, tuple(beta), z, z.copy())

    def cdf_at(self, z) -> np.ndarray | float:
        """Piecewise-linear CDF; errors outside the tabulated range."""
        za = np.asarray(z, dtype=float)
        if np.any(za < self.z[0] - 1e-12) or np.any(za > self.z[-1] + 1e-12):
            raise TableRangeError(f"z={z} outside table range [{self.z[0]}, {self.z[-1]}]")
        out = np.interp(za, self.z, self.cdf)
        return float(out) if out.ndim == 0 else out

    def quantile(self, p) -> float:
        """Inverse CDF, linear between the last node below ``p`` and the first at or above it.

        ``p <= F(z_0)`` gives ``z_0`` (an atom at the lower end); ``p`` above the
        largest tabulated value is an error.
        """
        p = float(p)
        F = self.cdf
        if p > F[-1] or not 0.0 <= p <= 1.0:
            raise TableRangeError(f"probability {p} outside table support [{F[0]}, {F[-1]}]")
        hi = int(np.searchsorted(F, p, side="left"))
        if hi == 0 or F[hi] == p:
            return float(self.z[hi])
        lo = hi - 1
        w = (p - F[lo]) / (F[hi] - F[lo])
        return float(self.z[lo] + w * (self.z[hi] - self.z[lo]))

    def mc_standard_error(self, z) -> float:
        n = self.meta.get("n_outer")
        if not n:
            raise ValueError("table does not record its Monte Carlo sample size")
        F = self.cdf_at(z)
        return float(np.sqrt(F * (1 - F) / n))


def coverage_of_level(credibility: float, table: ZbTable, sided="two_sided_equal_tail") -> float:
    """Limiting frequentist coverage of an interval with the given credibility."""
    sided = Sided.parse(sided)
    if not 0.0 < credibility < 1.0:
        raise TableRangeError("credibility must lie in (0, 1)")
    if sided is Sided.UPPER_ONE_SIDED:
        return float(table.cdf_at(credibility))
    gamma = 1.0 - credibility
    return float(table.cdf_at(1.0 - gamma / 2.0) - table.cdf_at(gamma / 2.0))


def recalibrate_level(target_coverage: float, table: ZbTable, sided="two_sided_equal_tail") -> float:
    """Credibility whose limiting coverage under ``table`` equals ``target_coverage``."""
    sided = Sided.parse(sided)
    if not 0.0 < target_coverage < 1.0:
        raise TableRangeError("target coverage must lie in (0, 1)")
    if sided is Sided.UPPER_ONE_SIDED:
        c = table.quantile(target_coverage)
    elif table.kind == 3:
        # symmetric about 1/2: closed form
        alpha = 1.0 - target_coverage
        c = 1.0 - 2.0 * table.quantile(alpha / 2.0)
    else:
        eps = 1e-9

        def gap(c):
            return coverage_of_level(c, table, sided) - target_coverage

        lo, hi = eps, 1.0 - eps
        if gap(lo) > 0 or gap(hi) < 0:
            raise TableRangeError(f"coverage {target_coverage} not attainable under the table")
        c = brentq(gap, lo, hi, xtol=1e-12)
    if not 0.0 < c < 1.0:
        raise TableRangeError(f"recalibrated credibility {c} outside (0, 1)")
    return float(c)


def write_zb_tables(tables, path) -> None:
    """Write tables in the ``kind,d,beta,z,cdf`` CSV schema."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(ZB_HEADER)
    for t in tables:
        beta = "-".join(str(b) for b in t.beta)
        for z, F in zip(t.z, t.cdf):
            w.writerow([t.kind, t.d, beta, f"{z:.6g}", repr(float(F))])
    Path(path).write_text(buf.getvalue())


def read_zb_tables(path) -> list[ZbTable]:
    rows: dict[tuple[int, tuple[int, ...]], list[tuple[float, float]]] = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ZB_HEADER:
            raise DataError(f"{path}: expected header {','.join(ZB_HEADER)}, got {header}")
        for lineno, row in enumerate(reader, start=2):
            try:
                kind, d, beta, z, F = row
                beta_t = tuple(int(b) for b in beta.split("-"))
                if len(beta_t) != int(d):
                    raise ValueError(f"beta {beta} does not have {d} entries")
                rows.setdefault((int(kind), beta_t), []).append((float(z), float(F)))
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: {exc}") from None
    out = []
    for (kind, beta), pts in rows.items():
        pts.sort()
        z, F = zip(*pts)
        out.append(ZbTable(kind, beta, np.array(z), np.array(F)))
    return out


def shipped_tables() -> list[ZbTable]:
    """Z_B tables bundled with the package (regenerate with ``scripts/make_tables.py``)."""
    from importlib.resources import files

    return read_zb_tables(files("isobayes") / "data" / "zb_tables.csv")


def find_table(kind: int, beta, tables=None) -> ZbTable:
    beta = tuple(int(b) for b in beta)
    for t in tables if tables is not None else shipped_tables():
        if t.kind == int(kind) and t.beta == beta:
            return t
    raise TableRangeError(f"no Z_B table for kind={kind}, beta={beta}")
