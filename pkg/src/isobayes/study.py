"""Coverage studies: repeated simulation of data, intervals and hit rates."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np

from ._parallel import map_index_blocks
from .datasets import FUNCTIONS, generate_dataset, true_value
from .dhz import dhz_estimate, dhz_interval
from .errors import ConfigError, TableRangeError
from .grid import GridSpec, bin_index, compute_bin_stats
from .immersion import ImmersionKind, immersion_values
from .intervals import (Sided, ZbTable, find_table, read_zb_tables, recalibrate_level)
from .limitsim import outer_rng
from .posterior import (FixedVariance, InverseGammaVariance, MMLEPlugin, PriorSpec,
                        fit_posterior, sample_theta, sigma2_mmle)

__all__ = ["StudyConfig", "StudyResult", "coverage_study", "replication"]


@dataclass
class StudyConfig:
    function: str = "f2"
    n: int = 200
    sigma: float = 1.0
    d: int = 2
    x0: tuple[float, ...] = (0.5, 0.5)
    J: int | None = None  # None: ceil(n^(1/3) log log n)
    zeta: float = 0.0
    lambda2: float = 1000.0
    variance_mode: str = "mmle"  # mmle | fixed | inverse_gamma
    sigma2: float | None = None
    b1: float | None = None
    b2: float | None = None
    kind: str = "average"
    sided: str = "two_sided_equal_tail"
    levels: tuple[float, ...] = (0.05,)
    recalibrate: bool = True
    beta: tuple[int, ...] | None = None
    table: str | None = None
    replications: int = 500
    draws: int = 2000
    seed: int = 0
    workers: int = 1
    c_gamma: dict[float, float] = field(default_factory=dict)

    def __post_init__(self):
        self.x0 = tuple(float(v) for v in np.ravel(self.x0))
        self.levels = tuple(float(v) for v in np.ravel(self.levels))
        self.c_gamma = {float(k): float(v) for k, v in dict(self.c_gamma).items()}
        if self.beta is not None:
            self.beta = tuple(int(b) for b in np.ravel(self.beta))
        self.validate()

    def validate(self):
        if self.function not in FUNCTIONS:
            raise ConfigError(f"unknown function {self.function!r}")
        for name in ("n", "replications", "draws", "d"):
            if int(getattr(self, name)) < 1:
                raise ConfigError(f"{name} must be positive")
        if self.draws < 2:
            raise ConfigError("draws must be at least 2")
        if self.sigma < 0:
            raise ConfigError("sigma must be nonnegative")
        if len(self.x0) != self.d or not all(0.0 < v < 1.0 for v in self.x0):
            raise ConfigError("x0 must be an interior point of [0,1]^d")
        if not self.levels or not all(0.0 < a < 1.0 for a in self.levels):
            raise ConfigError("levels must lie in (0, 1)")
        if self.J is not None and int(self.J) < 1:
            raise ConfigError("J must be positive")
        if self.variance_mode not in ("mmle", "fixed", "inverse_gamma"):
            raise ConfigError(f"unknown variance_mode {self.variance_mode!r}")
        if self.variance_mode == "fixed" and self.sigma2 is None:
            raise ConfigError("variance_mode 'fixed' needs sigma2")
        if self.variance_mode == "inverse_gamma" and (self.b1 is None or self.b2 is None):
            raise ConfigError("variance_mode 'inverse_gamma' needs b1 and b2")
        try:
            ImmersionKind.parse(self.kind)
            Sided.parse(self.sided)
        except (ValueError, KeyError) as exc:
            raise ConfigError(str(exc)) from None

    @classmethod
    def from_mapping(cls, cfg: dict) -> "StudyConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(cfg) - names)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        try:
            return cls(**cfg)
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(str(exc)) from None

    def grid(self) -> GridSpec:
        if self.J is None:
            return GridSpec.from_sample_size(self.n, self.d)
        return GridSpec.uniform(int(self.J), self.d)

    def prior(self, grid: GridSpec) -> PriorSpec:
        if self.variance_mode == "fixed":
            mode = FixedVariance(float(self.sigma2))
        elif self.variance_mode == "inverse_gamma":
            mode = InverseGammaVariance(float(self.b1), float(self.b2))
        else:
            mode = MMLEPlugin()
        return PriorSpec.default(grid, self.zeta, self.lambda2, mode)

    def zb_table(self) -> ZbTable:
        kind = ImmersionKind.parse(self.kind).zb_kind
        beta = self.beta or (1,) * self.d
        try:
            tables = read_zb_tables(self.table) if self.table else None
            return find_table(kind, beta, tables)
        except (TableRangeError, OSError) as exc:
            raise ConfigError(f"no usable Z_B table: {exc}") from None


@dataclass
class StudyResult:
    rows: list[dict]
    credibility: dict[str, float]
    config: dict

    def to_dict(self) -> dict:
        return {"rows": self.rows, "credibility": self.credibility, "config": self.config}


def _methods(cfg: StudyConfig) -> list[tuple[str, float, float]]:
    """(method, level, credibility-or-critical-value) triples evaluated per replication."""
    out = []
    table = cfg.zb_table() if cfg.recalibrate else None
    for level in cfg.levels:
        out.append(("IB", level, 1.0 - level))
        if table is not None:
            out.append(("IB_adj", level, recalibrate_level(1.0 - level, table, cfg.sided)))
        if level in cfg.c_gamma:
            out.append(("DHZ", level, cfg.c_gamma[level]))
    return out


def replication(cfg: StudyConfig, index: int, methods) -> np.ndarray:
    """Hit indicator and interval length for every method of one replication."""
    rng = outer_rng(cfg.seed, index)
    data = generate_dataset(cfg.function, cfg.n, cfg.sigma, rng, cfg.d)
    grid = cfg.grid()
    prior = cfg.prior(grid)
    stats = compute_bin_stats(data, grid)
    params = fit_posterior(data, stats, prior)
    theta = sample_theta(params, cfg.draws, rng)
    lo, up = immersion_values(theta, stats, bin_index(cfg.x0, grid))
    kind = ImmersionKind.parse(cfg.kind)
    values = {ImmersionKind.LOWER: lo, ImmersionKind.UPPER: up}.get(kind, (lo + up) / 2.0)
    truth = true_value(cfg.function, cfg.x0)
    sided = Sided.parse(cfg.sided)

    out = np.empty((len(methods), 2))
    dhz = None
    for r, (method, level, c) in enumerate(methods):
        if method == "DHZ":
            if dhz is None:
                dhz = dhz_estimate(data, cfg.x0)
                sigma_hat = np.sqrt(sigma2_mmle(stats, prior, data))
            ci = dhz_interval(dhz, sigma_hat, c)
            a, b = ci.lower, ci.upper
        elif sided is Sided.TWO_SIDED:
            g = 1.0 - c
            a, b = np.quantile(values, [g / 2.0, 1.0 - g / 2.0])
        else:
            a, b = -np.inf, np.quantile(values, c)
        out[r] = (float(a <= truth <= b), b - a)
    return out


def _replication_block(indices, cfg, methods):
    return np.stack([replication(cfg, int(i), methods) for i in indices])


def coverage_study(cfg: StudyConfig) -> StudyResult:
    methods = _methods(cfg)
    parts = map_index_blocks(_replication_block, cfg.replications, cfg.workers, cfg, methods)
    res = np.concatenate(parts, axis=0)  # (replications, methods, 2)
    rows = []
    for r, (method, level, _) in enumerate(methods):
        hits, lengths = res[:, r, 0], res[:, r, 1]
        rows.append({
            "function": cfg.function,
            "n": cfg.n,
            "level": level,
            "method": method,
            "coverage_pct": 100.0 * float(hits.mean()),
            "mean_length": float(lengths.mean()),
            "sd_length": float(lengths.std(ddof=1)) if lengths.size > 1 else 0.0,
        })
    cred = {f"{m}@{lvl}": c for m, lvl, c in methods if m != "DHZ"}
    config = dataclasses.asdict(cfg)
    config.pop("workers")
    config["c_gamma"] = {str(k): v for k, v in cfg.c_gamma.items()}
    config["J_used"] = list(cfg.grid().J)
    return StudyResult(rows, cred, config)
