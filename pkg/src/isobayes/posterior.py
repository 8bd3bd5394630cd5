"""Conjugate Gaussian posterior for the step heights of a piecewise-constant fit.

Each cell height gets an independent ``N(zeta_j, sigma^2 * lambda2_j)`` prior.
Given ``sigma^2`` the posterior factorises over cells.  The error variance is
either fixed, replaced by its marginal maximum likelihood estimate, or given an
Inverse-Gamma prior.

Inverse-Gamma convention: ``IG(shape, scale)`` has density proportional to
``x**-(shape + 1) * exp(-scale / x)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .grid import BinStats, GridSpec, RegressionDataset, bin_indices

__all__ = [
    "FixedVariance",
    "MMLEPlugin",
    "InverseGammaVariance",
    "PriorSpec",
    "PosteriorParams",
    "SIGMA2_FLOOR",
    "sigma2_mmle",
    "sigma2_posterior_params",
    "posterior_params",
    "fit_posterior",
    "sample_theta",
]

SIGMA2_FLOOR = 1e-12
DEFAULT_LAMBDA2 = 1000.0


@dataclass(frozen=True)
class FixedVariance:
    sigma2: float

    def __post_init__(self):
        if not self.sigma2 >= 0:
            raise ValueError("fixed variance must be nonnegative")


@dataclass(frozen=True)
class MMLEPlugin:
    pass


@dataclass(frozen=True)
class InverseGammaVariance:
    b1: float
    b2: float

    def __post_init__(self):
        if not (self.b1 > 0 and self.b2 > 0):
            raise ValueError("Inverse-Gamma hyperparameters must be positive")


VarianceMode = Union[FixedVariance, MMLEPlugin, InverseGammaVariance]


@dataclass(frozen=True)
class PriorSpec:
    """Per-cell prior means and variance multipliers.

    ``lambda2 = inf`` is accepted and means a flat prior on that cell.
    """

    zeta: np.ndarray
    lambda2: np.ndarray
    variance_mode: VarianceMode = MMLEPlugin()

    def __post_init__(self):
        zeta = np.asarray(self.zeta, dtype=float)
        lam = np.asarray(self.lambda2, dtype=float)
        if zeta.shape != lam.shape:
            raise ValueError(f"zeta {zeta.shape} and lambda2 {lam.shape} differ in shape")
        if not np.all(np.isfinite(zeta)):
            raise ValueError("prior means must be finite")
        if not np.all(lam > 0):
            raise ValueError("prior variance multipliers must be positive")
        object.__setattr__(self, "zeta", zeta)
        object.__setattr__(self, "lambda2", lam)

    @classmethod
    def default(cls, grid: GridSpec, zeta: float = 0.0, lambda2: float = DEFAULT_LAMBDA2,
                variance_mode: VarianceMode = MMLEPlugin()) -> "PriorSpec":
        return cls(np.full(grid.shape, float(zeta)), np.full(grid.shape, float(lambda2)),
                   variance_mode)

    @property
    def precision(self) -> np.ndarray:
        """``lambda_j^-2``, zero for flat cells."""
        return 1.0 / self.lambda2


def _check_shapes(stats: BinStats, prior: PriorSpec):
    if prior.zeta.shape != stats.grid.shape:
        raise ValueError(f"prior shape {prior.zeta.shape} does not match grid {stats.grid.shape}")


def sigma2_mmle(stats: BinStats, prior: PriorSpec, data: RegressionDataset) -> float:
    """Marginal maximum likelihood estimate of the error variance.

    Evaluated as within-bin sum of squares plus a shrinkage term,
    ``sum_j N_j (Ybar_j - zeta_j)^2 * p_j / (N_j + p_j)`` with ``p_j = lambda_j^-2``,
    which is algebraically the usual expression but cannot go negative.
    """
    _check_shapes(stats, prior)
    if data.n == 0:
        raise ValueError("cannot estimate the error variance from an empty dataset")
    idx = tuple(bin_indices(data.x, stats.grid).T)
    counts = stats.counts
    means = np.where(counts > 0, stats.sums / np.maximum(counts, 1), 0.0)
    within = float(np.sum((data.y - means[idx]) ** 2))
    p = prior.precision
    occupied = counts > 0
    N, p = counts[occupied], p[occupied]
    shrink = N * (means[occupied] - prior.zeta[occupied]) ** 2 * p / (N + p)
    total = within + float(np.sum(shrink))
    return max(total / data.n, SIGMA2_FLOOR)


def sigma2_posterior_params(b1: float, b2: float, n: int, sigma2_hat: float) -> tuple[float, float]:
    """Shape and scale of the Inverse-Gamma posterior of ``sigma^2``."""
    if not (b1 > 0 and b2 > 0):
        raise ValueError("Inverse-Gamma hyperparameters must be positive")
    if n < 0 or sigma2_hat < 0:
        raise ValueError("n and sigma2_hat must be nonnegative")
    return b1 + n / 2.0, b2 + n * sigma2_hat / 2.0


@dataclass(frozen=True)
class PosteriorParams:
    """Per-cell Gaussian posterior; variance is ``sigma^2 * var_scale``.

    ``sigma2`` holds the plug-in value, or None when ``sigma^2`` is drawn from
    ``IG(ig_shape, ig_scale)`` once per posterior draw.
    """

    mean: np.ndarray
    var_scale: np.ndarray
    sigma2: float | None = None
    ig_shape: float | None = None
    ig_scale: float | None = None

    def draw_sigma2(self, rng: np.random.Generator, size: int) -> np.ndarray:
        if self.sigma2 is not None:
            return np.full(size, self.sigma2)
        return self.ig_scale / rng.gamma(self.ig_shape, 1.0, size=size)


def posterior_params(stats: BinStats, prior: PriorSpec, sigma2: float | None = None,
                     ig: tuple[float, float] | None = None) -> PosteriorParams:
    """Posterior means and variance scales given a ``sigma^2`` rule.

    Pass either a plug-in ``sigma2`` or ``ig=(shape, scale)`` for per-draw
    Inverse-Gamma sampling.
    """
    _check_shapes(stats, prior)
    if (sigma2 is None) == (ig is None):
        raise ValueError("give exactly one of sigma2 or ig")
    N = stats.counts.astype(float)
    p = prior.precision
    denom = N + p
    mean = np.where(N > 0, (stats.sums + prior.zeta * p) / np.where(denom > 0, denom, 1.0),
                    prior.zeta)
    var_scale = np.where(N > 0, 1.0 / np.where(denom > 0, denom, 1.0), prior.lambda2)
    if ig is not None:
        return PosteriorParams(mean, var_scale, None, float(ig[0]), float(ig[1]))
    return PosteriorParams(mean, var_scale, float(sigma2))


def fit_posterior(data: RegressionDataset, stats: BinStats, prior: PriorSpec) -> PosteriorParams:
    """Resolve the prior's variance mode and return posterior parameters."""
    mode = prior.variance_mode
    if isinstance(mode, FixedVariance):
        return posterior_params(stats, prior, sigma2=mode.sigma2)
    s2 = sigma2_mmle(stats, prior, data)
    if isinstance(mode, MMLEPlugin):
        return posterior_params(stats, prior, sigma2=s2)
    return posterior_params(stats, prior, ig=sigma2_posterior_params(mode.b1, mode.b2, data.n, s2))


def sample_theta(params: PosteriorParams, n_draws: int, rng: np.random.Generator) -> np.ndarray:
    """``(n_draws,) + grid shape`` array of independent posterior draws."""
    if n_draws < 1:
        raise ValueError("n_draws must be at least 1")
    s2 = params.draw_sigma2(rng, n_draws)
    z = rng.standard_normal((n_draws,) + params.mean.shape)
    sd = np.sqrt(s2.reshape((-1,) + (1,) * params.mean.ndim) * params.var_scale)
    return params.mean + sd * z
