"""Bayesian multivariate isotonic regression by immersion of a conjugate step-function posterior."""

from .datasets import generate_dataset, true_value
from .dhz import dhz_estimate, dhz_interval
from .errors import ConfigError, DataError, StateError, TableRangeError
from .grid import BinStats, GridSpec, RegressionDataset, compute_bin_stats
from .immersion import ImmersionKind, immersion_values, isotonize_surface
from .intervals import (CredibleInterval, Sided, ZbTable, coverage_of_level, credible_interval,
                        find_table, immersion_draws_at, recalibrate_level)
from .posterior import FixedVariance, InverseGammaVariance, MMLEPlugin, PriorSpec, fit_posterior
from .study import StudyConfig, StudyResult, coverage_study

__version__ = "0.1.0"

__all__ = [
    "BinStats",
    "ConfigError",
    "CredibleInterval",
    "DataError",
    "FixedVariance",
    "GridSpec",
    "ImmersionKind",
    "InverseGammaVariance",
    "MMLEPlugin",
    "PriorSpec",
    "RegressionDataset",
    "Sided",
    "StudyConfig",
    "StudyResult",
    "StateError",
    "TableRangeError",
    "ZbTable",
    "compute_bin_stats",
    "coverage_of_level",
    "coverage_study",
    "credible_interval",
    "dhz_estimate",
    "dhz_interval",
    "find_table",
    "fit_posterior",
    "generate_dataset",
    "immersion_draws_at",
    "immersion_values",
    "isotonize_surface",
    "recalibrate_level",
    "true_value",
]
