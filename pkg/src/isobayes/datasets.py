"""Test regression functions on the unit square and synthetic data."""

from __future__ import annotations

import numpy as np

from .errors import ConfigError
from .grid import RegressionDataset

__all__ = ["FUNCTIONS", "true_value", "generate_dataset"]

FUNCTIONS = {
    "f1": lambda x: (x[:, 0] + x[:, 1]) ** 2,
    "f2": lambda x: np.sqrt(x[:, 0] + x[:, 1]),
    "f3": lambda x: x[:, 0] * x[:, 1],
    "f4": lambda x: np.exp(x[:, 0] + x[:, 1]),
    "f5": lambda x: np.exp(x[:, 0] * x[:, 1]),
}


def _function(function_id: str):
    try:
        return FUNCTIONS[function_id]
    except KeyError:
        raise ConfigError(
            f"unknown regression function {function_id!r}; choose one of {sorted(FUNCTIONS)}"
        ) from None


def true_value(function_id: str, x0) -> float:
    x0 = np.asarray(x0, dtype=float).reshape(1, -1)
    return float(_function(function_id)(x0)[0])


def generate_dataset(function_id: str, n: int, sigma: float, rng: np.random.Generator,
                     d: int = 2) -> RegressionDataset:
    """``n`` points with uniform covariates and ``y = f(x) + sigma * N(0, 1)``."""
    f = _function(function_id)
    if d != 2:
        raise ConfigError("the built-in regression functions are defined for d = 2")
    if n < 1 or sigma < 0:
        raise ConfigError("need n >= 1 and sigma >= 0")
    x = rng.random((n, d))
    eps = rng.standard_normal(n)
    return RegressionDataset(x, f(x) + sigma * eps)
