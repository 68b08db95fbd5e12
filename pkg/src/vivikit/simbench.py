"""Friedman benchmark simulator.

Draws use numpy's PCG64 bit generator; Gaussian noise comes from
``Generator.standard_normal`` (numpy's ziggurat sampler), so a fixed seed
reproduces the same table on any platform with the same numpy major version.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .tabular import NUMERIC, Column, Table


@dataclass(frozen=True)
class SimConfig:
    n: int = 1000
    p: int = 10
    sd: float = 1.0
    correlated: bool = False
    seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.p < 5:
            raise ValueError("p must be >= 5")
        if self.sd < 0:
            raise ValueError("sd must be >= 0")


def friedman_response(X: np.ndarray) -> np.ndarray:
    """Noise-free response for rows of ``X`` (columns x1..x5 used)."""
    return (10.0 * np.sin(np.pi * X[:, 0] * X[:, 1])
            + 20.0 * (X[:, 2] - 0.5) ** 2
            + 10.0 * X[:, 3]
            + 5.0 * X[:, 4])


def friedman(cfg: SimConfig) -> Table:
    """Simulate ``cfg.n`` rows with predictors ``x1..xp`` and response ``y``.

    In correlated mode x5 is replaced by ``0.3 * x5 + 0.7 * x4`` before the
    response is computed.
    """
    rng = np.random.default_rng(cfg.seed)
    X = rng.uniform(0.0, 1.0, size=(cfg.n, cfg.p))
    eps = rng.standard_normal(cfg.n)
    if cfg.correlated:
        X[:, 4] = 0.3 * X[:, 4] + 0.7 * X[:, 3]
    y = friedman_response(X) + cfg.sd * eps
    cols = [Column(f"x{j + 1}", NUMERIC, X[:, j]) for j in range(cfg.p)]
    cols.append(Column("y", NUMERIC, y))
    return Table(tuple(cols), "y")
