"""Simulated classification data: Gaussian clusters on hypercube vertices."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .datamodel import Dataset, FeatureSchema


@dataclass(frozen=True)
class SynthConfig:
    n_samples: int = 1000
    n_features: int = 25
    class_sep: float = 1.0
    seed: int = 0
    labeling: str = "majority"

    def __post_init__(self):
        if self.n_samples < 0:
            raise ValueError("n_samples must be >= 0")
        if self.n_features < 1:
            raise ValueError("n_features must be >= 1")
        if self.class_sep < 0:
            raise ValueError("class_sep must be >= 0")
        if self.labeling not in ("majority", "parity"):
            raise ValueError(f"unknown labeling {self.labeling!r}")


def generate_classification(cfg: SynthConfig) -> Dataset:
    """Draw ``n_samples`` points around uniformly chosen vertices of
    ``{-sep, +sep}^d`` with identity covariance.

    With the default ``labeling="majority"`` a point is positive when most of
    its vertex coordinates are positive (a fair coin decides exact ties), so
    every feature carries the same share of a linearly learnable signal.
    ``labeling="parity"`` uses the parity of the positive coordinates
    instead, which no linear model can learn once d > 1.
    """
    rng = np.random.default_rng(cfg.seed)
    n, d = cfg.n_samples, cfg.n_features
    signs = rng.integers(0, 2, size=(n, d))
    centres = np.where(signs == 1, cfg.class_sep, -cfg.class_sep)
    x = centres + rng.standard_normal((n, d))
    ups = signs.sum(axis=1)
    if cfg.labeling == "parity":
        labels = ups % 2
    else:
        coin = rng.integers(0, 2, size=n)
        labels = np.where(2 * ups == d, coin, (2 * ups > d).astype(np.int64))
    schema = FeatureSchema.numeric([f"x{j}" for j in range(d)])
    return Dataset(x, schema, labels)
