"""Sliced-Wasserstein discrepancy between original and imputed data (class C).

For every random direction r and half-partition p of the rows, both datasets
are projected onto the direction and scaled by the spread of the original
projections on the first half I_p. The baseline distance w(r, p) compares the
original I_p with the original J_p, and the imputed distance w_hat(r, p)
compares the original I_p with the imputed J_p. The two collections of
distances are then compared with the same 1-D statistics used feature-wise,
and the ratios w_hat / w measure how much imputation stretches the data.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional

import numpy as np

from .discrepancy import (KL_BINS, kl_divergence, ks_statistic, wasserstein2_1d,
                          wasserstein2_columns)
from .partition import HalfPartitionSet

SCALE_GUARD = 1e-12
RATIO_GUARD = 1e-12
DEFAULT_OUTLIER_THRESHOLDS = (1.5e-8, 1e-7)


@dataclass(frozen=True, eq=False)
class DirectionSet:
    vectors: np.ndarray  # (M, d), unit rows
    seed: int

    @property
    def m(self) -> int:
        return self.vectors.shape[0]


def default_n_directions(d: int) -> int:
    return max(d, 50)


def sample_unit_directions(d: int, m: Optional[int] = None, seed: int = 0) -> DirectionSet:
    """``m`` directions uniform on the unit sphere in R^d (normalised Gaussians)."""
    if m is None:
        m = default_n_directions(d)
    if d < 1:
        raise ValueError("d must be >= 1")
    if m < d:
        raise ValueError(f"need at least d={d} directions, got m={m}")
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((m, d))
    norms = np.linalg.norm(g, axis=1)
    # a zero draw has probability zero; redraw defensively
    while np.any(norms == 0):
        bad = norms == 0
        g[bad] = rng.standard_normal((int(bad.sum()), d))
        norms = np.linalg.norm(g, axis=1)
    v = g / norms[:, None]
    v.setflags(write=False)
    return DirectionSet(v, seed)


@dataclass(frozen=True, eq=False)
class SlicedResult:
    w: np.ndarray       # (M, P), NaN where skipped
    w_hat: np.ndarray   # (M, P), NaN where skipped
    skipped: dict = field(default_factory=dict)  # (r, p) -> reason
    config: dict = field(default_factory=dict)

    def valid(self) -> np.ndarray:
        ok = np.ones(self.w.shape, dtype=bool)
        for r, p in self.skipped:
            ok[r, p] = False
        return ok

    def rows(self) -> Iterable[tuple]:
        m, p = self.w.shape
        for r in range(m):
            for q in range(p):
                reason = self.skipped.get((r, q), "")
                yield r, q, self.w[r, q], self.w_hat[r, q], reason

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            out = csv.writer(fh, lineterminator="\n")
            out.writerow(["r", "p", "w", "w_hat", "skipped"])
            for r, q, w, wh, reason in self.rows():
                out.writerow([r, q, "" if reason else repr(float(w)),
                              "" if reason else repr(float(wh)), reason])


def _matrix(x) -> np.ndarray:
    return np.asarray(getattr(x, "values", x), dtype=float)


def sliced_distances(original, imputed, dirs: DirectionSet,
                     halves: HalfPartitionSet) -> SlicedResult:
    x = _matrix(original)
    xh = _matrix(imputed)
    if x.shape != xh.shape:
        raise ValueError(f"shape mismatch: original {x.shape}, imputed {xh.shape}")
    if dirs.vectors.shape[1] != x.shape[1]:
        raise ValueError(f"directions live in R^{dirs.vectors.shape[1]}, data in R^{x.shape[1]}")
    if halves.n != x.shape[0]:
        raise ValueError(f"half-partitions cover {halves.n} rows, data has {x.shape[0]}")
    if np.isnan(x).any() or np.isnan(xh).any():
        raise ValueError("sliced distances need complete data")

    proj = x @ dirs.vectors.T       # (N, M)
    proj_hat = xh @ dirs.vectors.T
    m, p = dirs.m, len(halves)
    w = np.full((m, p), np.nan)
    w_hat = np.full((m, p), np.nan)
    skipped = {}
    for q, (idx_i, idx_j) in enumerate(halves.pairs):
        base = proj[idx_i]
        s = base.std(axis=0)
        live = s >= SCALE_GUARD
        for r in np.flatnonzero(~live):
            skipped[(int(r), q)] = "constant projection"
        if not live.any():
            continue
        scale = s[live]
        ref = base[:, live] / scale
        w[live, q] = wasserstein2_columns(ref, proj[idx_j][:, live] / scale)
        w_hat[live, q] = wasserstein2_columns(ref, proj_hat[idx_j][:, live] / scale)
    w.setflags(write=False)
    w_hat.setflags(write=False)
    config = {"n_directions": m, "n_partitions": p,
              "direction_seed": dirs.seed, "partition_seed": halves.seed}
    return SlicedResult(w, w_hat, skipped, config)


@dataclass(frozen=True)
class ClassCStats:
    kl: float
    ks: float
    w2: float
    ratios: tuple[float, ...]
    ratio_median: float
    ratio_iqr: float
    n_guarded: int
    n_skipped: int

    def as_dict(self) -> dict:
        return {
            "kl": self.kl, "ks": self.ks, "w2": self.w2,
            "ratio_median": self.ratio_median, "ratio_iqr": self.ratio_iqr,
            "n_ratios": len(self.ratios), "n_guarded": self.n_guarded,
            "n_skipped": self.n_skipped,
        }


def class_c_stats(res: SlicedResult, bins: int = KL_BINS) -> ClassCStats:
    ok = res.valid()
    if ok.sum() < 2:
        raise ValueError("fewer than two usable (direction, partition) pairs")
    w = res.w[ok]
    wh = res.w_hat[ok]
    safe = w >= RATIO_GUARD
    ratios = wh[safe] / w[safe]
    if ratios.size:
        q1, med, q3 = np.percentile(ratios, [25, 50, 75])
    else:
        q1 = med = q3 = float("nan")
    return ClassCStats(
        kl=kl_divergence(w, wh, bins),
        ks=ks_statistic(w, wh),
        w2=wasserstein2_1d(w, wh),
        ratios=tuple(float(r) for r in ratios),
        ratio_median=float(med),
        ratio_iqr=float(q3 - q1),
        n_guarded=int((~safe).sum()),
        n_skipped=len(res.skipped),
    )


def outlier_proportions(distances: Mapping, thresholds: Iterable[float]) -> dict:
    """Fraction of (feature, repeat) distances strictly above each threshold."""
    vals = np.asarray(list(distances.values()), dtype=float)
    if vals.size == 0:
        raise ValueError("no distances given")
    return {float(t): float(np.mean(vals > t)) for t in thresholds}


def quantile_thresholds(distances: Mapping, quantiles: Iterable[float]) -> tuple[float, ...]:
    """Thresholds taken from the distances themselves, for data where fixed
    absolute cut-offs are meaningless."""
    vals = np.asarray(list(distances.values()), dtype=float)
    if vals.size == 0:
        raise ValueError("no distances given")
    qs = np.asarray(list(quantiles), dtype=float)
    if np.any((qs < 0) | (qs > 1)):
        raise ValueError("quantiles must lie in [0, 1]")
    return tuple(float(t) for t in np.quantile(vals, qs))
