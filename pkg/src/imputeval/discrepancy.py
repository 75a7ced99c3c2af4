"""Sample-wise (class A) and feature-wise (class B) imputation discrepancy.

The feature-wise statistics compare, for one column, the true values of the
masked cells with the values imputed for them, using three exact 1-D
two-sample kernels: histogram KL divergence, the KS statistic and the
2-Wasserstein distance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

KL_BINS = 50
KL_EPS = 1e-10


def _sample(x, name: str) -> np.ndarray:
    x = np.asarray(x, dtype=float).ravel()
    if x.size == 0:
        raise ValueError(f"{name} is an empty sample")
    if not np.all(np.isfinite(x)):
        raise ValueError(f"{name} contains non-finite values")
    return x


def wasserstein2_1d(a, b) -> float:
    """2-Wasserstein distance between two empirical distributions on the line.

    Computed as the L2 distance between the two quantile functions. Both are
    step functions, so the integral is a finite sum over the merged grid of
    breakpoints ``i/n`` and ``j/m``; the grid is built in integer units of
    ``1/lcm(n, m)`` so no breakpoint is lost to rounding.
    """
    a = _sample(a, "a")
    b = _sample(b, "b")
    return float(wasserstein2_columns(a[:, None], b[:, None])[0])


def _quantile_grid(n: int, m: int):
    total = math.lcm(n, m)
    qa = np.arange(1, n + 1, dtype=np.int64) * (total // n)
    qb = np.arange(1, m + 1, dtype=np.int64) * (total // m)
    ends = np.union1d(qa, qb)
    widths = np.diff(ends, prepend=0) / total
    return (widths, np.searchsorted(qa, ends, side="left"),
            np.searchsorted(qb, ends, side="left"))


def wasserstein2_columns(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Column-wise :func:`wasserstein2_1d` for (n, k) and (m, k) arrays."""
    a = np.sort(a, axis=0)
    b = np.sort(b, axis=0)
    n, m = a.shape[0], b.shape[0]
    if n == m:
        return np.sqrt(np.mean((a - b) ** 2, axis=0))
    widths, ia, ib = _quantile_grid(n, m)
    return np.sqrt(widths @ (a[ia] - b[ib]) ** 2)


def ks_statistic(a, b) -> float:
    """Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|."""
    a = np.sort(_sample(a, "a"))
    b = np.sort(_sample(b, "b"))
    pooled = np.concatenate([a, b])
    fa = np.searchsorted(a, pooled, side="right") / a.size
    fb = np.searchsorted(b, pooled, side="right") / b.size
    return float(np.max(np.abs(fa - fb)))


def kl_divergence(a, b, bins: int = KL_BINS, eps: float = KL_EPS) -> float:
    """KL(P_a || P_b) between equal-width histograms on the pooled range.

    Every bin gets ``eps`` added before renormalising so empty bins in ``b``
    stay finite. Returns 0 when all pooled values coincide.
    """
    if bins < 2:
        raise ValueError("bins must be >= 2")
    a = _sample(a, "a")
    b = _sample(b, "b")
    lo = min(a.min(), b.min())
    hi = max(a.max(), b.max())
    if hi == lo:
        return 0.0
    ha, _ = np.histogram(a, bins=bins, range=(lo, hi))
    hb, _ = np.histogram(b, bins=bins, range=(lo, hi))
    p = ha / a.size + eps
    q = hb / b.size + eps
    p /= p.sum()
    q /= q.sum()
    return max(float(np.sum(p * np.log(p / q))), 0.0)


# ---------------------------------------------------------------- class A

@dataclass(frozen=True)
class SampleStats:
    rmse: float
    mae: float
    r2: Optional[float]  # None when the true masked values are constant

    def as_dict(self) -> dict:
        return {"rmse": self.rmse, "mae": self.mae, "r2": self.r2}


def _masked_pair(truth, imputed, mask):
    t = np.asarray(getattr(truth, "values", truth), dtype=float)
    x = np.asarray(getattr(imputed, "values", imputed), dtype=float)
    mask = np.asarray(mask, dtype=bool)
    if t.shape != x.shape or t.shape != mask.shape:
        raise ValueError(f"shape mismatch: truth {t.shape}, imputed {x.shape}, mask {mask.shape}")
    if not mask.any():
        raise ValueError("no masked cells to compare")
    return t, x, mask


def sample_stats(truth, imputed, mask) -> SampleStats:
    """RMSE, MAE and R^2 over the masked cells (inputs already normalised)."""
    t, x, mask = _masked_pair(truth, imputed, mask)
    tv, xv = t[mask], x[mask]
    if np.isnan(xv).any():
        raise ValueError("imputed data still has missing masked cells")
    err = xv - tv
    sse = float(np.sum(err ** 2))
    rmse = math.sqrt(sse / err.size)
    mae = float(np.mean(np.abs(err)))
    sst = float(np.sum((tv - tv.mean()) ** 2))
    r2 = None if sst == 0 else 1.0 - sse / sst
    return SampleStats(rmse, mae, r2)


# ---------------------------------------------------------------- class B

FEATURE_METRICS = ("kl", "ks", "w2")


def _summary(values: list[float]) -> dict:
    s = sorted(values)
    return {"min": s[0], "median": s[(len(s) - 1) // 2], "max": s[-1]}


@dataclass(frozen=True)
class FeatureStats:
    per_feature: dict  # column index -> {"kl", "ks", "w2"}
    summary: dict      # metric -> {"min", "median", "max"}

    def as_dict(self) -> dict:
        return {
            "per_feature": {str(j): v for j, v in self.per_feature.items()},
            "summary": self.summary,
        }


def feature_stats(truth, imputed, mask, bins: int = KL_BINS) -> FeatureStats:
    """Per-column KL (true || imputed), KS and W2 over masked cells.

    Columns without masked cells are left out. Summaries take min, lower
    median and max across the remaining columns.
    """
    t, x, mask = _masked_pair(truth, imputed, mask)
    per = {}
    for j in range(t.shape[1]):
        rows = mask[:, j]
        if not rows.any():
            continue
        tv, xv = t[rows, j], x[rows, j]
        per[j] = {
            "kl": kl_divergence(tv, xv, bins),
            "ks": ks_statistic(tv, xv),
            "w2": wasserstein2_1d(tv, xv),
        }
    summary = {m: _summary([v[m] for v in per.values()]) for m in FEATURE_METRICS}
    return FeatureStats(per, summary)
