"""MCAR mask generation with an exact number of removed cells."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .datamodel import Dataset


@dataclass(frozen=True)
class MissingnessSpec:
    rate: float
    seed: int = 0
    per_column: bool = False

    def __post_init__(self):
        if not 0.0 <= self.rate <= 1.0:
            raise ValueError(f"rate must be in [0, 1], got {self.rate}")


def n_masked(n_cells: int, rate: float) -> int:
    # round half to even, like Python's round()
    return int(round(rate * n_cells))


def induce_mcar(ds: Dataset, spec: MissingnessSpec) -> np.ndarray:
    """Boolean mask with exactly ``round(rate * N * d)`` cells set.

    Cells are chosen uniformly without replacement over the whole matrix. With
    ``per_column=True`` each column instead loses ``round(rate * N)`` cells.
    The dataset must be complete, since the mask is the ground truth of what
    was removed.
    """
    if ds.has_missing:
        raise ValueError("dataset already has missing cells; cannot induce missingness "
                         "without ground truth")
    n, d = ds.shape
    rng = np.random.default_rng(spec.seed)
    mask = np.zeros((n, d), dtype=bool)
    if spec.per_column:
        k = n_masked(n, spec.rate)
        for j in range(d):
            mask[rng.choice(n, size=k, replace=False), j] = True
    else:
        k = n_masked(n * d, spec.rate)
        flat = rng.choice(n * d, size=k, replace=False)
        mask.reshape(-1)[flat] = True
    return mask


def save_mask(mask: np.ndarray, path, header=None) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if header is not None:
            w.writerow(header)
        for row in np.asarray(mask, dtype=bool):
            w.writerow(["1" if m else "0" for m in row])


def load_mask(path, has_header: bool = True) -> np.ndarray:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if has_header:
        rows = rows[1:]
    rows = [r for r in rows if r]
    bad = {c for r in rows for c in r} - {"0", "1"}
    if bad:
        raise ValueError(f"{path}: mask cells must be 0/1, found {sorted(bad)}")
    return np.array([[c == "1" for c in r] for r in rows], dtype=bool).reshape(len(rows), -1)
