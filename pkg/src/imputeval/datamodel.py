"""Tabular dataset representation, schema handling and normalisation.

Missing cells are NaN in memory and empty strings on disk. Categorical
features are one-hot encoded on load; the encoded columns of one original
feature share a group id so they can be post-processed together.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

logger = logging.getLogger(__name__)

KINDS = ("numeric", "binary", "ordinal", "categorical")


class SchemaError(ValueError):
    """Raised when a data file does not agree with its schema."""


@dataclass(frozen=True)
class Feature:
    name: str
    kind: str = "numeric"
    levels: Optional[tuple[str, ...]] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SchemaError(f"unknown kind {self.kind!r} for feature {self.name!r}")
        if self.levels is not None:
            object.__setattr__(self, "levels", tuple(str(v) for v in self.levels))
        if self.kind == "categorical" and (self.levels is None or len(self.levels) < 2):
            raise SchemaError(f"categorical feature {self.name!r} needs at least 2 levels")
        if self.kind == "binary" and self.levels is not None and len(self.levels) != 2:
            raise SchemaError(f"binary feature {self.name!r} must have exactly 2 levels")
        if self.levels is not None and len(set(self.levels)) != len(self.levels):
            raise SchemaError(f"duplicate levels in feature {self.name!r}")


@dataclass(frozen=True)
class FeatureSchema:
    features: tuple[Feature, ...]

    def __post_init__(self):
        object.__setattr__(self, "features", tuple(self.features))
        names = [f.name for f in self.features]
        if len(set(names)) != len(names):
            raise SchemaError("feature names must be unique")

    @property
    def names(self) -> list[str]:
        return [f.name for f in self.features]

    @classmethod
    def numeric(cls, names: Sequence[str]) -> "FeatureSchema":
        return cls(tuple(Feature(n) for n in names))

    @classmethod
    def from_json(cls, obj) -> "FeatureSchema":
        if not isinstance(obj, list):
            raise SchemaError("schema JSON must be an array of feature objects")
        feats = []
        for entry in obj:
            levels = entry.get("levels")
            feats.append(Feature(entry["name"], entry.get("kind", "numeric"),
                                 tuple(levels) if levels is not None else None))
        return cls(tuple(feats))

    def to_json(self) -> list[dict]:
        out = []
        for f in self.features:
            entry = {"name": f.name, "kind": f.kind}
            if f.levels is not None:
                entry["levels"] = list(f.levels)
            out.append(entry)
        return out

    def encoded_columns(self) -> tuple["Column", ...]:
        cols = []
        for gid, f in enumerate(self.features):
            if f.kind == "categorical":
                for level in f.levels:
                    cols.append(Column(f"{f.name}={level}", f.kind, gid, level))
            else:
                cols.append(Column(f.name, f.kind, gid))
        return tuple(cols)


@dataclass(frozen=True)
class Column:
    """One encoded column. One-hot siblings share ``group``."""

    name: str
    kind: str
    group: int
    level: Optional[str] = None


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Dataset:
    """N x d value matrix (NaN = missing), its schema and optional 0/1 labels."""

    values: np.ndarray
    schema: FeatureSchema
    labels: Optional[np.ndarray] = None
    columns: tuple[Column, ...] = field(init=False)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2:
            raise ValueError(f"values must be 2-D, got shape {values.shape}")
        cols = self.schema.encoded_columns()
        if values.shape[1] != len(cols):
            raise SchemaError(
                f"value matrix has {values.shape[1]} columns, schema encodes {len(cols)}")
        object.__setattr__(self, "values", _readonly(values))
        object.__setattr__(self, "columns", cols)
        if self.labels is not None:
            labels = np.asarray(self.labels)
            if labels.shape != (values.shape[0],):
                raise SchemaError("labels must have one entry per row")
            if not np.all(np.isin(labels, (0, 1))):
                raise SchemaError("labels must be 0/1")
            labels = labels.astype(np.int64)
            labels.setflags(write=False)
            object.__setattr__(self, "labels", labels)

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    @property
    def missing(self) -> np.ndarray:
        return np.isnan(self.values)

    @property
    def has_missing(self) -> bool:
        return bool(np.isnan(self.values).any())

    def with_values(self, values: np.ndarray) -> "Dataset":
        return Dataset(values, self.schema, self.labels)

    def take(self, rows) -> "Dataset":
        rows = np.asarray(rows, dtype=np.int64)
        labels = None if self.labels is None else self.labels[rows]
        return Dataset(self.values[rows], self.schema, labels)

    def masked(self, mask: np.ndarray) -> "Dataset":
        """Copy with the cells flagged in ``mask`` set to missing."""
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != self.shape:
            raise ValueError(f"mask shape {mask.shape} != dataset shape {self.shape}")
        v = self.values.copy()
        v[mask] = np.nan
        return self.with_values(v)

    def groups(self) -> dict[int, list[int]]:
        out: dict[int, list[int]] = {}
        for j, c in enumerate(self.columns):
            out.setdefault(c.group, []).append(j)
        return out


# ---------------------------------------------------------------- CSV I/O

def _parse_cell(raw: str, feat: Feature, row: int) -> list[float]:
    raw = raw.strip()
    if feat.kind == "categorical":
        if raw == "":
            return [math.nan] * len(feat.levels)
        if raw not in feat.levels:
            raise SchemaError(f"unknown categorical level {raw!r} in column {feat.name!r} (row {row})")
        return [1.0 if lv == raw else 0.0 for lv in feat.levels]
    if raw == "":
        return [math.nan]
    if feat.levels is not None and raw in feat.levels:
        return [float(feat.levels.index(raw))]
    try:
        x = float(raw)
    except ValueError:
        raise SchemaError(f"non-numeric cell {raw!r} in column {feat.name!r} (row {row})") from None
    if not math.isfinite(x):
        raise SchemaError(f"non-finite cell {raw!r} in column {feat.name!r} (row {row})")
    if feat.kind == "binary" and x not in (0.0, 1.0):
        raise SchemaError(f"binary column {feat.name!r} has value {raw!r} (row {row})")
    return [x]


def load_schema(path) -> FeatureSchema:
    with open(path, encoding="utf-8") as fh:
        return FeatureSchema.from_json(json.load(fh))


def load_dataset(data_path, schema_path=None, label: Optional[str] = None,
                 schema: Optional[FeatureSchema] = None) -> Dataset:
    """Read a CSV file into a :class:`Dataset`.

    The label column (if named) is pulled out of the value matrix and must be
    fully observed. Every other header column must appear in the schema, in
    any order; the schema order defines the column order of the result.
    """
    if schema is None:
        if schema_path is None:
            raise ValueError("either schema_path or schema is required")
        schema = load_schema(schema_path)
    with open(data_path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise SchemaError(f"{data_path}: empty file") from None
        rows = [r for r in reader if r]

    feature_cols = [h for h in header if h != label]
    if label is not None and label not in header:
        raise SchemaError(f"schema mismatch: label column {label!r} not in header")
    if sorted(feature_cols) != sorted(schema.names) or len(set(feature_cols)) != len(feature_cols):
        extra = sorted(set(feature_cols) - set(schema.names))
        absent = sorted(set(schema.names) - set(feature_cols))
        raise SchemaError(f"schema mismatch: not in schema {extra}, not in data {absent}")

    pos = {h: i for i, h in enumerate(header)}
    values = []
    labels = []
    for i, r in enumerate(rows, start=1):
        if len(r) != len(header):
            raise SchemaError(f"{data_path}: row {i} has {len(r)} cells, header has {len(header)}")
        enc = []
        for feat in schema.features:
            enc.extend(_parse_cell(r[pos[feat.name]], feat, i))
        values.append(enc)
        if label is not None:
            raw = r[pos[label]].strip()
            if raw not in ("0", "1", "0.0", "1.0"):
                raise SchemaError(f"label {raw!r} on row {i} is not 0/1")
            labels.append(int(float(raw)))
    ncol = len(schema.encoded_columns())
    arr = np.array(values, dtype=float).reshape(len(values), ncol)
    return Dataset(arr, schema, np.array(labels, dtype=np.int64) if label is not None else None)


def _format_value(x: float, feat: Feature) -> str:
    if math.isnan(x):
        return ""
    if feat.kind in ("binary", "ordinal") and feat.levels is not None:
        return feat.levels[int(round(x))]
    if feat.kind in ("binary", "ordinal") and float(x).is_integer():
        return str(int(x))
    return repr(float(x))


def decode_rows(ds: Dataset) -> list[list[str]]:
    """Turn encoded values back into CSV cells (level names for categoricals)."""
    out = []
    groups = ds.groups()
    for row in ds.values:
        cells = []
        for gid, feat in enumerate(ds.schema.features):
            idx = groups[gid]
            if feat.kind == "categorical":
                block = row[idx]
                if np.isnan(block).any():
                    cells.append("")
                else:
                    cells.append(feat.levels[int(np.argmax(block))])
            else:
                cells.append(_format_value(row[idx[0]], feat))
        out.append(cells)
    return out


def save_dataset(ds: Dataset, path, label: Optional[str] = None) -> None:
    header = list(ds.schema.names)
    if label is not None and ds.labels is not None:
        header.append(label)
    rows = decode_rows(ds)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for i, cells in enumerate(rows):
            if label is not None and ds.labels is not None:
                cells = cells + [str(int(ds.labels[i]))]
            w.writerow(cells)


def save_schema(schema: FeatureSchema, path) -> None:
    Path(path).write_text(json.dumps(schema.to_json(), indent=2) + "\n", encoding="utf-8")


# ---------------------------------------------------------------- normalisation

@dataclass(frozen=True, eq=False)
class Normalizer:
    means: np.ndarray
    sds: np.ndarray
    degenerate: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "means", _readonly(self.means))
        object.__setattr__(self, "sds", _readonly(self.sds))


def fit_normalizer(ds: Dataset, rows=None) -> Normalizer:
    """Per-column mean and population sd over the observed cells of ``rows``.

    Columns with zero spread get sd 1 and are listed in ``degenerate``.
    """
    v = ds.values if rows is None else ds.values[np.asarray(rows, dtype=np.int64)]
    if v.shape[0] == 0:
        raise ValueError("cannot fit a normaliser on zero rows")
    obs = ~np.isnan(v)
    counts = obs.sum(axis=0)
    empty = np.flatnonzero(counts == 0)
    if empty.size:
        names = [ds.columns[j].name for j in empty]
        raise ValueError(f"no observed cells in column(s) {names}")
    filled = np.where(obs, v, 0.0)
    means = filled.sum(axis=0) / counts
    dev = np.where(obs, v - means, 0.0)
    sds = np.sqrt((dev ** 2).sum(axis=0) / counts)
    degenerate = tuple(int(j) for j in np.flatnonzero(sds == 0))
    if degenerate:
        logger.warning("zero-variance column(s) %s: sd replaced by 1",
                       [ds.columns[j].name for j in degenerate])
        sds = sds.copy()
        sds[list(degenerate)] = 1.0
    return Normalizer(means, sds, degenerate)


def _check_width(ds: Dataset, nz: Normalizer):
    if ds.shape[1] != nz.means.shape[0]:
        raise ValueError(f"dataset has {ds.shape[1]} columns, normaliser {nz.means.shape[0]}")


def apply_normalizer(ds: Dataset, nz: Normalizer) -> Dataset:
    _check_width(ds, nz)
    return ds.with_values((ds.values - nz.means) / nz.sds)


def invert_normalizer(ds: Dataset, nz: Normalizer) -> Dataset:
    _check_width(ds, nz)
    return ds.with_values(ds.values * nz.sds + nz.means)


# ---------------------------------------------------------------- post-processing

def postprocess_imputed(ds: Dataset, mask: Optional[np.ndarray] = None) -> Dataset:
    """Snap imputed values back onto each column's valid support.

    One-hot groups become a single 1 at the argmax (lowest index wins ties),
    binary columns are thresholded with 0.5 mapping to 0, and ordinal columns
    are rounded half-up and clamped to their level range. If ``mask`` (True =
    imputed) is given, observed cells are pinned: an observed 1 in a group
    wins outright and observed 0s are never chosen.
    """
    if ds.has_missing:
        raise ValueError("postprocess_imputed needs complete data")
    v = ds.values.copy()
    observed = None if mask is None else ~np.asarray(mask, dtype=bool)
    for gid, idx in ds.groups().items():
        feat = ds.schema.features[gid]
        if feat.kind == "categorical":
            block = v[:, idx]
            score = block.copy()
            if observed is not None:
                obs = observed[:, idx]
                score[obs & (block == 1.0)] = np.inf
                score[obs & (block != 1.0)] = -np.inf
                # fully observed groups are left as they are
                keep = obs.all(axis=1)
            else:
                keep = np.zeros(len(block), dtype=bool)
            hot = np.argmax(score, axis=1)
            onehot = np.zeros_like(block)
            onehot[np.arange(len(block)), hot] = 1.0
            block[~keep] = onehot[~keep]
            v[:, idx] = block
        elif feat.kind == "binary":
            j = idx[0]
            v[:, j] = (v[:, j] > 0.5).astype(float)
        elif feat.kind == "ordinal":
            j = idx[0]
            r = np.floor(v[:, j] + 0.5)
            if feat.levels is not None:
                r = np.clip(r, 0, len(feat.levels) - 1)
            v[:, j] = r
    if observed is not None:
        v[observed] = ds.values[observed]
    return ds.with_values(v)
