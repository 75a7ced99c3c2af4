"""Benchmark orchestration: split, mask, impute, score, classify, correlate.

The grid is (holdout, imputer, repeat, train rate, test rate); each unit of
work covers the five validation folds of one holdout. Inside a fold the
imputer is fitted on the training rows of the development set and applied to
the training, validation and holdout rows. Quality statistics compare the
imputed holdout with its ground truth; the classifier is trained on the
imputed training rows, its iteration budget is chosen on the validation
folds, and holdout predictions are pooled across repeats.

Every random stream is seeded from a stable hash of the master seed and a
canonical key, so results do not depend on execution order or worker count.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import math
import os
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
from scipy.stats import rankdata

from . import __version__
from .datamodel import (Dataset, apply_normalizer, fit_normalizer, load_dataset,
                        postprocess_imputed)
from .discrepancy import KL_BINS, feature_stats, sample_stats
from .downstream import (MAX_ITER_GRID, auc, classification_metrics, pick_candidate,
                         pool_predictions, predict_proba, train_logreg_path)
from .imputers import MiceConfig, impute_mean, mice_fit_impute
from .missingness import MissingnessSpec, induce_mcar
from .partition import make_half_partitions, make_split_plan
from .sliced import (DEFAULT_OUTLIER_THRESHOLDS, class_c_stats, default_n_directions,
                     outlier_proportions, sample_unit_directions, sliced_distances)
from .synth import SynthConfig, generate_classification

logger = logging.getLogger(__name__)

IMPUTERS = ("identity", "mean", "mice")
DETERMINISTIC = ("identity", "mean")
NATURAL = "natural"

# the nine discrepancy statistics, three per class
STATISTICS = ("rmse", "mae", "r2", "b_kl", "b_ks", "b_w2", "c_kl", "c_ks", "c_w2")


# ---------------------------------------------------------------- configuration

@dataclass(frozen=True)
class DataSource:
    kind: str = "synth"
    synth: SynthConfig = field(default_factory=SynthConfig)
    path: Optional[str] = None
    schema: Optional[str] = None
    label: Optional[str] = None

    def __post_init__(self):
        if self.kind not in ("synth", "csv"):
            raise ValueError(f"unknown data source {self.kind!r}")
        if self.kind == "csv" and (self.path is None or self.schema is None):
            raise ValueError("csv data source needs path and schema")


@dataclass(frozen=True)
class RunConfig:
    data: DataSource = field(default_factory=DataSource)
    train_rates: tuple = (0.25, 0.5)
    test_rates: tuple = (0.25, 0.5)
    imputers: tuple = ("mean", "mice")
    repeats: int = 5
    mice: MiceConfig = field(default_factory=MiceConfig)
    n_directions: Optional[int] = None
    n_partitions: int = 10
    candidates: tuple = MAX_ITER_GRID
    kl_bins: int = KL_BINS
    outlier_thresholds: tuple = DEFAULT_OUTLIER_THRESHOLDS
    pooling: str = "mean"
    master_seed: int = 0
    output_dir: Optional[str] = None
    keep_sliced_raw: bool = True

    def __post_init__(self):
        for name in ("train_rates", "test_rates", "imputers", "candidates", "outlier_thresholds"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        for r in self.train_rates + self.test_rates:
            MissingnessSpec(r)
        unknown = set(self.imputers) - set(IMPUTERS)
        if unknown:
            raise ValueError(f"unknown imputer(s) {sorted(unknown)}; choose from {IMPUTERS}")
        if not self.imputers:
            raise ValueError("at least one imputer is required")
        if self.repeats < 1:
            raise ValueError("repeats must be >= 1")
        if not self.candidates:
            raise ValueError("at least one max-iteration candidate is required")
        if self.pooling not in ("mean", "vote"):
            raise ValueError(f"unknown pooling rule {self.pooling!r}")

    @classmethod
    def from_dict(cls, obj: dict) -> "RunConfig":
        obj = dict(obj)
        data = dict(obj.pop("data", {}))
        synth = {k: data.pop(k) for k in ("n_samples", "n_features", "class_sep", "labeling")
                 if k in data}
        if "seed" in data:
            synth["seed"] = data.pop("seed")
        src = DataSource(synth=SynthConfig(**synth), **data)
        mice = MiceConfig(**obj.pop("mice", {}))
        return cls(data=src, mice=mice, **obj)

    @classmethod
    def from_toml(cls, path) -> "RunConfig":
        try:
            import tomllib
        except ModuleNotFoundError:  # Python < 3.11
            import tomli as tomllib
        with open(path, "rb") as fh:
            return cls.from_dict(tomllib.load(fh))

    def to_dict(self) -> dict:
        return _clean(asdict(self))


def cell_seed(master_seed: int, key: str) -> int:
    """Stable 64-bit seed for one grid cell."""
    h = hashlib.blake2b(f"{master_seed}|{key}".encode(), digest_size=8)
    return int.from_bytes(h.digest(), "little")


def cell_key(h, v, imputer, k, train_rate, test_rate) -> str:
    return f"h={h}|v={v}|imp={imputer}|k={k}|train={train_rate}|test={test_rate}"


def _clean(obj):
    """Plain JSON types only; NaN and inf become None."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


# ---------------------------------------------------------------- report

@dataclass
class QualityReport:
    config: dict
    cells: list
    pooled: list
    outliers: list
    errors: list
    correlations: dict = field(default_factory=dict)
    version: str = __version__
    sliced_raw: dict = field(default_factory=dict, repr=False)

    def to_json(self) -> dict:
        return _clean({
            "version": self.version, "config": self.config, "cells": self.cells,
            "pooled": self.pooled, "outliers": self.outliers, "errors": self.errors,
            "correlations": self.correlations,
        })

    @classmethod
    def from_json(cls, obj: dict) -> "QualityReport":
        return cls(obj["config"], obj["cells"], obj["pooled"], obj["outliers"],
                   obj["errors"], obj.get("correlations", {}), obj.get("version", ""))

    def complete_cells(self) -> list:
        return [c for c in self.cells if "error" not in c]


def dumps_sorted(obj) -> str:
    """Key-sorted JSON with every float written to 17 significant digits."""
    parts: list[str] = []

    def emit(x, indent):
        pad = "  " * (indent + 1)
        if x is None:
            parts.append("null")
        elif isinstance(x, bool):
            parts.append("true" if x else "false")
        elif isinstance(x, int):
            parts.append(str(x))
        elif isinstance(x, float):
            parts.append("null" if not math.isfinite(x) else format(x, ".17g"))
        elif isinstance(x, str):
            parts.append(json.dumps(x))
        elif isinstance(x, dict):
            if not x:
                parts.append("{}")
                return
            parts.append("{\n")
            for i, k in enumerate(sorted(x)):
                parts.append(f"{pad}{json.dumps(str(k))}: ")
                emit(x[k], indent + 1)
                parts.append(",\n" if i < len(x) - 1 else "\n")
            parts.append("  " * indent + "}")
        elif isinstance(x, (list, tuple)):
            if not x:
                parts.append("[]")
                return
            parts.append("[\n")
            for i, v in enumerate(x):
                parts.append(pad)
                emit(v, indent + 1)
                parts.append(",\n" if i < len(x) - 1 else "\n")
            parts.append("  " * indent + "]")
        else:
            raise TypeError(f"cannot serialise {type(x).__name__}")

    emit(_clean(obj), 0)
    parts.append("\n")
    return "".join(parts)


# ---------------------------------------------------------------- data

def load_source(src: DataSource) -> Dataset:
    if src.kind == "synth":
        return generate_classification(src.synth)
    return load_dataset(src.path, src.schema, label=src.label)


# ---------------------------------------------------------------- one unit of work

@dataclass
class _Unit:
    h: int
    imputer: str
    k: int
    train_rate: object
    test_rate: object


def _flat_stats(sample, feats, cstats) -> dict:
    out = {}
    if sample is not None:
        out.update(rmse=sample.rmse, mae=sample.mae, r2=sample.r2)
    if feats is not None:
        out.update({f"b_{m}": feats.summary[m]["median"] for m in ("kl", "ks", "w2")})
    if cstats is not None:
        out.update(c_kl=cstats.kl, c_ks=cstats.ks, c_w2=cstats.w2)
    return out


def _impute_fold(imputer, train_m, target_m, truth_train, truth_target, mice, seed):
    if imputer == "identity":
        return truth_train, truth_target
    if imputer == "mean":
        return impute_mean(train_m), impute_mean(train_m, target_m)
    return mice_fit_impute(train_m, target_m, mice, seed)


def _run_unit(ctx: dict, unit: _Unit) -> dict:
    cfg: RunConfig = ctx["cfg"]
    ds: Dataset = ctx["data"]
    plan = ctx["plan"]
    natural = ctx["natural"]
    h = unit.h
    dev_idx, hold_idx = plan.developments[h], plan.holdouts[h]
    truth_dev, truth_hold = ds.take(dev_idx), ds.take(hold_idx)
    if natural:
        dev_m, hold_m = truth_dev, truth_hold
    else:
        dev_mask = induce_mcar(truth_dev, MissingnessSpec(
            unit.train_rate, cell_seed(cfg.master_seed, f"mask|h={h}|dev|rate={unit.train_rate}")))
        hold_mask = induce_mcar(truth_hold, MissingnessSpec(
            unit.test_rate, cell_seed(cfg.master_seed, f"mask|h={h}|hold|rate={unit.test_rate}")))
        dev_m, hold_m = truth_dev.masked(dev_mask), truth_hold.masked(hold_mask)
    hold_missing = np.isnan(hold_m.values)
    # identity stands in for complete data, so it sees unmasked statistics
    nz = fit_normalizer(truth_dev if unit.imputer == "identity" else dev_m)
    labels = ds.labels
    pos = {int(r): i for i, r in enumerate(dev_idx)}
    candidates = list(cfg.candidates)

    if not natural and hold_missing.any():
        dirs, halves = ctx["directions"][h], ctx["halves"][h]
    n_hold = len(hold_idx)
    folds = plan.folds[h]
    val_table = np.full((len(folds), len(candidates)), np.nan)
    hold_probs = []
    per_fold = []
    for v, val_rows in enumerate(folds):
        key = cell_key(h, v, unit.imputer, unit.k, unit.train_rate, unit.test_rate)
        seed = cell_seed(cfg.master_seed, key)
        val_pos = np.array([pos[int(r)] for r in val_rows])
        fit_pos = np.setdiff1d(np.arange(len(dev_idx)), val_pos)
        train_m = dev_m.take(fit_pos)
        target_m = Dataset(np.vstack([dev_m.values[val_pos], hold_m.values]), ds.schema)
        truth_target = Dataset(np.vstack([truth_dev.values[val_pos], truth_hold.values]),
                               ds.schema)
        imp_train, imp_target = _impute_fold(unit.imputer, train_m, target_m,
                                             truth_dev.take(fit_pos), truth_target,
                                             cfg.mice, seed)
        imp_train = postprocess_imputed(imp_train, np.isnan(train_m.values))
        imp_target = postprocess_imputed(imp_target, np.isnan(target_m.values))
        x_train = apply_normalizer(imp_train, nz).values
        x_target = apply_normalizer(imp_target, nz).values
        x_val, x_hold = x_target[:len(val_pos)], x_target[len(val_pos):]

        record = {"key": key, "holdout": h, "fold": v, "imputer": unit.imputer,
                  "repeat": unit.k, "train_rate": unit.train_rate,
                  "test_rate": unit.test_rate, "skipped": {}}
        if natural:
            record["skipped"]["quality"] = "no ground truth for naturally missing data"
        elif not hold_missing.any():
            record["skipped"]["quality"] = "no masked holdout cells"
        else:
            t_hold = apply_normalizer(truth_hold, nz).values
            sample = sample_stats(t_hold, x_hold, hold_missing)
            feats = feature_stats(t_hold, x_hold, hold_missing, cfg.kl_bins)
            sres = sliced_distances(t_hold, x_hold, dirs, halves)
            cstats = class_c_stats(sres, cfg.kl_bins)
            record["sample"] = sample.as_dict()
            record["feature"] = feats.as_dict()
            record["sliced"] = cstats.as_dict()
            record["stats"] = _flat_stats(sample, feats, cstats)
            record["_raw"] = sres
        if labels is None:
            record["skipped"]["downstream"] = "dataset has no labels"
        else:
            y_fit = labels[dev_idx[fit_pos]]
            path = train_logreg_path(x_train, y_fit, candidates)
            y_val = labels[dev_idx[val_pos]]
            probs = {}
            for c, kmax in enumerate(candidates):
                val_table[v, c] = auc(predict_proba(path[kmax], x_val), y_val)
                probs[kmax] = predict_proba(path[kmax], x_hold)
            hold_probs.append(probs)
        per_fold.append(record)

    out_cells, out_probs = [], {}
    chosen = pick_candidate(val_table, candidates) if labels is not None else None
    y_hold = None if labels is None else labels[hold_idx]
    for v, record in enumerate(per_fold):
        if labels is not None:
            p = hold_probs[v][chosen]
            record["max_iter"] = chosen
            record["validation_auc"] = float(val_table[:, candidates.index(chosen)].mean())
            record["eval"] = classification_metrics(p, y_hold).as_dict()
            out_probs[v] = p
        out_cells.append(record)
    return {"cells": out_cells, "probs": out_probs, "n_hold": n_hold}


def _run_unit_safe(ctx, unit):
    try:
        return _run_unit(ctx, unit)
    except Exception as exc:  # failures are recorded, not raised
        logger.debug("unit failed: %s", traceback.format_exc())
        return {"error": f"{type(exc).__name__}: {exc}"}


_CTX: dict = {}


def _worker_init(ctx):
    _CTX.clear()
    _CTX.update(ctx)


def _worker_run(unit):
    return _run_unit_safe(_CTX, unit)


# ---------------------------------------------------------------- driver

def _workers(requested: Optional[int]) -> int:
    if requested is not None:
        return max(1, int(requested))
    env = os.environ.get("IMPUTEVAL_WORKERS")
    return max(1, int(env)) if env else 1


def run_benchmark(cfg: RunConfig, workers: Optional[int] = None,
                  data: Optional[Dataset] = None) -> QualityReport:
    """Run the whole grid and return the report (nothing is written)."""
    ds = load_source(cfg.data) if data is None else data
    natural = ds.has_missing
    if natural:
        train_rates = test_rates = (NATURAL,)
        imputers = [m for m in cfg.imputers if m != "identity"]
        if len(imputers) != len(cfg.imputers):
            logger.warning("identity imputer needs ground truth; dropped for natural data")
    else:
        train_rates, test_rates, imputers = cfg.train_rates, cfg.test_rates, list(cfg.imputers)

    plan = make_split_plan(ds.n_rows, cell_seed(cfg.master_seed, "split"))
    d = ds.shape[1]
    m = cfg.n_directions or default_n_directions(d)
    ctx = {
        "cfg": cfg, "data": ds, "plan": plan, "natural": natural,
        "directions": [sample_unit_directions(d, m, cell_seed(cfg.master_seed, f"dirs|h={h}"))
                       for h in range(len(plan.holdouts))],
        "halves": [make_half_partitions(len(plan.holdouts[h]), cfg.n_partitions,
                                        cell_seed(cfg.master_seed, f"halves|h={h}"))
                   for h in range(len(plan.holdouts))],
    }

    units = []
    for h in range(len(plan.holdouts)):
        for imp in imputers:
            # deterministic imputers give identical repeats; run once, copy
            reps = 1 if imp in DETERMINISTIC else cfg.repeats
            for k in range(reps):
                for tr in train_rates:
                    for te in test_rates:
                        units.append(_Unit(h, imp, k, tr, te))

    n_workers = _workers(workers)
    if n_workers == 1:
        results = [_run_unit_safe(ctx, u) for u in units]
    else:
        with ProcessPoolExecutor(n_workers, initializer=_worker_init, initargs=(ctx,)) as pool:
            results = list(pool.map(_worker_run, units, chunksize=1))

    cells, errors, raw = [], [], {}
    probs: dict = {}
    y = ds.labels
    n_folds = len(plan.folds[0])
    for unit, res in zip(units, results):
        reps = [unit.k] if unit.imputer not in DETERMINISTIC else range(cfg.repeats)
        for k in reps:
            if "error" in res:
                for v in range(n_folds):
                    key = cell_key(unit.h, v, unit.imputer, k, unit.train_rate, unit.test_rate)
                    errors.append({"key": key, "error": res["error"]})
                continue
            for record in res["cells"]:
                rec = dict(record, repeat=k,
                           key=cell_key(unit.h, record["fold"], unit.imputer, k,
                                        unit.train_rate, unit.test_rate))
                sres = rec.pop("_raw", None)
                if sres is not None and cfg.keep_sliced_raw:
                    raw[rec["key"]] = sres
                cells.append(rec)
            for v, p in res["probs"].items():
                probs.setdefault((unit.h, v, unit.imputer, unit.train_rate, unit.test_rate),
                                 {})[k] = p

    pooled = []
    for (h, v, imp, tr, te), by_rep in probs.items():
        stacked = [by_rep[k] for k in sorted(by_rep)]
        p = pool_predictions(stacked, cfg.pooling)
        pooled.append({
            "key": f"h={h}|v={v}|imp={imp}|train={tr}|test={te}",
            "holdout": h, "fold": v, "imputer": imp, "train_rate": tr, "test_rate": te,
            "n_repeats": len(stacked),
            "eval": classification_metrics(p, y[plan.holdouts[h]]).as_dict(),
        })

    outliers = _outlier_records(cells, cfg)
    _add_stability(pooled, cells)
    cells.sort(key=lambda c: c["key"])
    pooled.sort(key=lambda c: c["key"])
    errors.sort(key=lambda e: e["key"])
    report = QualityReport(
        config={**cfg.to_dict(), "resolved": {
            "n_rows": ds.n_rows, "n_columns": d, "n_directions": m,
            "natural_missingness": natural}},
        cells=cells, pooled=pooled, outliers=outliers, errors=errors,
        sliced_raw=raw)
    report.correlations = {
        "quality_vs_auc": correlate_quality_vs_auc(report),
        "metrics": correlate_metrics(report),
    }
    return report


def _group_key(c) -> str:
    return f"h={c['holdout']}|v={c['fold']}|imp={c['imputer']}|train={c['train_rate']}|test={c['test_rate']}"


def _outlier_records(cells, cfg) -> list:
    groups: dict = {}
    for c in cells:
        if "feature" not in c:
            continue
        g = groups.setdefault(_group_key(c), {})
        for j, stats in c["feature"]["per_feature"].items():
            g[(j, c["repeat"])] = stats["w2"]
    out = []
    for key, dist in groups.items():
        props = outlier_proportions(dist, cfg.outlier_thresholds)
        out.append({"key": key, "n": len(dist),
                    "proportions": {repr(float(t)): p for t, p in props.items()}})
    out.sort(key=lambda r: r["key"])
    return out


def _add_stability(pooled, cells):
    by_group: dict = {}
    for c in cells:
        if "sliced" in c:
            by_group.setdefault(_group_key(c), []).append(c["sliced"]["w2"])
    for rec in pooled:
        vals = by_group.get(rec["key"])
        if vals:
            rec["c_w2_repeat_sd"] = float(np.std(vals))


# ---------------------------------------------------------------- correlations

def _pearson(x, y) -> Optional[float]:
    x, y = np.asarray(x, float), np.asarray(y, float)
    if x.size < 3 or np.ptp(x) == 0 or np.ptp(y) == 0:
        return None
    xc, yc = x - x.mean(), y - y.mean()
    den = math.sqrt(float(xc @ xc) * float(yc @ yc))
    if den == 0:
        return None
    return float(np.clip((xc @ yc) / den, -1.0, 1.0))


def _spearman(x, y) -> Optional[float]:
    return _pearson(rankdata(x), rankdata(y))


def correlation(x, y) -> dict:
    return {"pearson": _pearson(x, y), "spearman": _spearman(x, y), "n": len(x)}


def correlate_quality_vs_auc(report: QualityReport) -> list:
    """Pearson/Spearman of each discrepancy statistic against holdout AUC,
    one stratum per test missingness rate."""
    strata: dict = {}
    for c in report.complete_cells():
        if "stats" in c and "eval" in c:
            strata.setdefault(c["test_rate"], []).append(c)
    out = []
    for rate in sorted(strata, key=str):
        group = strata[rate]
        for stat in STATISTICS:
            pairs = [(c["stats"][stat], c["eval"]["auc"]) for c in group
                     if c["stats"].get(stat) is not None]
            x = [p[0] for p in pairs]
            y = [p[1] for p in pairs]
            out.append({"test_rate": rate, "statistic": stat, **correlation(x, y)})
    return out


def correlate_metrics(report: QualityReport) -> dict:
    """Pairwise Pearson matrix of the nine statistics over all scored cells."""
    rows = [c["stats"] for c in report.complete_cells()
            if "stats" in c and all(c["stats"].get(s) is not None for s in STATISTICS)]
    mat = np.array([[r[s] for s in STATISTICS] for r in rows], dtype=float)
    matrix = []
    for a in range(len(STATISTICS)):
        row = []
        for b in range(len(STATISTICS)):
            if a == b:
                row.append(1.0)
            elif mat.shape[0]:
                row.append(_pearson(mat[:, a], mat[:, b]))
            else:
                row.append(None)
        matrix.append(row)
    return {"statistics": list(STATISTICS), "pearson": matrix, "n": len(rows)}


# ---------------------------------------------------------------- output

CELL_COLUMNS = (
    ["key", "holdout", "fold", "imputer", "repeat", "train_rate", "test_rate"]
    + ["rmse", "mae", "r2"]
    + [f"{m}_{s}" for m in ("kl", "ks", "w2") for s in ("min", "median", "max")]
    + ["c_kl", "c_ks", "c_w2", "ratio_median", "ratio_iqr", "n_guarded"]
    + ["auc", "accuracy", "brier", "precision", "sensitivity", "specificity",
       "max_iter", "validation_auc"]
)


def _cell_row(c) -> dict:
    row = {k: c.get(k) for k in CELL_COLUMNS[:7]}
    if "sample" in c:
        row.update(c["sample"])
    if "feature" in c:
        for m, summ in c["feature"]["summary"].items():
            for s, val in summ.items():
                row[f"{m}_{s}"] = val
    if "sliced" in c:
        sl = c["sliced"]
        row.update(c_kl=sl["kl"], c_ks=sl["ks"], c_w2=sl["w2"],
                   ratio_median=sl["ratio_median"], ratio_iqr=sl["ratio_iqr"],
                   n_guarded=sl["n_guarded"])
    if "eval" in c:
        row.update(c["eval"])
        row["max_iter"] = c.get("max_iter")
        row["validation_auc"] = c.get("validation_auc")
    return row


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return format(x, ".17g") if math.isfinite(x) else ""
    return str(x)


def emit_report(report: QualityReport, out_dir) -> list[Path]:
    """Write report.json, cells.csv, sliced_raw.csv and correlations.csv."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        paths = []
        p = out / "report.json"
        p.write_text(dumps_sorted(report.to_json()), encoding="utf-8")
        paths.append(p)

        p = out / "cells.csv"
        with open(p, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(CELL_COLUMNS)
            for c in report.complete_cells():
                row = _cell_row(c)
                w.writerow([_fmt(row.get(k)) for k in CELL_COLUMNS])
        paths.append(p)

        p = out / "sliced_raw.csv"
        with open(p, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["key", "r", "p", "w", "w_hat", "skipped"])
            for key in sorted(report.sliced_raw):
                for r, q, wv, wh, reason in report.sliced_raw[key].rows():
                    w.writerow([key, r, q, "" if reason else _fmt(float(wv)),
                                "" if reason else _fmt(float(wh)), reason])
        paths.append(p)

        p = out / "correlations.csv"
        write_correlations(report.correlations, p)
        paths.append(p)
    except OSError as exc:
        raise OSError(f"failed writing report to {out}: {exc}") from exc
    return paths


def write_correlations(corr: dict, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["table", "stratum", "x", "y", "pearson", "spearman", "n"])
        for r in corr.get("quality_vs_auc", []):
            w.writerow(["quality_vs_auc", r["test_rate"], r["statistic"], "auc",
                        _fmt(r["pearson"]), _fmt(r["spearman"]), r["n"]])
        m = corr.get("metrics")
        if m:
            stats = m["statistics"]
            for a, sa in enumerate(stats):
                for b, sb in enumerate(stats):
                    w.writerow(["metrics", "all", sa, sb, _fmt(m["pearson"][a][b]), "", m["n"]])


def load_report(path) -> QualityReport:
    p = Path(path)
    if p.is_dir():
        p = p / "report.json"
    with open(p, encoding="utf-8") as fh:
        return QualityReport.from_json(json.load(fh))
