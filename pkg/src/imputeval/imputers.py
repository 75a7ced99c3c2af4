"""Mean and MICE (predictive mean matching) imputation.

Imputers are fitted on a training dataset and applied to a target dataset,
which may be the training data itself. Missing cells are NaN. Every imputer
leaves observed cells exactly as they were.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, asdict
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .datamodel import Dataset, load_dataset, postprocess_imputed, save_dataset

logger = logging.getLogger(__name__)

METHODS = ("mean", "mice", "external")


@dataclass(frozen=True)
class MiceConfig:
    iterations: int = 10
    donors: int = 5
    ridge: float = 1e-6

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("MICE needs at least one iteration")
        if self.donors < 1:
            raise ValueError("pmm needs at least one donor")
        if self.ridge < 0:
            raise ValueError("ridge penalty must be >= 0")


@dataclass(frozen=True)
class ImputerConfig:
    method: str = "mice"
    mice: MiceConfig = field(default_factory=MiceConfig)
    repeats: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown imputation method {self.method!r}")
        if self.repeats < 1:
            raise ValueError("repeats must be >= 1")


@dataclass(frozen=True, eq=False)
class ImputationSet:
    completions: tuple[Dataset, ...]
    provenance: tuple[dict, ...]

    def __len__(self):
        return len(self.completions)

    def __iter__(self):
        return iter(self.completions)


def _observed_counts(train: Dataset) -> np.ndarray:
    counts = (~np.isnan(train.values)).sum(axis=0)
    empty = np.flatnonzero(counts == 0)
    if empty.size:
        names = [train.columns[j].name for j in empty]
        raise ValueError(f"training column(s) {names} have no observed values")
    return counts


def _check_target(train: Dataset, target: Dataset):
    if target.shape[1] != train.shape[1]:
        raise ValueError(f"target has {target.shape[1]} columns, training data {train.shape[1]}")


def impute_mean(train: Dataset, target: Optional[Dataset] = None) -> Dataset:
    """Replace every missing target cell with the observed training column mean."""
    target = train if target is None else target
    _check_target(train, target)
    _observed_counts(train)
    means = np.nanmean(train.values, axis=0)
    v = target.values.copy()
    miss = np.isnan(v)
    v[miss] = np.broadcast_to(means, v.shape)[miss]
    return target.with_values(v)


def _ridge(x: np.ndarray, y: np.ndarray, lam: float) -> np.ndarray:
    # intercept in column 0, not penalised
    gram = x.T @ x
    pen = np.full(x.shape[1], lam)
    pen[0] = 0.0
    gram[np.diag_indices_from(gram)] += pen
    return np.linalg.solve(gram, x.T @ y)


def _pmm_draw(donor_pred: np.ndarray, donor_y: np.ndarray, query: np.ndarray,
              k: int, rng: np.random.Generator) -> np.ndarray:
    """Pick, for each query prediction, one of the k donors with the closest
    predictions (uniformly) and return that donor's observed value."""
    k = min(k, donor_pred.size)
    order = np.argsort(donor_pred, kind="stable")
    sp = donor_pred[order]
    pos = np.searchsorted(sp, query)
    window = pos[:, None] + np.arange(-k, k)
    inside = (window >= 0) & (window < sp.size)
    dist = np.abs(sp[np.clip(window, 0, sp.size - 1)] - query[:, None])
    dist[~inside] = np.inf
    nearest = np.argsort(dist, axis=1, kind="stable")[:, :k]
    pick = nearest[np.arange(query.size), rng.integers(0, k, size=query.size)]
    return donor_y[order[window[np.arange(query.size), pick]]]


def impute_mice(train: Dataset, target: Optional[Dataset] = None,
                cfg: MiceConfig = MiceConfig(), seed: int = 0) -> Dataset:
    """Chained-equation imputation with predictive mean matching.

    Missing cells start as random observed values of their column. Each sweep
    visits the columns in schema order; a column with missing cells is
    ridge-regressed on all the other (currently completed) columns, using
    the training rows where it is observed. Each missing cell, in the
    training data and in the target, then receives the observed value of one
    of the ``cfg.donors`` training rows whose predictions are nearest to its
    own, chosen uniformly at random.

    The regressions only ever see training rows, so imputing a separate
    target leaks nothing from it into the model.
    """
    return mice_fit_impute(train, target, cfg, seed)[1]


def mice_fit_impute(train: Dataset, target: Optional[Dataset] = None,
                    cfg: MiceConfig = MiceConfig(), seed: int = 0) -> tuple[Dataset, Dataset]:
    """Like :func:`impute_mice` but returns the completed training data too."""
    same = target is None or target is train
    target = train if target is None else target
    _check_target(train, target)
    d = train.shape[1]
    if d < 2:
        raise ValueError("MICE needs at least two columns")
    _observed_counts(train)
    rng = np.random.default_rng(seed)

    zt = train.values.copy()
    mt = np.isnan(zt)
    if same:
        zg, mg = zt, mt
    else:
        zg = target.values.copy()
        mg = np.isnan(zg)

    for j in range(d):
        pool = zt[~mt[:, j], j]
        zt[mt[:, j], j] = rng.choice(pool, size=int(mt[:, j].sum()))
        if not same:
            zg[mg[:, j], j] = rng.choice(pool, size=int(mg[:, j].sum()))

    todo = [j for j in range(d) if mt[:, j].any() or mg[:, j].any()]
    ones_t = np.ones((zt.shape[0], 1))
    for _ in range(cfg.iterations):
        for j in todo:
            others = np.r_[0:j, j + 1:d]
            obs = ~mt[:, j]
            xt = np.hstack([ones_t, zt[:, others]])
            beta = _ridge(xt[obs], zt[obs, j], cfg.ridge)
            if not np.all(np.isfinite(beta)):
                raise np.linalg.LinAlgError(f"ridge solve failed for column {j}")
            pred_t = xt @ beta
            donor_pred, donor_y = pred_t[obs], zt[obs, j]
            if mt[:, j].any():
                zt[mt[:, j], j] = _pmm_draw(donor_pred, donor_y, pred_t[mt[:, j]],
                                            cfg.donors, rng)
            if not same and mg[:, j].any():
                pred_g = beta[0] + zg[mg[:, j]][:, others] @ beta[1:]
                zg[mg[:, j], j] = _pmm_draw(donor_pred, donor_y, pred_g, cfg.donors, rng)
    return train.with_values(zt), target.with_values(zg)


def derive_seed(seed: int, repeat: int) -> int:
    return int(np.random.SeedSequence([seed, repeat]).generate_state(1, np.uint64)[0])


def impute_multiple(train: Dataset, target: Optional[Dataset] = None,
                    cfg: ImputerConfig = ImputerConfig(),
                    postprocess: bool = True) -> ImputationSet:
    """Run the configured imputer ``cfg.repeats`` times with derived seeds."""
    target = train if target is None else target
    if cfg.method == "external":
        raise ValueError("external imputations are loaded, not computed; "
                         "use load_external_imputation")
    completions, prov = [], []
    mask = np.isnan(target.values)
    for k in range(cfg.repeats):
        seed = derive_seed(cfg.seed, k)
        if cfg.method == "mean":
            out = impute_mean(train, target)
            info = {"method": "mean", "repeat": k}
        else:
            out = impute_mice(train, target, cfg.mice, seed)
            info = {"method": "mice", "repeat": k, "seed": seed, **asdict(cfg.mice)}
        if postprocess:
            out = postprocess_imputed(out, mask)
        completions.append(out)
        prov.append(info)
    return ImputationSet(tuple(completions), tuple(prov))


# ---------------------------------------------------------------- exchange format

OBSERVED_TOL = 1e-9


def imputation_paths(prefix, repeats: int) -> list[Path]:
    prefix = str(prefix)
    return [Path(f"{prefix}.imp{k}.csv") for k in range(repeats)]


def save_imputation_set(iset: ImputationSet, prefix, label: Optional[str] = None) -> list[Path]:
    paths = imputation_paths(prefix, len(iset))
    for ds, path in zip(iset.completions, paths):
        save_dataset(ds, path, label)
    return paths


def load_external_imputation(paths: Sequence, reference: Dataset,
                             label: Optional[str] = None) -> ImputationSet:
    """Read completions made by an outside tool and check them against
    ``reference`` (the incomplete data the tool was given)."""
    if not paths:
        raise ValueError("no imputation files given")
    observed = ~np.isnan(reference.values)
    completions, prov = [], []
    for k, path in enumerate(paths):
        ds = load_dataset(path, schema=reference.schema, label=label)
        if ds.shape != reference.shape:
            raise ValueError(f"{path}: shape mismatch, got {ds.shape}, expected {reference.shape}")
        if ds.has_missing:
            raise ValueError(f"{path}: {int(ds.missing.sum())} cell(s) still missing")
        diff = np.abs(ds.values[observed] - reference.values[observed])
        if diff.size and diff.max() > OBSERVED_TOL:
            raise ValueError(f"{path}: observed-cell mismatch (max deviation {diff.max():.3g})")
        completions.append(Dataset(ds.values, reference.schema, reference.labels))
        prov.append({"method": "external", "repeat": k, "path": str(path)})
    return ImputationSet(tuple(completions), tuple(prov))
