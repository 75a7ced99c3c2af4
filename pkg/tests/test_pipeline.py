import csv
import json

import numpy as np
import pytest

from imputeval.datamodel import apply_normalizer, fit_normalizer, save_dataset, save_schema
from imputeval.downstream import auc, pick_candidate, predict_proba, train_logreg_path
from imputeval.partition import make_split_plan
from imputeval.pipeline import (CELL_COLUMNS, STATISTICS, DataSource, QualityReport, RunConfig,
                                cell_key, cell_seed, correlate_metrics, correlate_quality_vs_auc,
                                correlation, dumps_sorted, emit_report, load_report, load_source,
                                run_benchmark)
from imputeval.synth import SynthConfig, generate_classification

SMALL = dict(
    data={"n_samples": 120, "n_features": 4, "seed": 3},
    train_rates=[0.25, 0.5], test_rates=[0.25, 0.5],
    imputers=["identity", "mean", "mice"], repeats=2,
    mice={"iterations": 3}, n_directions=6, n_partitions=3,
    candidates=[5, 20], master_seed=11,
)


@pytest.fixture(scope="module")
def small_cfg():
    return RunConfig.from_dict(SMALL)


@pytest.fixture(scope="module")
def small_report(small_cfg):
    return run_benchmark(small_cfg, workers=1)


def test_grid_is_complete(small_report, small_cfg):
    assert small_report.errors == []
    # 3 holdouts x 5 folds x 3 imputers x 2 repeats x 4 rate pairs
    assert len(small_report.cells) == 3 * 5 * 3 * 2 * 4
    assert len(small_report.pooled) == 3 * 5 * 3 * 4
    keys = [c["key"] for c in small_report.cells]
    assert len(set(keys)) == len(keys)


def test_identity_end_to_end(small_report):
    ident = [c for c in small_report.cells if c["imputer"] == "identity"]
    for c in ident:
        assert all(c["stats"][s] == 0.0 for s in STATISTICS if s != "r2")
        assert c["stats"]["r2"] == 1.0
        assert c["sliced"]["ratio_median"] == 1.0 and c["sliced"]["ratio_iqr"] == 0.0


def test_identity_matches_complete_data_auc(small_report, small_cfg):
    ds = generate_classification(small_cfg.data.synth)
    y = ds.labels
    plan = make_split_plan(ds.n_rows, cell_seed(small_cfg.master_seed, "split"))
    cands = list(small_cfg.candidates)
    expected = {}
    for h, dev in enumerate(plan.developments):
        nz = fit_normalizer(ds.take(dev))
        x = apply_normalizer(ds, nz).values
        hold = plan.holdouts[h]
        paths, table = [], np.empty((5, len(cands)))
        for v, val in enumerate(plan.folds[h]):
            fit = np.setdiff1d(dev, val)
            path = train_logreg_path(x[fit], y[fit], cands)
            table[v] = [auc(predict_proba(path[k], x[val]), y[val]) for k in cands]
            paths.append(path)
        best = pick_candidate(table, cands)
        for v in range(5):
            expected[(h, v)] = auc(predict_proba(paths[v][best], x[hold]), y[hold])
    for rec in small_report.pooled:
        if rec["imputer"] == "identity":
            assert rec["eval"]["auc"] == pytest.approx(expected[(rec["holdout"], rec["fold"])], abs=1e-12)


def test_imputers_are_worse_than_identity(small_report):
    by = {}
    for c in small_report.cells:
        by.setdefault(c["imputer"], []).append(c["stats"]["b_w2"])
    assert np.mean(by["mean"]) > np.mean(by["mice"]) > 0.0


def test_mean_repeats_are_copies(small_report):
    cells = {c["key"]: c for c in small_report.cells}
    for c in small_report.cells:
        if c["imputer"] == "mean" and c["repeat"] == 1:
            twin = cells[c["key"].replace("|k=1|", "|k=0|")]
            assert c["stats"] == twin["stats"] and c["eval"] == twin["eval"]


def test_rerun_byte_identical(small_report, small_cfg):
    again = run_benchmark(small_cfg, workers=1)
    assert dumps_sorted(again.to_json()) == dumps_sorted(small_report.to_json())


def test_worker_count_does_not_matter(small_report, small_cfg):
    par = run_benchmark(small_cfg, workers=2)
    assert dumps_sorted(par.to_json()) == dumps_sorted(small_report.to_json())


def test_emit_and_reload(small_report, tmp_path):
    paths = emit_report(small_report, tmp_path / "out")
    assert sorted(p.name for p in paths) == ["cells.csv", "correlations.csv", "report.json",
                                            "sliced_raw.csv"]
    back = load_report(tmp_path / "out")
    assert back.to_json() == json.loads(json.dumps(small_report.to_json()))
    text = (tmp_path / "out" / "report.json").read_text()
    assert text == dumps_sorted(back.to_json())
    with open(tmp_path / "out" / "cells.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert list(rows[0]) == CELL_COLUMNS and len(rows) == len(small_report.cells)
    with open(tmp_path / "out" / "sliced_raw.csv") as fh:
        n_raw = sum(1 for _ in fh) - 1
    assert n_raw == len(small_report.cells) * 6 * 3


def test_emit_failure_names_path(small_report, tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(OSError, match="file"):
        emit_report(small_report, blocker / "sub")


def test_seed_injective_over_grid(small_cfg):
    keys = [cell_key(h, v, imp, k, tr, te)
            for h in range(3) for v in range(5) for imp in ("identity", "mean", "mice")
            for k in range(small_cfg.repeats) for tr in small_cfg.train_rates
            for te in small_cfg.test_rates]
    seeds = {cell_seed(small_cfg.master_seed, key) for key in keys}
    assert len(seeds) == len(keys)
    assert cell_seed(0, "a") != cell_seed(1, "a")
    assert cell_seed(5, "abc") == cell_seed(5, "abc")


def test_failures_are_recorded():
    cfg = RunConfig.from_dict({**SMALL, "imputers": ["mean"], "repeats": 1,
                               "n_directions": 6, "train_rates": [0.25], "test_rates": [0.25],
                               "data": {"n_samples": 120, "n_features": 4, "seed": 3},
                               "mice": {}})
    ds = generate_classification(SynthConfig(120, 4, seed=3))
    # single-class labels make every unit fail
    bad = ds.__class__(ds.values, ds.schema, np.zeros(120, dtype=int))
    rep = run_benchmark(cfg, data=bad)
    assert rep.cells == [] and len(rep.errors) == 3 * 5
    assert all("ValueError" in e["error"] for e in rep.errors)


# ---------------------------------------------------------------- natural missingness

def test_natural_missingness_csv(tmp_path):
    ds = generate_classification(SynthConfig(90, 3, seed=1))
    v = ds.values.copy()
    rng = np.random.default_rng(0)
    v[rng.random(v.shape) < 0.1] = np.nan
    data, schema = tmp_path / "d.csv", tmp_path / "s.json"
    save_dataset(ds.with_values(v), data, label="y")
    save_schema(ds.schema, schema)
    cfg = RunConfig.from_dict({"data": {"kind": "csv", "path": str(data), "schema": str(schema),
                                        "label": "y"},
                               "imputers": ["identity", "mean"], "repeats": 1,
                               "candidates": [5], "n_partitions": 2})
    rep = run_benchmark(cfg)
    assert rep.errors == []
    assert {c["imputer"] for c in rep.cells} == {"mean"}
    assert all(c["train_rate"] == "natural" and "stats" not in c for c in rep.cells)
    assert all(c["skipped"]["quality"].startswith("no ground truth") for c in rep.cells)
    assert all("auc" in c["eval"] for c in rep.cells)
    assert rep.config["resolved"]["natural_missingness"] is True


# ---------------------------------------------------------------- configuration

def test_toml_config(tmp_path):
    path = tmp_path / "run.toml"
    path.write_text(
        'imputers = ["mean"]\nrepeats = 3\nmaster_seed = 7\ntrain_rates = [0.1]\n'
        '[data]\nn_samples = 50\nn_features = 3\nseed = 2\n'
        '[mice]\ndonors = 3\n')
    cfg = RunConfig.from_toml(path)
    assert cfg.imputers == ("mean",) and cfg.repeats == 3 and cfg.master_seed == 7
    assert cfg.data.synth == SynthConfig(50, 3, seed=2) and cfg.mice.donors == 3
    assert cfg.train_rates == (0.1,) and cfg.test_rates == (0.25, 0.5)
    assert RunConfig.from_dict(cfg.to_dict() | {"data": {"n_samples": 50, "n_features": 3,
                                                           "seed": 2}}).to_dict() == cfg.to_dict()


def test_config_errors():
    with pytest.raises(ValueError):
        RunConfig(imputers=("gain",))
    with pytest.raises(ValueError):
        RunConfig(train_rates=(1.5,))
    with pytest.raises(ValueError):
        RunConfig(repeats=0)
    with pytest.raises(ValueError):
        RunConfig(pooling="median")
    with pytest.raises(ValueError):
        DataSource(kind="csv")
    with pytest.raises(OSError):
        load_source(DataSource(kind="csv", path="/nonexistent.csv", schema="/nonexistent.json"))


# ---------------------------------------------------------------- correlations

def test_correlation_examples(rng):
    x = rng.normal(size=50)
    assert correlation(x, 2 * x + 1)["pearson"] == pytest.approx(1.0)
    assert correlation(x, -x)["pearson"] == pytest.approx(-1.0)
    c = correlation(x, np.exp(3 * x))
    assert c["spearman"] == pytest.approx(1.0) and c["pearson"] < 1.0
    assert correlation(x, np.ones(50))["pearson"] is None
    assert correlation([1.0, 2.0], [2.0, 1.0])["pearson"] is None


def _fake_report(rows):
    cells = []
    for i, (stats, a, rate) in enumerate(rows):
        cells.append({"key": str(i), "stats": stats, "eval": {"auc": a}, "test_rate": rate})
    return QualityReport({}, cells, [], [], [])


def test_correlate_metrics_matrix(rng):
    n = 500
    rows = []
    for _ in range(n):
        s = {k: float(v) for k, v in zip(STATISTICS, rng.normal(size=9))}
        s["mae"] = s["rmse"]  # duplicated column
        rows.append((s, 0.5, 0.25))
    m = correlate_metrics(_fake_report(rows))
    p = np.array(m["pearson"], dtype=float)
    assert np.array_equal(np.diag(p), np.ones(9))
    assert np.allclose(p, p.T)
    assert p[0, 1] == pytest.approx(1.0)
    assert max(abs(p[a, b]) for a in range(2, 9) for b in range(2, 9) if a != b) < 0.15


def test_correlate_quality_vs_auc_strata(rng):
    rows = []
    for rate, sign in ((0.25, 1.0), (0.5, -1.0)):
        for x in np.linspace(0, 1, 10):
            s = {k: float(x) for k in STATISTICS}
            rows.append((s, 0.5 + sign * 0.3 * x, rate))
    table = correlate_quality_vs_auc(_fake_report(rows))
    assert len(table) == 2 * 9
    for r in table:
        expected = 1.0 if r["test_rate"] == 0.25 else -1.0
        assert r["pearson"] == pytest.approx(expected) and r["n"] == 10
