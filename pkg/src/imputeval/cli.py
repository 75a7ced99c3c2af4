"""Command-line entry point: ``imputeval <command> ...``."""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .datamodel import apply_normalizer, fit_normalizer, load_dataset, save_dataset, save_schema
from .discrepancy import KL_BINS, feature_stats, sample_stats
from .downstream import classification_metrics
from .imputers import ImputerConfig, MiceConfig, impute_multiple, load_external_imputation, save_imputation_set
from .missingness import MissingnessSpec, induce_mcar, load_mask, save_mask
from .partition import make_half_partitions, make_split_plan
from .pipeline import (RunConfig, correlate_metrics, correlate_quality_vs_auc, dumps_sorted,
                       emit_report, load_report, run_benchmark, write_correlations)
from .sliced import (DEFAULT_OUTLIER_THRESHOLDS, class_c_stats, default_n_directions,
                     outlier_proportions, sample_unit_directions, sliced_distances)
from .synth import SynthConfig, generate_classification

log = logging.getLogger("imputeval")


def _cmd_synth(args):
    ds = generate_classification(SynthConfig(args.n, args.d, args.sep, args.seed, args.labeling))
    save_dataset(ds, args.out, label=args.label)
    save_schema(ds.schema, args.schema_out)
    log.info("wrote %d x %d dataset to %s", *ds.shape, args.out)
    return 0


def _cmd_split(args):
    make_split_plan(args.n, args.seed).save(args.out)
    return 0


def _cmd_induce(args):
    ds = load_dataset(args.input, args.schema, label=args.label)
    mask = induce_mcar(ds, MissingnessSpec(args.rate, args.seed, args.per_column))
    save_mask(mask, args.mask_out, header=[c.name for c in ds.columns])
    log.info("masked %d of %d cells", int(mask.sum()), mask.size)
    return 0


def _cmd_impute(args):
    ds = load_dataset(args.input, args.schema, label=args.label)
    if args.mask:
        ds = ds.masked(load_mask(args.mask))
    cfg = ImputerConfig(args.method, MiceConfig(args.iterations, args.donors, args.ridge),
                        args.repeats, args.seed)
    iset = impute_multiple(ds, None, cfg)
    for path in save_imputation_set(iset, args.out_prefix, label=args.label):
        print(path)
    return 0


def _cmd_evaluate(args):
    truth = load_dataset(args.truth, args.schema, label=args.label)
    if truth.has_missing:
        log.error("ground truth must be complete")
        return 2
    mask = load_mask(args.mask)
    reference = truth.masked(mask)
    iset = load_external_imputation(args.imputed, reference, label=args.label)
    nz = fit_normalizer(truth)
    t = apply_normalizer(truth, nz).values
    d = truth.shape[1]
    dirs = sample_unit_directions(d, args.directions or default_n_directions(d), args.seed)
    halves = make_half_partitions(truth.n_rows, args.partitions, args.seed + 1)
    results, w2 = [], {}
    for k, comp in enumerate(iset.completions):
        x = apply_normalizer(comp, nz).values
        feats = feature_stats(t, x, mask, args.bins)
        sres = sliced_distances(t, x, dirs, halves)
        results.append({
            "file": str(args.imputed[k]),
            "sample": sample_stats(t, x, mask).as_dict(),
            "feature": feats.as_dict(),
            "sliced": class_c_stats(sres, args.bins).as_dict(),
        })
        for j, s in feats.per_feature.items():
            w2[(j, k)] = s["w2"]
        if args.sliced_raw:
            sres.to_csv(f"{args.sliced_raw}.imp{k}.csv")
    props = outlier_proportions(w2, args.thresholds)
    doc = {"imputations": results,
           "outliers": {repr(float(t)): p for t, p in props.items()}}
    text = dumps_sorted(doc)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def _cmd_metrics(args):
    with open(args.scores, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    scores = np.array([float(r[args.score_column]) for r in rows])
    labels = np.array([int(float(r[args.label_column])) for r in rows])
    m = classification_metrics(scores, labels, args.threshold)
    sys.stdout.write(dumps_sorted(m.as_dict()))
    return 0


def _cmd_benchmark(args):
    cfg = RunConfig.from_toml(args.config)
    out = args.out or cfg.output_dir or "imputeval-out"
    report = run_benchmark(cfg, workers=args.workers)
    for p in emit_report(report, out):
        log.info("wrote %s", p)
    if report.errors:
        log.error("%d cell(s) failed; first: %s", len(report.errors), report.errors[0])
        return 1
    return 0


def _cmd_correlate(args):
    report = load_report(args.report)
    corr = {"quality_vs_auc": correlate_quality_vs_auc(report),
            "metrics": correlate_metrics(report)}
    if args.out:
        write_correlations(corr, args.out)
    else:
        sys.stdout.write(dumps_sorted(corr))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="imputeval", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate the simulated classification dataset")
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--d", type=int, default=25)
    p.add_argument("--sep", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--labeling", choices=("majority", "parity"), default="majority")
    p.add_argument("--label", default="label", help="name of the label column")
    p.add_argument("--out", required=True)
    p.add_argument("--schema-out", required=True)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("split", help="write a holdout/validation split plan")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_split)

    p = sub.add_parser("induce", help="draw an MCAR mask for a complete dataset")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--schema", required=True)
    p.add_argument("--label")
    p.add_argument("--rate", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--per-column", action="store_true")
    p.add_argument("--mask-out", required=True)
    p.set_defaults(func=_cmd_induce)

    p = sub.add_parser("impute", help="impute a dataset with mean or MICE")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--schema", required=True)
    p.add_argument("--label")
    p.add_argument("--mask", help="mask CSV (1 = remove); default: use the file's empty cells")
    p.add_argument("--method", choices=("mean", "mice"), default="mice")
    p.add_argument("--repeats", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--iterations", type=int, default=10)
    p.add_argument("--donors", type=int, default=5)
    p.add_argument("--ridge", type=float, default=1e-6)
    p.add_argument("--out-prefix", required=True)
    p.set_defaults(func=_cmd_impute)

    p = sub.add_parser("evaluate", help="score imputations against ground truth")
    p.add_argument("--truth", required=True)
    p.add_argument("--schema", required=True)
    p.add_argument("--label")
    p.add_argument("--mask", required=True)
    p.add_argument("--imputed", nargs="+", required=True)
    p.add_argument("--directions", type=int)
    p.add_argument("--partitions", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--bins", type=int, default=KL_BINS)
    p.add_argument("--thresholds", type=float, nargs="+", default=list(DEFAULT_OUTLIER_THRESHOLDS))
    p.add_argument("--sliced-raw", help="prefix for per-imputation r,p,w,w_hat CSVs")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("metrics", help="classification metrics for externally produced scores")
    p.add_argument("--scores", required=True)
    p.add_argument("--score-column", default="score")
    p.add_argument("--label-column", default="label")
    p.add_argument("--threshold", type=float, default=0.5)
    p.set_defaults(func=_cmd_metrics)

    p = sub.add_parser("benchmark", help="run the full benchmark grid from a TOML config")
    p.add_argument("--config", required=True)
    p.add_argument("--workers", type=int, help="default: $IMPUTEVAL_WORKERS or 1")
    p.add_argument("--out", help="output directory (overrides output_dir)")
    p.set_defaults(func=_cmd_benchmark)

    p = sub.add_parser("correlate", help="recompute correlation tables from a report")
    p.add_argument("--report", required=True)
    p.add_argument("--out", help="write correlations CSV instead of JSON to stdout")
    p.set_defaults(func=_cmd_correlate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (OSError, ValueError) as exc:
        log.error("%s", exc)
        return 2
