"""Command-line entry point: ``fsspce {run,sweep,sample,fit,reference}``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys

from . import __version__
from .benchmark import BenchmarkConfig, fit_benchmark_sparse_pce
from .errors import ParameterError
from .experiments import SWEEP_AXES, SWEEP_COLUMNS, ExperimentConfig, json_safe, run_experiment, run_sweep
from .fss import FssConfig, fit_fss_pce
from .models import MODELS, get_model, monte_carlo_reference
from .rng import make_rng
from .serialization import dump_model, load_dataset, model_to_dict, write_dataset_csv, write_trace_csv

log = logging.getLogger("fsspce")


def _epsilon(text):
    if text == "auto":
        return "auto"
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"epsilon must be a number in (0, 1) or 'auto', got {text!r}") from None


def _int_list(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _experiment_flags(p, runs=50):
    p.add_argument("--example", required=True,
                   help=f"one of {', '.join(MODELS)} or csv:<path>")
    p.add_argument("--method", choices=("fss", "benchmark", "both"), default="fss")
    p.add_argument("--order", type=int, default=2, help="total polynomial degree p")
    p.add_argument("--samples", type=int, default=100, help="training observations m per run")
    p.add_argument("--runs", type=int, default=runs)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--epsilon", type=_epsilon, default="auto", help="screening threshold or 'auto' (CV)")
    p.add_argument("--cv-folds", type=int, default=5)
    p.add_argument("--eval-samples", type=int, default=10_000, help="size of each KL evaluation sample")
    p.add_argument("--jobs", type=int, default=1, help="parallel runs (PCE_JOBS overrides)")
    p.add_argument("--trace-dir", default=None, help="write one selection-trace CSV per run and method")


def build_parser():
    parser = argparse.ArgumentParser(prog="fsspce", description="Data-driven sparse polynomial chaos expansions.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log warnings to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="repeated-run experiment, JSON report")
    _experiment_flags(p)
    p.add_argument("--timing", action="store_true",
                   help="record fit wall time (makes the report non-reproducible byte for byte)")
    p.add_argument("--out", default="-", help="report path ('-' for stdout)")
    p.add_argument("--format", choices=("json", "csv"), default="json",
                   help="full JSON report, or the per-run rows as CSV")

    p = sub.add_parser("sweep", help="experiments over orders or sample sizes, tidy CSV")
    _experiment_flags(p)
    p.add_argument("--axis", choices=SWEEP_AXES, required=True)
    p.add_argument("--values", type=_int_list, required=True, help="comma-separated axis values")
    p.add_argument("--out", default="-")
    p.add_argument("--format", choices=("csv", "json"), default="csv")

    p = sub.add_parser("sample", help="export a generated dataset as CSV")
    p.add_argument("--example", required=True, choices=sorted(MODELS))
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="-")
    p.add_argument("--format", choices=("csv",), default="csv")

    p = sub.add_parser("fit", help="fit a sparse PCE to a CSV file (header x1..xn,y)")
    p.add_argument("data", help="input CSV")
    p.add_argument("--method", choices=("fss", "benchmark"), default="fss")
    p.add_argument("--order", type=int, default=2)
    p.add_argument("--epsilon", type=_epsilon, default="auto")
    p.add_argument("--cv-folds", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="-", help="model JSON path ('-' for stdout)")
    p.add_argument("--trace", default=None, help="selection-trace CSV path")
    p.add_argument("--format", choices=("json",), default="json")

    p = sub.add_parser("reference", help="Monte Carlo sigma_Y of an example")
    p.add_argument("--example", required=True, choices=sorted(MODELS))
    p.add_argument("--runs", type=int, default=100)
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="-")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    return parser


class _Output:
    def __init__(self, path):
        self.path = path
        self.fh = None

    def __enter__(self):
        if self.path == "-":
            return sys.stdout
        self.fh = open(self.path, "w", newline="", encoding="utf-8")
        return self.fh

    def __exit__(self, *exc):
        if self.fh is not None:
            self.fh.close()


def _write_json(doc, path):
    with _Output(path) as fh:
        json.dump(json_safe(doc), fh, indent=2, allow_nan=False)
        fh.write("\n")


def _config(args, timing=False):
    return ExperimentConfig(
        example=args.example, method=args.method, order=args.order, samples=args.samples,
        runs=args.runs, seed=args.seed, epsilon=args.epsilon, cv_folds=args.cv_folds,
        eval_samples=args.eval_samples, timing=timing, trace_dir=args.trace_dir,
    )


RUN_COLUMNS = ("run", "method", "run_seed", "sd", "re", "kl", "time_s", "terms", "warnings")


def _cmd_run(args):
    report = run_experiment(_config(args, args.timing), args.jobs)
    if args.format == "json":
        _write_json(report, args.out)
        return
    with _Output(args.out) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RUN_COLUMNS)
        for row in report["runs"]:
            w.writerow([_fmt("; ".join(row[c])) if c == "warnings" else _fmt(row[c]) for c in RUN_COLUMNS])


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _cmd_sweep(args):
    table, reports = run_sweep(_config(args, True), args.axis, args.values, args.jobs)
    if args.format == "json":
        _write_json({"axis": args.axis, "table": table, "reports": reports}, args.out)
        return
    with _Output(args.out) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SWEEP_COLUMNS)
        for row in table:
            w.writerow([_fmt(row[c]) for c in SWEEP_COLUMNS])


def _cmd_sample(args):
    if args.samples < 1:
        raise ParameterError("samples must be >= 1")
    data = get_model(args.example).sample(args.samples, make_rng(args.seed))
    with _Output(args.out) as fh:
        write_dataset_csv(data, fh)


def _cmd_fit(args):
    data = load_dataset(args.data)
    rng = make_rng(args.seed)
    if args.method == "fss":
        res = fit_fss_pce(data, FssConfig(args.order, args.epsilon, args.cv_folds), rng)
        extra = {"threshold": res.threshold}
    else:
        res = fit_benchmark_sparse_pce(data, BenchmarkConfig(args.order, args.cv_folds), rng)
        extra = {"steps": res.steps}
    for w in res.warnings:
        log.warning(w)
    doc = model_to_dict(res.model)
    doc["summary"] = {"method": args.method, "mean": res.model.mean, "sd": res.model.sd,
                      "terms": res.model.size, "warnings": list(res.warnings), **extra}
    if args.trace:
        with open(args.trace, "w", newline="", encoding="utf-8") as fh:
            write_trace_csv(res.trace, fh)
    _write_json(doc, args.out)


def _cmd_reference(args):
    model = get_model(args.example)
    mean, se = monte_carlo_reference(model, args.runs, args.samples, args.seed)
    doc = {"example": model.name, "runs": args.runs, "samples": args.samples, "seed": args.seed,
           "sd_mean": mean, "sd_se": se}
    if args.format == "json":
        _write_json(doc, args.out)
    else:
        with _Output(args.out) as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(doc.keys())
            w.writerow(_fmt(v) for v in doc.values())


COMMANDS = {"run": _cmd_run, "sweep": _cmd_sweep, "sample": _cmd_sample, "fit": _cmd_fit,
            "reference": _cmd_reference}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        COMMANDS[args.command](args)
    except (ParameterError, ValueError, ArithmeticError, OSError) as err:
        print(f"fsspce {args.command}: error: {err}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
