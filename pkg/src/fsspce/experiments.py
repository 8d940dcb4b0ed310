"""Repeated-run experiments, sweeps and their reports.

Run ``r`` of an experiment with base seed ``s`` uses the per-run seed
``mix64(s, r)`` (SplitMix64, see :mod:`fsspce.rng`) and four Philox streams
derived from it: 0 for the training sample, 1 for the cross-validation
folds, 2 and 3 for the two independent evaluation samples feeding the KL
estimate (true outputs and model predictions respectively). Runs are
therefore independent of execution order and can be spread over processes.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, replace
from pathlib import Path

import numpy as np

from .benchmark import BenchmarkConfig, fit_benchmark_sparse_pce
from .errors import ParameterError
from .fss import FssConfig, check_threshold, fit_fss_pce
from .metrics import kl_divergence_knn, relative_error, summarize_runs
from .models import get_model
from .rng import make_rng, mix64
from .serialization import load_dataset, write_trace_csv

METHODS = ("fss", "benchmark")
SEED_RULE = "splitmix64(base_seed + (run + 1) * 0x9E3779B97F4A7C15); streams Philox(run_seed + k)"

_STREAM_DATA, _STREAM_FOLDS, _STREAM_TRUTH, _STREAM_MODEL = range(4)


@dataclass(frozen=True)
class ExperimentConfig:
    example: str
    method: str = "fss"
    order: int = 2
    samples: int = 100
    runs: int = 50
    seed: int = 0
    epsilon: float | str = "auto"
    cv_folds: int = 5
    eval_samples: int = 10_000
    timing: bool = False
    trace_dir: str | None = None

    def __post_init__(self):
        if self.method not in METHODS + ("both",):
            raise ParameterError(f"method must be fss, benchmark or both, got {self.method!r}")
        if not self.example.startswith("csv:"):
            get_model(self.example)
        elif not self.example[4:]:
            raise ParameterError("csv example needs a path: csv:<path>")
        if int(self.runs) < 1:
            raise ParameterError("runs must be >= 1")
        if int(self.samples) < 2:
            raise ParameterError("samples must be >= 2")
        if int(self.order) < 0:
            raise ParameterError("order must be >= 0")
        if int(self.cv_folds) < 2:
            raise ParameterError("cv_folds must be >= 2")
        if int(self.eval_samples) < 2:
            raise ParameterError("eval_samples must be >= 2")
        if int(self.seed) < 0:
            raise ParameterError("seed must be non-negative")
        if self.epsilon != "auto":
            object.__setattr__(self, "epsilon", check_threshold(self.epsilon))

    @property
    def methods(self):
        return METHODS if self.method == "both" else (self.method,)

    @property
    def is_csv(self):
        return self.example.startswith("csv:")


def _fit(method, data, config, fold_rng):
    if method == "fss":
        res = fit_fss_pce(data, FssConfig(config.order, config.epsilon, config.cv_folds), fold_rng)
    else:
        res = fit_benchmark_sparse_pce(data, BenchmarkConfig(config.order, config.cv_folds), fold_rng)
    return res


def run_single(config, run, csv_data=None):
    """All methods of one run; returns a list of row dictionaries."""
    run_seed = mix64(config.seed, run)
    if config.is_csv:
        data, model = csv_data, None
    else:
        model = get_model(config.example)
        data = model.sample(config.samples, make_rng(run_seed, _STREAM_DATA))
        truth = model.sample(config.eval_samples, make_rng(run_seed, _STREAM_TRUTH)).outputs
        eval_inputs = model.inputs(config.eval_samples, make_rng(run_seed, _STREAM_MODEL))

    rows = []
    for method in config.methods:
        # same folds for every method of a run
        fold_rng = make_rng(run_seed, _STREAM_FOLDS)
        t0 = time.perf_counter()
        res = _fit(method, data, config, fold_rng)
        elapsed = time.perf_counter() - t0
        sd = res.model.sd
        re = kl = None
        if model is not None:
            re = relative_error(model.reference_sd, sd)
            with np.errstate(all="ignore"):
                pred = res.model.predict(eval_inputs)
            kl = kl_divergence_knn(truth, pred)
        trace_path = None
        if config.trace_dir is not None:
            trace_path = str(Path(config.trace_dir) / f"trace_{method}_run{run:04d}.csv")
            with open(trace_path, "w", newline="", encoding="utf-8") as fh:
                write_trace_csv(res.trace, fh)
        rows.append({
            "run": run,
            "method": method,
            "run_seed": run_seed,
            "sd": sd,
            "re": re,
            "kl": kl,
            "kl_infinite": kl is not None and math.isinf(kl),
            "time_s": elapsed if config.timing else None,
            "terms": len(res.trace) + 1,
            "warnings": list(res.warnings),
            "trace": trace_path,
        })
    return rows


def _run_job(args):
    config, run, csv_data = args
    return run_single(config, run, csv_data)


def resolve_jobs(jobs=None):
    """PCE_JOBS, when set, overrides ``jobs``."""
    env = os.environ.get("PCE_JOBS")
    if env is not None and env.strip():
        try:
            jobs = int(env)
        except ValueError:
            raise ParameterError(f"PCE_JOBS must be an integer, got {env!r}") from None
    jobs = 1 if jobs is None else int(jobs)
    if jobs < 1:
        raise ParameterError("jobs must be >= 1")
    return jobs


def aggregate_rows(rows, reference_sd=None):
    """Aggregates over one method's rows (recomputable from the rows alone).

    ``re_mean`` averages the per-run relative errors; ``re_of_mean`` is the
    relative error of ``sd_mean``, the convention of published result tables.
    """
    sd = summarize_runs([r["sd"] for r in rows])
    out = {"sd_mean": sd.mean, "sd_se": sd.se}
    res = [r["re"] for r in rows]
    if any(v is None for v in res):
        out["re_mean"] = out["re_se"] = out["re_of_mean"] = None
    else:
        re = summarize_runs(res)
        out["re_mean"], out["re_se"] = re.mean, re.se
        out["re_of_mean"] = relative_error(reference_sd, sd.mean) if reference_sd else None
    kls = [r["kl"] for r in rows]
    if any(v is None for v in kls):
        out.update(kl_mean=None, kl_se=None, kl_infinite=False)
    else:
        kl = summarize_runs(kls)
        out.update(kl_mean=kl.mean, kl_se=kl.se, kl_infinite=kl.infinite)
    times = [r["time_s"] for r in rows]
    out["time_mean_s"] = None if any(t is None for t in times) else float(np.mean(times))
    out["runs"] = len(rows)
    return out


def run_experiment(config, jobs=1):
    """Execute every run and assemble the report dictionary."""
    csv_data = None
    if config.is_csv:
        csv_data = load_dataset(config.example[4:])
        if csv_data.size < config.cv_folds:
            raise ParameterError(f"{csv_data.size} rows cannot be split into {config.cv_folds} folds")
    if config.trace_dir is not None:
        Path(config.trace_dir).mkdir(parents=True, exist_ok=True)
    jobs = resolve_jobs(jobs)
    work = [(config, r, csv_data) for r in range(config.runs)]
    if jobs > 1 and config.runs > 1:
        with ProcessPoolExecutor(max_workers=min(jobs, config.runs)) as pool:
            results = list(pool.map(_run_job, work))
    else:
        results = [_run_job(w) for w in work]
    rows = sorted((row for batch in results for row in batch), key=lambda r: (r["run"], r["method"]))

    reference_sd = None if config.is_csv else get_model(config.example).reference_sd
    echo = asdict(config)
    echo["samples"] = csv_data.size if csv_data is not None else config.samples
    if not config.is_csv:
        model = get_model(config.example)
        echo["reference_sd"] = model.reference_sd
        echo["reference_source"] = model.reference_source
    echo["seed_rule"] = SEED_RULE
    echo["kl_direction"] = "D(true || model), k=1 nearest neighbour"
    return {
        "config": echo,
        "runs": rows,
        "aggregate": {m: aggregate_rows([r for r in rows if r["method"] == m], reference_sd)
                      for m in config.methods},
    }


SWEEP_AXES = ("order", "samples")
SWEEP_COLUMNS = ("axis_value", "method", "re_mean", "re_se", "kl_mean", "time_mean")


def run_sweep(base, axis, values, jobs=1):
    """One experiment per axis value (timing always on). Returns (rows, reports)."""
    if axis not in SWEEP_AXES:
        raise ParameterError(f"sweep axis must be one of {SWEEP_AXES}, got {axis!r}")
    values = [int(v) for v in values]
    if not values:
        raise ParameterError("sweep needs at least one axis value")
    table, reports = [], []
    for v in values:
        report = run_experiment(replace(base, timing=True, **{axis: v}), jobs)
        reports.append(report)
        for method, agg in report["aggregate"].items():
            table.append({
                "axis_value": v,
                "method": method,
                "re_mean": agg["re_mean"],
                "re_se": agg["re_se"],
                "kl_mean": math.inf if agg["kl_infinite"] else agg["kl_mean"],
                "time_mean": agg["time_mean_s"],
            })
    return table, reports


def json_safe(obj):
    """Replace non-finite floats by None so the report is strict JSON."""
    if isinstance(obj, dict):
        return {k: json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [json_safe(v) for v in obj]
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, np.integer):
        return int(obj)
    return obj
