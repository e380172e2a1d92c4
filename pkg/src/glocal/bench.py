"""Discovery-curve benchmark harness.

Runs each query method over each dataset for a list of seeds, records the
per-iteration traces, and aggregates cumulative-anomaly curves as
mean and standard deviation across seeds. Individual run failures are
reported and skipped; the rest of the sweep continues.
"""

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .baselines import (run_loda_aad_session, run_random_session,
                        run_unweighted_session)
from .datasets import load_csv, make_benchmark, make_toy, standardize
from .loda import build_ensemble
from .objective import LossConfig
from .session import OracleAnalyst, run_session, start_session, write_trace

logger = logging.getLogger(__name__)

METHODS = ("glad", "loda", "loda-aad", "random")
BUILTIN_DATASETS = ("toy", "abalone", "yeast")


@dataclass
class BenchConfig:
    datasets: list
    methods: tuple = METHODS
    n_members: int = 15
    budget: int = 60
    tau: float = 0.03
    bias: float = 0.5
    lambda_prior: float = 1.0
    seeds: tuple = tuple(range(10))
    out_dir: str = "bench_out"
    standardize_data: bool = True

    def __post_init__(self):
        bad = [m for m in self.methods if m not in METHODS]
        if bad:
            raise ValueError("unknown methods: %s (choose from %s)"
                             % (", ".join(bad), ", ".join(METHODS)))
        if not self.seeds:
            raise ValueError("need at least one seed")

    def loss_cfg(self):
        return LossConfig(lambda_prior=self.lambda_prior, tau=self.tau,
                          bias=self.bias)


def resolve_dataset(name_or_path):
    """Built-in name or a CSV path."""
    key = str(name_or_path).lower()
    if key == "toy":
        return make_toy(seed=0)
    if key in ("abalone", "yeast"):
        return make_benchmark(key)
    return load_csv(name_or_path)


def run_method(method, dataset, cfg, seed):
    """One (method, dataset, seed) run; returns the trace rows."""
    analyst = OracleAnalyst(dataset)
    if method == "random":
        return run_random_session(dataset, cfg.budget, analyst, seed=seed)
    if method == "glad":
        state = start_session(dataset, n_members=cfg.n_members,
                              budget=cfg.budget, seed=seed,
                              loss_cfg=cfg.loss_cfg(),
                              standardize_data=cfg.standardize_data)
        return run_session(state, analyst).trace

    if cfg.standardize_data:
        ds_std, _ = standardize(dataset)
    else:
        ds_std = dataset
    ensemble = build_ensemble(ds_std, cfg.n_members, seed)
    if method == "loda":
        return run_unweighted_session(dataset, ensemble, cfg.budget, analyst,
                                      X=ds_std.X)
    if method == "loda-aad":
        trace, _ = run_loda_aad_session(dataset, ensemble, cfg.budget, analyst,
                                        X=ds_std.X, tau=cfg.tau)
        return trace
    raise ValueError("unknown method: %r" % method)


def discovery_curve(trace, budget):
    """Cumulative anomalies per iteration, padded to `budget` with the
    final count when a run exhausted the data early."""
    curve = np.zeros(budget)
    last = 0
    for r in trace:
        last = r.cumulative_anomalies
        curve[r.iteration - 1] = last
    for i in range(len(trace), budget):
        curve[i] = last
    return curve


@dataclass
class BenchResult:
    curves: dict = field(default_factory=dict)   # (dataset, method) -> (mean, std)
    summary: list = field(default_factory=list)  # (dataset, method, mean_final, std_final)
    failures: list = field(default_factory=list)


def run_bench(cfg):
    out_root = Path(cfg.out_dir)
    result = BenchResult()
    for ds_name in cfg.datasets:
        dataset = resolve_dataset(ds_name)
        ds_dir = out_root / dataset.name
        ds_dir.mkdir(parents=True, exist_ok=True)
        for method in cfg.methods:
            curves = []
            for seed in cfg.seeds:
                try:
                    trace = run_method(method, dataset, cfg, seed)
                except Exception as exc:
                    logger.exception("run failed: %s/%s seed %d", dataset.name,
                                     method, seed)
                    result.failures.append((dataset.name, method, seed, str(exc)))
                    continue
                write_trace(trace, ds_dir / ("trace_%s_%d.csv" % (method, seed)))
                curves.append(discovery_curve(trace, cfg.budget))
            if not curves:
                continue
            stack = np.vstack(curves)
            mean, std = stack.mean(axis=0), stack.std(axis=0)
            result.curves[(dataset.name, method)] = (mean, std)
            with open(ds_dir / ("curves_%s.csv" % method), "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(["iteration", "mean_anomalies", "std_anomalies"])
                for i in range(cfg.budget):
                    w.writerow([i + 1, repr(float(mean[i])), repr(float(std[i]))])
            result.summary.append((dataset.name, method,
                                   float(mean[-1]), float(std[-1])))
    return result


def format_summary(result):
    lines = ["%-12s %-10s %10s %8s" % ("dataset", "method", "found@B", "std")]
    for ds, method, mean_final, std_final in result.summary:
        lines.append("%-12s %-10s %10.2f %8.2f" % (ds, method, mean_final, std_final))
    for ds, method, seed, err in result.failures:
        lines.append("FAILED %s/%s seed %d: %s" % (ds, method, seed, err))
    return "\n".join(lines)
