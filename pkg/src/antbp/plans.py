"""Built-in experiment plans and sweep execution.

A plan is a named grid of scenario points; each point is run for every
scheme and instance with paired seeds (instance i uses master seed
base_seed + i for every scheme), then aggregated per point.
"""

from __future__ import annotations

import csv
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

from . import metrics
from .engine import SCHEMES, ScenarioConfig, run_scenario

RUN_FIELDS = [
    "scheme", "L_s", "L_b", "class", "injected", "delivered",
    "delivery_ratio", "mean_latency", "throughput_mean", "master_seed",
]


@dataclass
class ExperimentPlan:
    name: str
    base: ScenarioConfig
    points: list           # list of dicts of ScenarioConfig overrides
    schemes: tuple
    instances: int = 10

    def __post_init__(self):
        if not self.points:
            raise ValueError("sweep values must be non-empty")
        if self.instances < 1:
            raise ValueError("instance count must be >= 1")


def builtin_plans(instances: int = 10) -> dict:
    base = ScenarioConfig()
    mixed = ExperimentPlan(
        name="mixed",
        base=replace(base, streaming_load=2.0),
        points=[{"bursty_load": lb} for lb in [0.5] + list(range(1, 11))],
        schemes=SCHEMES,
        instances=instances,
    )
    robustness = ExperimentPlan(
        name="robustness",
        base=base,
        points=[
            # virtual loads (1.0, 1.0), physical halved / doubled
            {"virtual_streaming_load": 1.0, "virtual_bursty_load": 1.0,
             "streaming_load": 0.5, "bursty_load": 0.5},
            {"virtual_streaming_load": 1.0, "virtual_bursty_load": 1.0,
             "streaming_load": 2.0, "bursty_load": 2.0},
            # virtual loads (1.0, 10.0), physical halved / doubled
            {"virtual_streaming_load": 1.0, "virtual_bursty_load": 10.0,
             "streaming_load": 0.5, "bursty_load": 5.0},
            {"virtual_streaming_load": 1.0, "virtual_bursty_load": 10.0,
             "streaming_load": 2.0, "bursty_load": 20.0},
        ],
        schemes=SCHEMES,
        instances=instances,
    )
    throughput = ExperimentPlan(
        name="throughput",
        base=replace(base, bursty_probability=0.0, bursty_load=0.0),
        points=[{"streaming_load": ls} for ls in [0.5] + list(range(1, 13))],
        schemes=SCHEMES,
        instances=instances,
    )
    return {"mixed": mixed, "robustness": robustness, "throughput": throughput}


def plan_from_file(path: str) -> ExperimentPlan:
    with open(path) as fh:
        d = json.load(fh)
    base = ScenarioConfig(**d.get("base", {}))
    return ExperimentPlan(
        name=d["name"],
        base=base,
        points=d["points"],
        schemes=tuple(d.get("schemes", SCHEMES)),
        instances=int(d.get("instances", 10)),
    )


def _run_one(config: ScenarioConfig):
    return run_scenario(config)


def sweep_configs(plan: ExperimentPlan, base_seed: int):
    """All (point index, config) pairs with paired seeding across schemes."""
    out = []
    for p_idx, overrides in enumerate(plan.points):
        for scheme in plan.schemes:
            for i in range(plan.instances):
                cfg = replace(
                    plan.base, scheme=scheme, master_seed=base_seed + i,
                    **overrides,
                )
                out.append((p_idx, cfg))
    return out


def run_sweep(plan: ExperimentPlan, base_seed: int, out_dir: str, jobs: int = 1):
    """Run every point; failures are recorded per point and the sweep
    continues. Writes runs.csv (raw) and summary.csv (aggregated)."""
    os.makedirs(out_dir, exist_ok=True)
    work = sweep_configs(plan, base_seed)
    reports = []
    failures = []
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = pool.map(_run_one, [cfg for _, cfg in work])
            for (p_idx, cfg), rep in zip(work, results):
                reports.append(rep)
    else:
        for p_idx, cfg in work:
            try:
                reports.append(run_scenario(cfg))
            except Exception as exc:  # record and continue
                failures.append(
                    {"point": p_idx, "scheme": cfg.scheme,
                     "seed": cfg.master_seed, "error": str(exc)}
                )
    write_runs_csv(reports, os.path.join(out_dir, "runs.csv"))
    summary = metrics.aggregate(reports)
    write_summary_csv(summary, os.path.join(out_dir, "summary.csv"))
    if failures:
        with open(os.path.join(out_dir, "failures.json"), "w") as fh:
            json.dump(failures, fh, indent=2)
    return reports, summary, failures


def write_runs_csv(reports, path: str):
    tmp = path + ".tmp"
    with open(tmp, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=RUN_FIELDS)
        w.writeheader()
        for rep in reports:
            for row in rep.csv_rows():
                w.writerow(row)
    os.replace(tmp, path)


def write_summary_csv(summary_rows, path: str):
    tmp = path + ".tmp"
    with open(tmp, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(summary_rows[0].keys()))
        w.writeheader()
        w.writerows(summary_rows)
    os.replace(tmp, path)


def write_throughput_csv(report, path: str):
    tmp = path + ".tmp"
    with open(tmp, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["slot", "delivered"])
        for t, d in enumerate(report.throughput_series):
            w.writerow([t, int(d)])
    os.replace(tmp, path)
