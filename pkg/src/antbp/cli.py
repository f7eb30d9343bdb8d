"""Command-line harness: run one scenario, sweep an experiment plan, or
list the built-in plans. Output directory defaults to $ANTBP_OUT or ./out.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import plans
from .engine import SCHEMES, ScenarioConfig, run_scenario

DEFAULT_OUT = os.environ.get("ANTBP_OUT", "out")


def load_config(path: str, overrides: dict) -> ScenarioConfig:
    with open(path) as fh:
        d = json.load(fh)
    d.update({k: v for k, v in overrides.items() if v is not None})
    return ScenarioConfig(**d)


def cmd_run(args) -> int:
    overrides = {"master_seed": args.seed, "scheme": args.scheme}
    try:
        if args.config:
            config = load_config(args.config, overrides)
        else:
            config = ScenarioConfig(
                **{k: v for k, v in overrides.items() if v is not None}
            )
    except (ValueError, TypeError, json.JSONDecodeError, OSError) as exc:
        print(f"error: bad config: {exc}", file=sys.stderr)
        return 2
    try:
        report = run_scenario(config)
    except RuntimeError as exc:
        print(f"error: run aborted: {exc}", file=sys.stderr)
        return 1
    os.makedirs(args.out, exist_ok=True)
    plans.write_runs_csv([report], os.path.join(args.out, "run.csv"))
    plans.write_throughput_csv(report, os.path.join(args.out, "throughput.csv"))
    s = report.classes["streaming"]
    b = report.classes["bursty"]
    print(
        f"{config.scheme} seed={config.master_seed} "
        f"streaming_dr={s.delivery_ratio:.3f} bursty_dr={b.delivery_ratio:.3f} "
        f"throughput={report.throughput_mean:.2f}"
    )
    return 0


def cmd_sweep(args) -> int:
    builtin = plans.builtin_plans(instances=args.instances)
    if args.plan in builtin:
        plan = builtin[args.plan]
    elif os.path.exists(args.plan):
        try:
            plan = plans.plan_from_file(args.plan)
        except (ValueError, KeyError, json.JSONDecodeError) as exc:
            print(f"error: bad plan file: {exc}", file=sys.stderr)
            return 2
        plan.instances = args.instances
    else:
        print(f"error: unknown plan: {args.plan}", file=sys.stderr)
        return 2
    out_dir = os.path.join(args.out, plan.name)
    _, summary, failures = plans.run_sweep(
        plan, args.seed, out_dir, jobs=args.jobs
    )
    print(f"{plan.name}: {len(summary)} summary rows -> {out_dir}")
    if failures:
        print(f"warning: {len(failures)} failed points recorded", file=sys.stderr)
    return 0


def cmd_list_plans(_args) -> int:
    for name, plan in builtins_summary():
        print(f"{name}: {len(plan.points)} points x {len(plan.schemes)} schemes")
    return 0


def builtins_summary():
    return sorted(plans.builtin_plans().items())


def make_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="antbp",
        description="Wireless multi-hop routing simulator and experiment harness",
    )
    sub = p.add_subparsers(dest="command", required=True)

    runp = sub.add_parser("run", help="run a single scenario")
    runp.add_argument("config", nargs="?", help="scenario config JSON")
    runp.add_argument("--scheme", choices=SCHEMES)
    runp.add_argument("--seed", type=int, default=None)
    runp.add_argument("--out", default=DEFAULT_OUT)
    runp.set_defaults(func=cmd_run)

    sweepp = sub.add_parser("sweep", help="run an experiment plan")
    sweepp.add_argument("plan", help="built-in plan name or plan JSON path")
    sweepp.add_argument("--seed", type=int, default=0)
    sweepp.add_argument("--instances", type=int, default=10)
    sweepp.add_argument("--jobs", type=int, default=1)
    sweepp.add_argument("--out", default=DEFAULT_OUT)
    sweepp.set_defaults(func=cmd_sweep)

    lp = sub.add_parser("list-plans", help="list built-in experiment plans")
    lp.set_defaults(func=cmd_list_plans)
    return p


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
