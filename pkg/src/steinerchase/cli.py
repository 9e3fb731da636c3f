"""Command-line harness: generate instances, run chasers, benchmark suites.

Exit codes: 0 on success, 2 on solver failure (certified accuracy not reached,
empty sublevel set, sampling budget exceeded, or an aborted run), 3 on parse
or input errors. Usage errors keep argparse's conventional exit code 2.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import __version__
from .bench import (InstanceParseError, compute_opt, competitive_normalizer,
                    emit_report, gen_nested, gen_random, gen_rotating,
                    load_instance, run, run_suite, save_instance)
from .chaser import ChaserOptions
from .solver import OPTIMAL
from .steiner import OracleBudgetExceeded
from .work_function import AccuracyNotReached, BudgetInfeasible


def _add_option_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--eps-schedule", choices=("inverse_square", "flat"),
                   default="inverse_square", help="estimator accuracy schedule")
    p.add_argument("--eps-scale", type=float, default=1.0,
                   help="multiplier on the inverse-square schedule")
    p.add_argument("--flat-fraction", type=float, default=0.08,
                   help="eps as a fraction of r for the flat schedule")
    p.add_argument("--delta", type=float, default=1.0,
                   help="estimator confidence parameter")
    p.add_argument("--sample-cap", type=int, default=10_000_000,
                   help="support-query budget per step")
    p.add_argument("--no-sample-cap", action="store_true",
                   help="disable the support-query budget")
    p.add_argument("--anchors", type=int, default=None,
                   help="support-cache anchor directions (default: by dimension)")
    p.add_argument("--anchor-eps-fraction", type=float, default=5e-3,
                   help="anchor solve tolerance as a fraction of r")
    p.add_argument("--anchor-max-iter", type=int, default=3000,
                   help="iteration cap per anchor solve")
    p.add_argument("--minwf-max-iter", type=int, default=400_000,
                   help="iteration cap for the work-function minimum")
    p.add_argument("--quadrature-resolution", type=int, default=20000,
                   help="angular nodes for the planar ideal variant")
    p.add_argument("--ideal-r-rule", choices=("reset", "double"), default="reset",
                   help="scale update rule for the planar ideal variant")


def _options_from_args(args) -> ChaserOptions:
    return ChaserOptions(
        eps_schedule=args.eps_schedule,
        eps_scale=args.eps_scale,
        flat_fraction=args.flat_fraction,
        delta=args.delta,
        sample_cap=None if args.no_sample_cap else args.sample_cap,
        anchors=args.anchors,
        anchor_eps_fraction=args.anchor_eps_fraction,
        anchor_max_iter=args.anchor_max_iter,
        minwf_max_iter=args.minwf_max_iter,
        quadrature_resolution=args.quadrature_resolution,
        ideal_r_rule=args.ideal_r_rule,
    )


def _cmd_gen(args) -> int:
    if args.kind == "random":
        inst = gen_random(args.d, args.T, args.seed,
                          violation_prob=args.violation_prob)
    elif args.kind == "rotating":
        inst = gen_rotating(args.T, args.step_angle, offset=args.offset,
                            start_angle=args.start_angle)
    else:
        inst = gen_nested(args.d, args.T, args.seed)
    save_instance(inst, args.out)
    print(f"wrote {inst.label} ({inst.dimension}d, {inst.length} requests) to {args.out}")
    return 0


def _cmd_run(args) -> int:
    inst = load_instance(args.instance)
    options = _options_from_args(args)
    report = run(inst, algorithm=args.algo, seed=args.seed,
                 options=options, compute_optimum=not args.no_opt)
    if args.report:
        emit_report(report, args.report)
    summary = report.to_dict()
    if args.summary:
        with open(args.summary, "w") as fh:
            json.dump(summary, fh, indent=2, sort_keys=True)
            fh.write("\n")
    print(f"{summary['algorithm']} on {summary['instance']}: "
          f"cost {summary['total_cost']:.6g}", end="")
    if not args.no_opt:
        print(f", opt {summary['opt_value']:.6g} (gap {summary['opt_gap']:.2e}), "
              f"ratio {summary['ratio']:.4g}", end="")
    print(f", flagged {summary['flagged_steps']}")
    if report.aborted:
        print(f"aborted: {report.abort_reason}", file=sys.stderr)
        return 2
    return 0


def _cmd_opt(args) -> int:
    inst = load_instance(args.instance)
    res = compute_opt(inst, eps=args.eps)
    print(f"opt {res.value!r} gap {res.achieved_gap!r} "
          f"iterations {res.iterations} status {res.status}")
    return 0 if res.status == OPTIMAL else 2


def _cmd_suite(args) -> int:
    with open(args.config) as fh:
        config = json.load(fh)
    rows = []

    def progress(summary):
        rows.append(summary)
        print(f"  {summary['algorithm']:>8s} {summary['instance']:<28s} "
              f"cost {summary['total_cost']:>10.4f} ratio {summary['ratio']:>8.4f} "
              f"flagged {summary['flagged_steps']}",
              flush=True)

    summaries = run_suite(config, report_dir=args.report_dir, progress=progress)
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(summaries, fh, indent=2, sort_keys=True)
            fh.write("\n")
    finite = [s for s in summaries
              if not s["aborted"] and s["algorithm"] == "steiner"
              and s["ratio"] == s["ratio"]]
    if finite:
        worst = max(finite, key=lambda s: s["ratio"] / s["normalizer"])
        c = worst["ratio"] / worst["normalizer"]
        print(f"steiner runs: {len(finite)}, worst ratio/normalizer C = {c:.4f} "
              f"({worst['instance']})")
    aborted = [s for s in summaries if s["aborted"]]
    if aborted:
        print(f"{len(aborted)} runs aborted", file=sys.stderr)
        return 2
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chase",
        description="Chase half-space request streams with work-function "
                    "Steiner points.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate an instance file")
    g.add_argument("--kind", choices=("random", "rotating", "nested"),
                   default="random")
    g.add_argument("--d", type=int, default=2, help="dimension")
    g.add_argument("--T", type=int, default=50, help="number of requests")
    g.add_argument("--seed", type=int, default=0, help="generator seed")
    g.add_argument("--violation-prob", type=float, default=0.7,
                   help="random kind: request violation rate")
    g.add_argument("--step-angle", type=float, default=0.2,
                   help="rotating kind: radians per step")
    g.add_argument("--offset", type=float, default=1.0,
                   help="rotating kind: half-space offset")
    g.add_argument("--start-angle", type=float, default=0.0,
                   help="rotating kind: first normal angle")
    g.add_argument("--out", required=True, help="output path")
    g.set_defaults(func=_cmd_gen)

    r = sub.add_parser("run", help="run one policy on an instance")
    r.add_argument("--instance", required=True)
    r.add_argument("--algo", choices=("steiner", "greedy", "ideal2d"),
                   default="steiner")
    r.add_argument("--seed", type=int, default=0, help="sampling seed")
    r.add_argument("--report", default=None, help="per-step CSV output path")
    r.add_argument("--summary", default=None, help="JSON summary output path")
    r.add_argument("--no-opt", action="store_true",
                   help="skip the offline optimum")
    _add_option_flags(r)
    r.set_defaults(func=_cmd_run)

    o = sub.add_parser("opt", help="certified offline optimum of an instance")
    o.add_argument("--instance", required=True)
    o.add_argument("--eps", type=float, default=None)
    o.set_defaults(func=_cmd_opt)

    s = sub.add_parser("suite", help="run a benchmark suite from a JSON config")
    s.add_argument("--config", required=True)
    s.add_argument("--report-dir", default=None)
    s.add_argument("--out", default=None, help="JSON summaries output path")
    s.set_defaults(func=_cmd_suite)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InstanceParseError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (ValueError, TypeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (AccuracyNotReached, BudgetInfeasible, OracleBudgetExceeded) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
