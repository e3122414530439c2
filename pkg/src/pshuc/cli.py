"""``bench`` command line: gen, run, profile, summary."""

from __future__ import annotations

import argparse
import json
import logging
import sys

from . import bench


def _cmd_gen(args) -> int:
    settings = [bench.Setting.parse(s) for s in args.settings]
    paths = bench.generate_suite(args.seed, settings, args.out, per_setting=args.per_setting)
    for p in paths:
        print(p)
    return 0


def _cmd_run(args) -> int:
    spec = bench.ExperimentSpec.from_json(args.spec)
    if args.out:
        spec.output_dir = args.out
    rows = bench.run_experiment(spec)
    print(bench.format_summary(bench.summarize(rows)))
    bad = [r for r in rows if r.status == bench.MISMATCH]
    failed = [r for r in rows if r.status in (bench.RECOVERY_FAILED, "error")]
    for r in bad + failed:
        print(f"{r.status}: {r.instance} {r.formulation}: {r.reason}", file=sys.stderr)
    print(f"results written to {spec.output_dir}/results.csv")
    return 1 if bad else 0


def _cmd_profile(args) -> int:
    rows = bench.read_results(args.input)
    points = bench.performance_profile(rows, args.limit)
    if args.out:
        bench.write_profile(points, args.out)
    else:
        print("formulation,time_s,fraction_solved")
        for f, tau, frac in points:
            print(f"{f},{tau!r},{frac!r}")
    return 0


def _cmd_summary(args) -> int:
    rows = bench.read_results(args.input)
    summary = bench.summarize(rows)
    if args.json:
        print(json.dumps([s.__dict__ for s in summary], indent=1))
    else:
        print(bench.format_summary(summary))
    return 0


def main(argv=None) -> int:
    p = argparse.ArgumentParser(prog="bench", description="PSH unit-commitment formulation benchmark")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="cmd", required=True)

    g = sub.add_parser("gen", help="generate seeded instances")
    g.add_argument("--seed", type=int, required=True)
    g.add_argument(
        "--settings",
        nargs="+",
        required=True,
        metavar="T:N:K[:identical|nonidentical]",
        help="horizon, thermal units, PSH units (K=0 for thermal only)",
    )
    g.add_argument("--per-setting", type=int, default=5)
    g.add_argument("--out", default="instances")
    g.set_defaults(func=_cmd_gen)

    r = sub.add_parser("run", help="run an experiment spec")
    r.add_argument("--spec", required=True)
    r.add_argument("--out", help="override the spec's output_dir")
    r.set_defaults(func=_cmd_run)

    pr = sub.add_parser("profile", help="performance-profile data from results.csv")
    pr.add_argument("--in", dest="input", required=True)
    pr.add_argument("--limit", type=float, help="time limit (default: largest observed time)")
    pr.add_argument("--out")
    pr.set_defaults(func=_cmd_profile)

    s = sub.add_parser("summary", help="per-setting table from results.csv")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=_cmd_summary)

    args = p.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError) as e:
        print(f"bench: error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
