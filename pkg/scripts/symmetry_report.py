#!/usr/bin/env python3
"""Branch-and-bound node counts per formulation with solver symmetry handling off.

Either reads an existing ``results.csv`` (``--results``) or generates and
solves a fresh batch (``--seed``/``--settings``).  Only instances whose PSH
plant has ``--units`` units (default 3) are reported.  Output is a CSV with
one line per formulation; the ordering by mean node count is printed too.
Nothing here is a pass/fail check: node counts depend on the solver build.
"""

from __future__ import annotations

import argparse
import csv
import statistics
import sys
import tempfile
from pathlib import Path

from pshuc.bench import ExperimentSpec, Setting, generate_suite, read_results, run_experiment
from pshuc.solver import SolveConfig

COLUMNS = ["formulation", "instances", "solved", "mean_nodes", "median_nodes", "mean_time_s"]
FORMULATIONS = ["standard", "aggregated", "presolved"]


def report(rows, units: int = 3) -> list[dict]:
    rows = [r for r in rows if r.n_psh == units]
    out = []
    for form in sorted({r.formulation for r in rows}, key=lambda f: (FORMULATIONS.index(f) if f in FORMULATIONS else len(FORMULATIONS), f)):
        rs = [r for r in rows if r.formulation == form]
        solved = [r for r in rs if r.solved and r.nodes is not None]
        nodes = [r.nodes for r in solved]
        out.append(
            {
                "formulation": form,
                "instances": len(rs),
                "solved": len(solved),
                "mean_nodes": statistics.fmean(nodes) if nodes else None,
                "median_nodes": statistics.median(nodes) if nodes else None,
                "mean_time_s": statistics.fmean(r.time_s for r in solved) if solved else None,
            }
        )
    return out


def write_report(lines, fh) -> None:
    w = csv.DictWriter(fh, COLUMNS)
    w.writeheader()
    for line in lines:
        w.writerow({k: "" if v is None else v for k, v in line.items()})


def fresh_results(seed: int, settings: list[str], per_setting: int, time_limit: float):
    with tempfile.TemporaryDirectory() as d:
        inst_dir = Path(d) / "instances"
        generate_suite(seed, [Setting.parse(s) for s in settings], inst_dir, per_setting)
        spec = ExperimentSpec(
            instances=[str(inst_dir / "*.json")],
            formulations=FORMULATIONS,
            solve=SolveConfig(time_limit=time_limit, symmetry_detection=False),
            output_dir=str(Path(d) / "out"),
        )
        return run_experiment(spec)


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--results", help="existing results.csv")
    src.add_argument("--seed", type=int, help="generate and solve a new batch")
    p.add_argument("--settings", nargs="+", default=["6:5:3", "12:5:3", "24:4:3"])
    p.add_argument("--per-setting", type=int, default=2)
    p.add_argument("--time-limit", type=float, default=600)
    p.add_argument("--units", type=int, default=3)
    p.add_argument("--out", help="CSV path (default: stdout)")
    args = p.parse_args(argv)

    if args.results:
        rows = read_results(args.results)
    else:
        rows = fresh_results(args.seed, args.settings, args.per_setting, args.time_limit)
    lines = report(rows, args.units)
    if not lines:
        print(f"no {args.units}-unit instances in the input", file=sys.stderr)
        return 1

    if args.out:
        with open(args.out, "w", newline="") as fh:
            write_report(lines, fh)
    else:
        write_report(lines, sys.stdout)
    ranked = sorted((ln for ln in lines if ln["mean_nodes"] is not None), key=lambda ln: ln["mean_nodes"], reverse=True)
    print("mean nodes, most to fewest: " + " > ".join(f"{ln['formulation']} ({ln['mean_nodes']:.1f})" for ln in ranked), file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
