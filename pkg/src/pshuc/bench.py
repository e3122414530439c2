"""Experiment harness: instance generation, batch solves, tables, profiles.

Generator policy (not taken from any published instance set):

* thermal ``q_max`` ~ U[100, 400] MW, ``q_min`` = ``q_max`` * U[0.2, 0.5]
* ramp up/down = ``q_max`` * U[0.3, 0.7]; start-up/shut-down limits
  = ``q_min`` + U[0, 0.3] * (``q_max`` - ``q_min``)
* min up/down ~ U{1..4}; every unit starts on, for ``min_up`` + U{0..3}
  periods, at ``q_min`` (so no unit is locked on at t=1)
* costs a ~ U[0.0005, 0.005], b ~ U[10, 40], c ~ U[100, 500], s ~ U[200, 1000]
* net load = thermal capacity * clip(0.65 - 0.2 cos(2 pi t / 24) + N(0, 0.02),
  0.4, 0.9), i.e. a daily shape between 40% and 90% of capacity
"""

from __future__ import annotations

import csv
import dataclasses
import glob as globmod
import json
import logging
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .formulations import FormulationError, FormulationKind, build
from .instance import Instance, ThermalUnit, attach_psh, load_instance, save_instance
from .ir import vname
from .recovery import (
    GEN,
    PUMP,
    RecoveryError,
    disaggregate,
    disaggregate_presolved,
    schedule_from_standard,
    validate_standard,
)
from .solver import ERROR, OPTIMAL, SolveConfig, SolverError, emit_mps, solve

log = logging.getLogger(__name__)

__all__ = [
    "Setting",
    "ExperimentSpec",
    "ResultRow",
    "SummaryRow",
    "CSV_COLUMNS",
    "FORMULATIONS",
    "MISMATCH",
    "RECOVERY_FAILED",
    "generate_thermal",
    "generate_instance",
    "generate_suite",
    "run_experiment",
    "summarize",
    "performance_profile",
    "write_results",
    "read_results",
    "write_profile",
    "objectives_agree",
]

CSV_COLUMNS = ["instance", "formulation", "T", "n_thermal", "n_psh", "status", "time_s", "nodes", "objective", "gap"]
FORMULATIONS = ("standard", "aggregated", "presolved", "standard+sym")
MISMATCH = "mismatch"
RECOVERY_FAILED = "recovery_failed"


# --- generation -------------------------------------------------------------


@dataclass(frozen=True)
class Setting:
    T: int
    n_thermal: int
    n_psh: int
    identical: bool = True

    @classmethod
    def parse(cls, text: str) -> "Setting":
        """``T:n_thermal:n_psh[:identical|nonidentical]``"""
        parts = text.split(":")
        if len(parts) not in (3, 4):
            raise ValueError(f"setting {text!r} is not T:n_thermal:n_psh[:identical|nonidentical]")
        ident = True
        if len(parts) == 4:
            if parts[3] not in ("identical", "nonidentical", "id", "nonid"):
                raise ValueError(f"setting {text!r}: last field must be identical or nonidentical")
            ident = parts[3] in ("identical", "id")
        return cls(int(parts[0]), int(parts[1]), int(parts[2]), ident)

    @property
    def label(self) -> str:
        kind = "id" if self.identical else "nonid"
        return f"T{self.T}_n{self.n_thermal}_psh{self.n_psh}{kind if self.n_psh else ''}"


def _r(x: float, nd: int = 2) -> float:
    return float(round(float(x), nd))


def generate_thermal(rng: np.random.Generator, T: int, n: int) -> Instance:
    units = []
    for i in range(n):
        q_max = _r(rng.uniform(100, 400))
        q_min = _r(q_max * rng.uniform(0.2, 0.5))
        ramp = _r(q_max * rng.uniform(0.3, 0.7))
        su = _r(q_min + rng.uniform(0, 0.3) * (q_max - q_min))
        min_up = int(rng.integers(1, 5))
        min_down = int(rng.integers(1, 5))
        units.append(
            ThermalUnit(
                id=f"g{i + 1}",
                q_min=q_min,
                q_max=q_max,
                ramp_up=ramp,
                ramp_down=ramp,
                startup_limit=su,
                shutdown_limit=su,
                min_up=min_up,
                min_down=min_down,
                init_state=min_up + int(rng.integers(0, 4)),
                init_power=q_min,
                cost_a=_r(rng.uniform(0.0005, 0.005), 5),
                cost_b=_r(rng.uniform(10, 40)),
                cost_c=_r(rng.uniform(100, 500)),
                cost_startup=_r(rng.uniform(200, 1000)),
            )
        )
    cap = sum(u.q_max for u in units)
    t = np.arange(T)
    shape = 0.65 - 0.2 * np.cos(2 * np.pi * t / 24) + rng.normal(0, 0.02, T)
    demand = [_r(cap * f) for f in np.clip(shape, 0.4, 0.9)]
    return Instance(horizon=T, demand=tuple(demand), thermal=tuple(units))


def generate_instance(seed: int, setting: Setting, index: int = 0) -> Instance:
    rng = np.random.default_rng([seed, setting.T, setting.n_thermal, setting.n_psh, int(setting.identical), index])
    inst = generate_thermal(rng, setting.T, setting.n_thermal)
    if setting.n_psh:
        inst = attach_psh(inst, setting.n_psh, setting.identical)
    return dataclasses.replace(inst, name=f"{setting.label}_{index + 1}")


def generate_suite(seed: int, settings, out_dir, per_setting: int = 5) -> list[Path]:
    """Write ``per_setting`` instances for each setting; deterministic in ``seed``."""
    settings = [s if isinstance(s, Setting) else Setting.parse(s) for s in settings]
    if not settings:
        raise ValueError("at least one setting is required")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for s in settings:
        for i in range(per_setting):
            inst = generate_instance(seed, s, i)
            path = out / f"{inst.name}.json"
            save_instance(inst, path)
            paths.append(path)
    return paths


# --- experiment -------------------------------------------------------------


@dataclass(frozen=True)
class ResultRow:
    instance: str
    formulation: str
    T: int
    n_thermal: int
    n_psh: int
    status: str
    time_s: float | None
    nodes: int | None
    objective: float | None
    gap: float | None
    reason: str = field(default="", compare=False)

    @property
    def solved(self) -> bool:
        return self.status == OPTIMAL


@dataclass
class ExperimentSpec:
    instances: list[str]
    formulations: list[str]
    n_psh: list[int] = field(default_factory=list)
    identical: bool = True
    solve: SolveConfig = field(default_factory=SolveConfig)
    repetitions: int = 1
    output_dir: str = "results"
    quad_mode: str = "piecewise"
    segments: int = 4
    workers: int = 1

    def __post_init__(self):
        if not self.instances:
            raise ValueError("experiment needs at least one instance")
        if not self.formulations:
            raise ValueError("experiment needs at least one formulation")
        for f in self.formulations:
            if f not in FORMULATIONS:
                raise ValueError(f"unknown formulation {f!r}; choose from {', '.join(FORMULATIONS)}")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")

    @classmethod
    def from_dict(cls, doc: dict, base: Path | None = None) -> "ExperimentSpec":
        doc = dict(doc)
        solve_cfg = SolveConfig(**doc.pop("solve", {}))
        spec = cls(solve=solve_cfg, **doc)
        if base is not None:
            spec.instances = [str(base / p) if not Path(p).is_absolute() else p for p in spec.instances]
            if not Path(spec.output_dir).is_absolute():
                spec.output_dir = str(base / spec.output_dir)
        return spec

    @classmethod
    def from_json(cls, path) -> "ExperimentSpec":
        path = Path(path)
        return cls.from_dict(json.loads(path.read_text()), base=path.parent)

    def resolve_instances(self) -> list[Path]:
        paths: list[Path] = []
        for pattern in self.instances:
            hits = sorted(globmod.glob(pattern))
            if not hits:
                raise FileNotFoundError(f"no instance matches {pattern!r}")
            paths.extend(Path(h) for h in hits)
        return paths


def _expand(spec: ExperimentSpec) -> list[Instance]:
    out = []
    for path in spec.resolve_instances():
        inst = load_instance(path)
        if inst.reservoirs or not spec.n_psh:
            out.append(inst)
            continue
        for n in spec.n_psh:
            tag = "id" if spec.identical else "nonid"
            with_psh = attach_psh(inst, n, spec.identical)
            out.append(dataclasses.replace(with_psh, name=f"{inst.name}+psh{n}{tag}"))
    return out


def _kind(label: str) -> FormulationKind:
    return FormulationKind.STANDARD if label == "standard+sym" else FormulationKind(label)


def _check_recovery(kind: FormulationKind, sol, inst: Instance, tol: float = 1e-6) -> list[str]:
    if kind == FormulationKind.AGGREGATED:
        sched = disaggregate(sol, inst)
    elif kind == FormulationKind.PRESOLVED:
        sched = disaggregate_presolved(sol, inst)
    else:
        sched = schedule_from_standard(sol, inst)
    problems = validate_standard(sched, inst, tol)
    if kind != FormulationKind.STANDARD:
        for res in inst.reservoirs:
            for t in inst.periods:
                for mode, fam in ((PUMP, "P_pump"), (GEN, "P_gen")):
                    want = sol.values[vname(fam, res.id, t)]
                    got = sched.plant_total(res, t, mode)
                    if abs(got - want) > 1e-9 * max(1.0, abs(want)):
                        problems.append(f"plant_total({res.id},{t},{mode})")
    return problems


def _run_one(inst: Instance, label: str, spec: ExperimentSpec, rep: int) -> ResultRow:
    kind = _kind(label)
    cfg = spec.solve
    if label == "standard+sym":
        cfg = dataclasses.replace(cfg, symmetry_detection=True)
    if spec.repetitions > 1:
        cfg = dataclasses.replace(cfg, seed=cfg.seed + rep)
    name = inst.name if spec.repetitions == 1 else f"{inst.name}#{rep + 1}"
    base = dict(
        instance=name,
        formulation=label,
        T=inst.horizon,
        n_thermal=len(inst.thermal),
        n_psh=inst.n_psh,
    )
    try:
        ir, _ = build(inst, kind, quad_mode=spec.quad_mode, segments=spec.segments)
        sol = solve(ir, cfg)
    except (FormulationError, SolverError, ValueError) as e:
        return ResultRow(status=ERROR, time_s=None, nodes=None, objective=None, gap=None, reason=str(e), **base)

    st = sol.stats
    row = ResultRow(
        status=sol.status,
        time_s=st.wall_time,
        nodes=st.nodes,
        objective=sol.objective,
        gap=st.gap,
        **base,
    )
    if sol.status == OPTIMAL:
        try:
            problems = _check_recovery(kind, sol, inst)
        except RecoveryError as e:
            problems = [str(e)]
        if problems:
            row = dataclasses.replace(row, status=RECOVERY_FAILED, reason="; ".join(problems[:10]))
    return row


def objectives_agree(a: float, b: float, rel_tol: float) -> bool:
    return abs(a - b) <= rel_tol * max(1.0, abs(a), abs(b))


def _cross_check(rows: list[ResultRow], rel_tol: float) -> list[ResultRow]:
    """Mark every solved row of an instance as mismatched if any pair disagrees."""
    by_inst: dict[str, list[int]] = defaultdict(list)
    for i, r in enumerate(rows):
        by_inst[r.instance].append(i)
    out = list(rows)
    for name, idx in by_inst.items():
        solved = [i for i in idx if rows[i].status == OPTIMAL]
        objs = [rows[i].objective for i in solved]
        if all(objectives_agree(a, b, rel_tol) for a in objs for b in objs):
            continue
        detail = ", ".join(f"{rows[i].formulation}={rows[i].objective!r}" for i in solved)
        for i in solved:
            out[i] = dataclasses.replace(rows[i], status=MISMATCH, reason=f"objectives disagree: {detail}")
    return out


def _task(args):
    inst, label, spec, rep = args
    return _run_one(inst, label, spec, rep)


def run_experiment(spec: ExperimentSpec, rel_tol: float | None = None) -> list[ResultRow]:
    """Build and solve every (instance, formulation) pair; write ``results.csv``.

    Solved objectives of the same instance must agree within ``rel_tol``
    (default ``3 * mip_gap``); disagreeing rows get status ``mismatch`` and
    their model files are kept under ``<output_dir>/mismatch/``.
    """
    rel_tol = 3 * spec.solve.mip_gap if rel_tol is None else rel_tol
    instances = _expand(spec)
    tasks = [(inst, f, spec, rep) for inst in instances for rep in range(spec.repetitions) for f in spec.formulations]
    if spec.workers > 1:
        with ProcessPoolExecutor(spec.workers) as pool:
            rows = list(pool.map(_task, tasks))
    else:
        rows = [_task(t) for t in tasks]
    rows = _cross_check(rows, rel_tol)

    out = Path(spec.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_results(rows, out / "results.csv")
    bad = [r for r in rows if r.reason]
    if bad:
        with open(out / "failures.txt", "w") as fh:
            for r in bad:
                fh.write(f"{r.instance}\t{r.formulation}\t{r.status}\t{r.reason}\n")
    _keep_mismatch_models(rows, instances, spec, out / "mismatch")
    return rows


def _keep_mismatch_models(rows, instances, spec, where: Path) -> None:
    names = {r.instance.split("#")[0] for r in rows if r.status == MISMATCH}
    if not names:
        return
    for inst in instances:
        if inst.name not in names:
            continue
        d = where / inst.name
        d.mkdir(parents=True, exist_ok=True)
        for label in spec.formulations:
            ir, _ = build(inst, _kind(label), quad_mode=spec.quad_mode, segments=spec.segments)
            emit_mps(ir, d / f"{label.replace('+', '_')}.mps")
        save_instance(inst, d / "instance.json")
        log.warning("objective mismatch on %s; models kept in %s", inst.name, d)


# --- csv --------------------------------------------------------------------


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def write_results(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_COLUMNS)
        for r in rows:
            w.writerow([_fmt(getattr(r, c)) for c in CSV_COLUMNS])


def read_results(path) -> list[ResultRow]:
    def opt(x, typ):
        return None if x == "" else typ(x)

    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != CSV_COLUMNS:
            raise ValueError(f"{path}: expected columns {CSV_COLUMNS}, got {reader.fieldnames}")
        for d in reader:
            rows.append(
                ResultRow(
                    instance=d["instance"],
                    formulation=d["formulation"],
                    T=int(d["T"]),
                    n_thermal=int(d["n_thermal"]),
                    n_psh=int(d["n_psh"]),
                    status=d["status"],
                    time_s=opt(d["time_s"], float),
                    nodes=opt(d["nodes"], int),
                    objective=opt(d["objective"], float),
                    gap=opt(d["gap"], float),
                )
            )
    return rows


# --- tables -----------------------------------------------------------------


@dataclass(frozen=True)
class SummaryRow:
    T: int
    n_thermal: int
    n_psh: int
    formulation: str
    runs: int
    solved: int
    mean_time: float | None
    mean_nodes: float | None


def summarize(rows) -> list[SummaryRow]:
    """Per-setting solved counts (over all runs) and means (over solved runs)."""
    groups: dict[tuple, list[ResultRow]] = defaultdict(list)
    for r in rows:
        groups[(r.T, r.n_thermal, r.n_psh, r.formulation)].append(r)
    out = []
    for key in sorted(groups, key=lambda k: (k[2], k[0], k[1], _form_order(k[3]))):
        rs = groups[key]
        solved = [r for r in rs if r.solved]
        times = [r.time_s for r in solved if r.time_s is not None]
        nodes = [r.nodes for r in solved if r.nodes is not None]
        out.append(
            SummaryRow(
                *key,
                runs=len(rs),
                solved=len(solved),
                mean_time=float(np.mean(times)) if times else None,
                mean_nodes=float(np.mean(nodes)) if nodes else None,
            )
        )
    return out


def _form_order(label: str) -> int:
    return FORMULATIONS.index(label) if label in FORMULATIONS else len(FORMULATIONS)


def performance_profile(rows, time_limit: float | None = None) -> list[tuple[str, float, float]]:
    """(formulation, time threshold, fraction of its instances solved by then).

    Sampled at every distinct solve time plus ``time_limit`` (default: the
    largest observed time).  Unsolved runs count in the denominator only.
    """
    by_form: dict[str, list[ResultRow]] = defaultdict(list)
    for r in rows:
        by_form[r.formulation].append(r)
    all_times = [r.time_s for r in rows if r.time_s is not None]
    limit = time_limit if time_limit is not None else (max(all_times) if all_times else 0.0)
    out = []
    for form in sorted(by_form, key=_form_order):
        rs = by_form[form]
        n = len(rs)
        times = sorted(r.time_s for r in rs if r.solved and r.time_s is not None)
        points = sorted(set(t for t in times if t <= limit))
        for tau in points:
            out.append((form, tau, sum(1 for t in times if t <= tau) / n))
        if not points or points[-1] != limit:
            out.append((form, limit, sum(1 for t in times if t <= limit) / n))
    return out


def write_profile(points, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["formulation", "time_s", "fraction_solved"])
        for form, tau, frac in points:
            w.writerow([form, repr(float(tau)), repr(float(frac))])


def format_summary(summary: list[SummaryRow]) -> str:
    lines = [f"{'n_psh':>5} {'T':>4} {'n':>4}  {'formulation':<13} {'solved':>9} {'time(s)':>10} {'nodes':>12}"]
    for s in summary:
        t = "-" if s.mean_time is None else f"{s.mean_time:.3f}"
        nd = "-" if s.mean_nodes is None else f"{s.mean_nodes:.1f}"
        lines.append(
            f"{s.n_psh:>5} {s.T:>4} {s.n_thermal:>4}  {s.formulation:<13} {s.solved:>4}/{s.runs:<4} {t:>10} {nd:>12}"
        )
    return "\n".join(lines)
