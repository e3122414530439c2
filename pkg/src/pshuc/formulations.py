"""UC + pumped-storage MILP builders: standard, aggregated, presolved.

All three share the thermal block (3-bin: commitment x, start-up v,
shut-down w), the demand balance and the cost function; they differ only in
how each reservoir's units are modelled.

Time convention: periods are 1..T and ``s(r,t)`` is the stored energy at the
end of period t.  Pumping/generating during period t moves the store from
``s(r,t-1)`` to ``s(r,t)``; ``s(r,0)`` is the constant ``s_init``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

from .instance import Instance, Reservoir, ThermalUnit, validate_instance
from .intervals import IntervalSet, mode_interval_set
from .ir import BINARY, CONTINUOUS, INTEGER, ModelIR, vname

__all__ = [
    "FormulationKind",
    "FormulationError",
    "BuildStats",
    "build",
    "build_standard",
    "build_aggregated",
    "build_presolved",
    "build_thermal_block",
    "build_objective",
    "check_admissible",
    "DEFAULT_SEGMENTS",
]

DEFAULT_SEGMENTS = 4
_PARAM_NAMES = ("p_gen_min", "p_gen_max", "p_pump_min", "p_pump_max", "charge_coeff", "discharge_coeff")


class FormulationKind(str, enum.Enum):
    STANDARD = "standard"
    AGGREGATED = "aggregated"
    PRESOLVED = "presolved"


class FormulationError(ValueError):
    pass


@dataclass
class BuildStats:
    n_binary: int
    n_integer: int
    n_continuous: int
    n_constraints: int
    n_nonzeros: int
    reservoir_binaries: dict[str, int] = field(default_factory=dict)
    # presolved only: reservoir id -> (k pump intervals, k' gen intervals)
    intervals: dict[str, tuple[int, int]] = field(default_factory=dict)

    @property
    def n_columns(self) -> int:
        return self.n_binary + self.n_integer + self.n_continuous


def _stats(ir: ModelIR, inst: Instance, intervals=None) -> BuildStats:
    return BuildStats(
        n_binary=ir.count(BINARY),
        n_integer=ir.count(INTEGER),
        n_continuous=ir.count(CONTINUOUS),
        n_constraints=len(ir.rows),
        n_nonzeros=ir.n_nonzeros,
        reservoir_binaries={r.id: ir.count(BINARY, owner=r.id) for r in inst.reservoirs},
        intervals=dict(intervals or {}),
    )


# --- admissibility ---------------------------------------------------------


def check_admissible(inst: Instance, kind: FormulationKind) -> None:
    kind = FormulationKind(kind)
    if kind == FormulationKind.STANDARD:
        return
    checked = _PARAM_NAMES if kind == FormulationKind.AGGREGATED else _PARAM_NAMES[4:]
    for r in inst.reservoirs:
        first = r.units[0]
        for u in r.units[1:]:
            for p in checked:
                if getattr(u, p) != getattr(first, p):
                    raise FormulationError(
                        f"{kind.value} formulation needs equal {p} within reservoir {r.id}: "
                        f"unit {first.id} has {getattr(first, p)}, unit {u.id} has {getattr(u, p)}"
                    )


def _require_valid(inst: Instance) -> None:
    problems = validate_instance(inst)
    if problems:
        raise FormulationError("invalid instance: " + "; ".join(problems))


# --- thermal block ----------------------------------------------------------


def build_thermal_block(unit: ThermalUnit, T: int, ir: ModelIR) -> None:
    g = unit.id
    x = {t: ir.add_var(vname("x", g, t), BINARY, 0, 1, owner=g) for t in range(1, T + 1)}
    v = {t: ir.add_var(vname("v", g, t), BINARY, 0, 1, owner=g) for t in range(1, T + 1)}
    w = {t: ir.add_var(vname("w", g, t), BINARY, 0, 1, owner=g) for t in range(1, T + 1)}
    q = {t: ir.add_var(vname("q", g, t), CONTINUOUS, 0, unit.q_max, owner=g) for t in range(1, T + 1)}
    x0 = 1.0 if unit.initially_on else 0.0
    q0 = unit.init_power

    for t in range(1, T + 1):
        ir.add_row(vname("qmin", g, t), [(q[t], 1), (x[t], -unit.q_min)], ">=", 0)
        ir.add_row(vname("qmax", g, t), [(q[t], 1), (x[t], -unit.q_max)], "<=", 0)

        # state transition; x(g,0) is the constant x0
        terms = [(x[t], 1), (v[t], -1), (w[t], 1)]
        if t > 1:
            terms.append((x[t - 1], -1))
        ir.add_row(vname("trans", g, t), terms, "=", x0 if t == 1 else 0)

    for t in range(unit.min_up, T + 1):
        terms = [(v[s], 1) for s in range(t - unit.min_up + 1, t + 1)] + [(x[t], -1)]
        ir.add_row(vname("minup", g, t), terms, "<=", 0)
    for t in range(unit.min_down, T + 1):
        terms = [(w[s], 1) for s in range(t - unit.min_down + 1, t + 1)] + [(x[t], 1)]
        ir.add_row(vname("mindown", g, t), terms, "<=", 1)

    tau0 = unit.init_state
    if 1 < tau0 < unit.min_up:
        for t in range(1, min(T, unit.min_up - tau0) + 1):
            ir.add_row(vname("upinit", g, t), [(x[t], 1)], "=", 1)
    if 1 < -tau0 < unit.min_down:
        for t in range(1, min(T, unit.min_down + tau0) + 1):
            ir.add_row(vname("downinit", g, t), [(x[t], 1)], "=", 0)

    for t in range(1, T + 1):
        if t == 1:
            up = [(q[1], 1), (v[1], -unit.startup_limit)]
            ir.add_row(vname("rampup", g, 1), up, "<=", q0 + unit.ramp_up * x0)
            down = [(q[1], -1), (x[1], -unit.ramp_down), (w[1], -unit.shutdown_limit)]
            ir.add_row(vname("rampdown", g, 1), down, "<=", -q0)
        else:
            up = [(q[t], 1), (q[t - 1], -1), (x[t - 1], -unit.ramp_up), (v[t], -unit.startup_limit)]
            ir.add_row(vname("rampup", g, t), up, "<=", 0)
            down = [(q[t - 1], 1), (q[t], -1), (x[t], -unit.ramp_down), (w[t], -unit.shutdown_limit)]
            ir.add_row(vname("rampdown", g, t), down, "<=", 0)


def secant_breakpoints(q_min: float, q_max: float, segments: int) -> list[float]:
    if q_max == q_min:
        return [q_min, q_max]
    width = (q_max - q_min) / segments
    return [q_min + k * width for k in range(segments)] + [q_max]


def build_objective(inst: Instance, ir: ModelIR, quad_mode: str = "piecewise", segments: int = DEFAULT_SEGMENTS) -> None:
    """Thermal production cost ``a q^2 + b q + c x + s v`` summed over t.

    ``piecewise`` replaces ``a q^2`` by an epigraph variable ``qcost`` bounded
    below by the secant of each of ``segments`` equal-width pieces over
    [q_min, q_max].  The secant rows are scaled by ``x`` so an off unit costs
    nothing.  PSH units carry no cost.
    """
    if quad_mode not in ("native", "piecewise"):
        raise ValueError(f"quad_mode must be 'native' or 'piecewise', got {quad_mode!r}")
    if quad_mode == "piecewise" and segments < 1:
        raise ValueError("piecewise cost needs at least one segment")
    for g in inst.thermal:
        if g.cost_a < 0:
            raise FormulationError(f"thermal unit {g.id}: cost_a < 0 makes the cost nonconvex")
        bps = secant_breakpoints(g.q_min, g.q_max, segments)
        for t in inst.periods:
            q, x, v = vname("q", g.id, t), vname("x", g.id, t), vname("v", g.id, t)
            ir.add_objective(q, g.cost_b)
            ir.add_objective(x, g.cost_c)
            ir.add_objective(v, g.cost_startup)
            if g.cost_a == 0:
                continue
            if quad_mode == "native":
                ir.add_quadratic(q, g.cost_a)
                continue
            eta = ir.add_var(vname("qcost", g.id, t), CONTINUOUS, 0, math.inf, owner=g.id)
            ir.add_objective(eta, 1.0)
            for k, (lo, hi) in enumerate(zip(bps, bps[1:]), start=1):
                slope = g.cost_a * (lo + hi)
                ir.add_row(
                    vname("cost", g.id, t, k),
                    [(eta, 1), (q, -slope), (x, g.cost_a * lo * hi)],
                    ">=",
                    0,
                )


def _balance(inst: Instance, ir: ModelIR, psh_terms) -> None:
    for t in inst.periods:
        terms = [(vname("q", g.id, t), 1) for g in inst.thermal]
        for r in inst.reservoirs:
            terms.extend(psh_terms(r, t))
        ir.add_row(vname("balance", t), terms, "=", inst.demand[t - 1])


def _host(inst: Instance, kind: str) -> ModelIR:
    ir = ModelIR(name=f"{inst.name or 'uc'}_{kind}")
    for g in inst.thermal:
        build_thermal_block(g, inst.horizon, ir)
    return ir


# --- plant-level pieces shared by all three PSH models ----------------------


def _plant_vars(r: Reservoir, T: int, ir: ModelIR) -> None:
    for t in range(1, T + 1):
        ir.add_var(vname("s", r.id, t), CONTINUOUS, r.s_min, r.s_max, owner=r.id)
        ir.add_var(vname("w_gen", r.id, t), BINARY, 0, 1, owner=r.id)
        ir.add_var(vname("w_pump", r.id, t), BINARY, 0, 1, owner=r.id)


def _plant_rows(r: Reservoir, T: int, ir: ModelIR, pump_terms, gen_terms) -> None:
    """Plant exclusivity, SOC balance, tightened SOC limits, final SOC.

    ``pump_terms(t)``/``gen_terms(t)`` return (var, coef) lists whose sum is
    the charge/discharge energy in period t (coefficients included).
    """
    for t in range(1, T + 1):
        ir.add_row(
            vname("plant_excl", r.id, t),
            [(vname("w_pump", r.id, t), 1), (vname("w_gen", r.id, t), 1)],
            "<=",
            1,
        )
    for t in range(1, T + 1):
        s_t = vname("s", r.id, t)
        prev = [(vname("s", r.id, t - 1), 1)] if t > 1 else []
        s0 = r.s_init if t == 1 else 0.0
        pump, gen = pump_terms(t), gen_terms(t)
        ir.add_row(
            vname("soc", r.id, t),
            [(s_t, 1)] + [(v, -c) for v, c in prev] + [(v, -c) for v, c in pump] + [(v, c) for v, c in gen],
            "=",
            s0,
        )
        if prev:
            ir.add_row(vname("soc_cap", r.id, t), prev + pump, "<=", r.s_max)
            ir.add_row(vname("soc_floor", r.id, t), prev + [(v, -c) for v, c in gen], ">=", r.s_min)
        else:
            ir.add_row(vname("soc_cap", r.id, t), pump, "<=", r.s_max - r.s_init)
            ir.add_row(vname("soc_floor", r.id, t), [(v, -c) for v, c in gen], ">=", r.s_min - r.s_init)
    ir.add_row(vname("soc_final", r.id), [(vname("s", r.id, T), 1)], "=", r.s_final)


# --- standard ---------------------------------------------------------------


def _standard_reservoir(r: Reservoir, T: int, ir: ModelIR) -> None:
    _plant_vars(r, T, ir)
    for u in r.units:
        for t in range(1, T + 1):
            for fam in ("u_gen", "u_pump", "u_off"):
                ir.add_var(vname(fam, r.id, u.id, t), BINARY, 0, 1, owner=r.id)
            ir.add_var(vname("p_gen", r.id, u.id, t), CONTINUOUS, 0, u.p_gen_max, owner=r.id)
            ir.add_var(vname("p_pump", r.id, u.id, t), CONTINUOUS, 0, u.p_pump_max, owner=r.id)

    for u in r.units:
        g = u.id
        for t in range(1, T + 1):
            ug, up, uo = (vname(f, r.id, g, t) for f in ("u_gen", "u_pump", "u_off"))
            pg, pp = vname("p_gen", r.id, g, t), vname("p_pump", r.id, g, t)
            ir.add_row(vname("mode", g, t), [(ug, 1), (up, 1), (uo, 1)], "=", 1)
            ir.add_row(vname("gen_lb", g, t), [(pg, 1), (ug, -u.p_gen_min)], ">=", 0)
            ir.add_row(vname("gen_ub", g, t), [(pg, 1), (ug, -u.p_gen_max)], "<=", 0)
            ir.add_row(vname("pump_lb", g, t), [(pp, 1), (up, -u.p_pump_min)], ">=", 0)
            ir.add_row(vname("pump_ub", g, t), [(pp, 1), (up, -u.p_pump_max)], "<=", 0)
            ir.add_row(vname("pump_mode", g, t), [(up, 1), (vname("w_pump", r.id, t), -1)], "<=", 0)
            ir.add_row(vname("gen_mode", g, t), [(ug, 1), (vname("w_gen", r.id, t), -1)], "<=", 0)

    _plant_rows(
        r,
        T,
        ir,
        lambda t: [(vname("p_pump", r.id, u.id, t), u.charge_coeff) for u in r.units],
        lambda t: [(vname("p_gen", r.id, u.id, t), u.discharge_coeff) for u in r.units],
    )


def build_standard(inst: Instance, quad_mode: str = "piecewise", segments: int = DEFAULT_SEGMENTS):
    """Per-unit PSH model: one (gen, pump, off) binary triple per unit and period."""
    _require_valid(inst)
    ir = _host(inst, "standard")
    for r in inst.reservoirs:
        _standard_reservoir(r, inst.horizon, ir)

    def psh(r, t):
        out = []
        for u in r.units:
            out.append((vname("p_gen", r.id, u.id, t), 1))
            out.append((vname("p_pump", r.id, u.id, t), -1))
        return out

    _balance(inst, ir, psh)
    build_objective(inst, ir, quad_mode, segments)
    return ir, _stats(ir, inst)


# --- aggregated -------------------------------------------------------------


def _aggregated_reservoir(r: Reservoir, T: int, ir: ModelIR) -> None:
    n = r.n_units
    u = r.units[0]
    _plant_vars(r, T, ir)
    for t in range(1, T + 1):
        for fam in ("U_gen", "U_pump", "U_off"):
            ir.add_var(vname(fam, r.id, t), INTEGER, 0, n, owner=r.id)
        ir.add_var(vname("P_gen", r.id, t), CONTINUOUS, 0, n * u.p_gen_max, owner=r.id)
        ir.add_var(vname("P_pump", r.id, t), CONTINUOUS, 0, n * u.p_pump_max, owner=r.id)

    for t in range(1, T + 1):
        Ug, Up, Uo = (vname(f, r.id, t) for f in ("U_gen", "U_pump", "U_off"))
        Pg, Pp = vname("P_gen", r.id, t), vname("P_pump", r.id, t)
        ir.add_row(vname("count", r.id, t), [(Ug, 1), (Up, 1), (Uo, 1)], "=", n)
        ir.add_row(vname("Pgen_lb", r.id, t), [(Pg, 1), (Ug, -u.p_gen_min)], ">=", 0)
        ir.add_row(vname("Pgen_ub", r.id, t), [(Pg, 1), (Ug, -u.p_gen_max)], "<=", 0)
        ir.add_row(vname("Ppump_lb", r.id, t), [(Pp, 1), (Up, -u.p_pump_min)], ">=", 0)
        ir.add_row(vname("Ppump_ub", r.id, t), [(Pp, 1), (Up, -u.p_pump_max)], "<=", 0)
        ir.add_row(vname("Upump_mode", r.id, t), [(Up, 1), (vname("w_pump", r.id, t), -n)], "<=", 0)
        ir.add_row(vname("Ugen_mode", r.id, t), [(Ug, 1), (vname("w_gen", r.id, t), -n)], "<=", 0)

    _plant_rows(
        r,
        T,
        ir,
        lambda t: [(vname("P_pump", r.id, t), u.charge_coeff)],
        lambda t: [(vname("P_gen", r.id, t), u.discharge_coeff)],
    )


def _plant_balance(r: Reservoir, t: int):
    return [(vname("P_gen", r.id, t), 1), (vname("P_pump", r.id, t), -1)]


def build_aggregated(inst: Instance, quad_mode: str = "piecewise", segments: int = DEFAULT_SEGMENTS):
    """Unit counts per mode replace per-unit binaries; needs identical units."""
    _require_valid(inst)
    check_admissible(inst, FormulationKind.AGGREGATED)
    ir = _host(inst, "aggregated")
    for r in inst.reservoirs:
        _aggregated_reservoir(r, inst.horizon, ir)
    _balance(inst, ir, _plant_balance)
    build_objective(inst, ir, quad_mode, segments)
    return ir, _stats(ir, inst)


# --- presolved --------------------------------------------------------------


def _interval_block(r: Reservoir, T: int, ir: ModelIR, mode: str, ivs: IntervalSet) -> None:
    P = f"P_{mode}"
    for t in range(1, T + 1):
        zs, xs = [], []
        for i, iv in enumerate(ivs, start=1):
            zs.append(ir.add_var(vname(f"z_{mode}", r.id, t, i), BINARY, 0, 1, owner=r.id))
            xs.append(ir.add_var(vname(f"X_{mode}", r.id, t, i), CONTINUOUS, 0, iv.hi, owner=r.id))
        ir.add_row(vname(f"{P}_sum", r.id, t), [(vname(P, r.id, t), 1)] + [(x, -1) for x in xs], "=", 0)
        for i, (iv, z, x) in enumerate(zip(ivs, zs, xs), start=1):
            ir.add_row(vname(f"X_{mode}_lb", r.id, t, i), [(x, 1), (z, -iv.lo)], ">=", 0)
            ir.add_row(vname(f"X_{mode}_ub", r.id, t, i), [(x, 1), (z, -iv.hi)], "<=", 0)
        ir.add_row(
            vname(f"z_{mode}_card", r.id, t),
            [(z, 1) for z in zs] + [(vname(f"w_{mode}", r.id, t), -1)],
            "=",
            0,
        )


def build_presolved(inst: Instance, quad_mode: str = "piecewise", segments: int = DEFAULT_SEGMENTS):
    """Total plant power constrained to precomputed disjoint interval unions.

    Needs equal charge/discharge coefficients within each reservoir.
    """
    _require_valid(inst)
    check_admissible(inst, FormulationKind.PRESOLVED)
    ir = _host(inst, "presolved")
    counts = {}
    T = inst.horizon
    for r in inst.reservoirs:
        pump_set = mode_interval_set(r.units, "pump")
        gen_set = mode_interval_set(r.units, "gen")
        counts[r.id] = (pump_set.k, gen_set.k)
        _plant_vars(r, T, ir)
        for t in range(1, T + 1):
            ir.add_var(vname("P_gen", r.id, t), CONTINUOUS, 0, gen_set[-1].hi, owner=r.id)
            ir.add_var(vname("P_pump", r.id, t), CONTINUOUS, 0, pump_set[-1].hi, owner=r.id)
        _interval_block(r, T, ir, "pump", pump_set)
        _interval_block(r, T, ir, "gen", gen_set)
        u = r.units[0]
        _plant_rows(
            r,
            T,
            ir,
            lambda t, r=r, u=u: [(vname("P_pump", r.id, t), u.charge_coeff)],
            lambda t, r=r, u=u: [(vname("P_gen", r.id, t), u.discharge_coeff)],
        )
    _balance(inst, ir, _plant_balance)
    build_objective(inst, ir, quad_mode, segments)
    return ir, _stats(ir, inst, counts)


_BUILDERS = {
    FormulationKind.STANDARD: build_standard,
    FormulationKind.AGGREGATED: build_aggregated,
    FormulationKind.PRESOLVED: build_presolved,
}


def build(inst: Instance, kind, quad_mode: str = "piecewise", segments: int = DEFAULT_SEGMENTS):
    return _BUILDERS[FormulationKind(kind)](inst, quad_mode=quad_mode, segments=segments)
