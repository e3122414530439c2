"""Per-unit PSH schedules from plant-level solutions, and their validation.

An aggregated solution only says how many units pump or generate and the
plant total; :func:`disaggregate` assigns the lowest-indexed units and
splits the total evenly.  A presolved solution only has plant totals;
:func:`disaggregate_presolved` picks the first unit subset (smallest first,
then lexicographic) whose power range covers the total.

:func:`validate_standard` checks a schedule against the per-unit model rows
directly, without going through the model builder.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from .instance import Instance, Reservoir
from .intervals import mode_vectors
from .ir import vname

__all__ = [
    "RecoveryError",
    "RecoveredSchedule",
    "disaggregate",
    "disaggregate_presolved",
    "schedule_from_standard",
    "standard_point",
    "validate_standard",
    "GEN",
    "PUMP",
    "OFF",
]

GEN, PUMP, OFF = "gen", "pump", "off"
INT_TOL = 1e-6


class RecoveryError(ValueError):
    pass


@dataclass
class RecoveredSchedule:
    """Keys are ``(unit_id, t)`` for unit data and ``(reservoir_id, t)`` for plant data."""

    mode: dict[tuple[str, int], str] = field(default_factory=dict)
    p_gen: dict[tuple[str, int], float] = field(default_factory=dict)
    p_pump: dict[tuple[str, int], float] = field(default_factory=dict)
    s: dict[tuple[str, int], float] = field(default_factory=dict)
    w_gen: dict[tuple[str, int], int] = field(default_factory=dict)
    w_pump: dict[tuple[str, int], int] = field(default_factory=dict)

    def plant_total(self, res: Reservoir, t: int, which: str) -> float:
        powers = self.p_gen if which == GEN else self.p_pump
        return sum(powers[(u.id, t)] for u in res.units)


def _count(values: Mapping[str, float], name: str) -> int:
    x = values[name]
    n = round(x)
    if abs(x - n) > INT_TOL:
        raise RecoveryError(f"{name} = {x} is not integral")
    return int(n)


def _binary(values: Mapping[str, float], name: str) -> int:
    n = _count(values, name)
    if n not in (0, 1):
        raise RecoveryError(f"{name} = {n} is not binary")
    return n


def _plant_common(sched: RecoveredSchedule, values, res: Reservoir, t: int) -> None:
    sched.s[(res.id, t)] = values[vname("s", res.id, t)]
    sched.w_gen[(res.id, t)] = _binary(values, vname("w_gen", res.id, t))
    sched.w_pump[(res.id, t)] = _binary(values, vname("w_pump", res.id, t))


def _assign(sched, res, t, mode, chosen, powers) -> None:
    for i, u in enumerate(res.units):
        on = i in chosen
        sched.mode[(u.id, t)] = mode if on else OFF
        sched.p_gen[(u.id, t)] = powers[i] if on and mode == GEN else 0.0
        sched.p_pump[(u.id, t)] = powers[i] if on and mode == PUMP else 0.0


def _values(sol) -> Mapping[str, float]:
    # a plain dict also has a .values attribute, so test for the mapping first
    return sol if isinstance(sol, Mapping) else sol.values


def disaggregate(sol, inst: Instance) -> RecoveredSchedule:
    """Per-unit schedule from an aggregated-formulation solution.

    In each period the first ``U`` units of the active mode get ``P / U``
    each; the rest are off.  ``sol`` is a Solution or a name->value map.
    """
    values = _values(sol)
    sched = RecoveredSchedule()
    for res in inst.reservoirs:
        for t in inst.periods:
            up = _count(values, vname("U_pump", res.id, t))
            ug = _count(values, vname("U_gen", res.id, t))
            if up > 0 and ug > 0:
                raise RecoveryError(
                    f"reservoir {res.id}, period {t}: {up} units pumping and {ug} generating"
                )
            if up > res.n_units or ug > res.n_units:
                raise RecoveryError(f"reservoir {res.id}, period {t}: unit count exceeds {res.n_units}")
            if up > 0:
                share = values[vname("P_pump", res.id, t)] / up
                _assign(sched, res, t, PUMP, set(range(up)), [share] * res.n_units)
            elif ug > 0:
                share = values[vname("P_gen", res.id, t)] / ug
                _assign(sched, res, t, GEN, set(range(ug)), [share] * res.n_units)
            else:
                _assign(sched, res, t, OFF, set(), [])
            _plant_common(sched, values, res, t)
    return sched


def _split(res: Reservoir, mode: str, total: float, tol: float):
    """First unit subset whose range covers ``total``, and per-unit powers.

    Within the subset each unit sits at the same fraction of its own range,
    so every share is inside its bounds and the shares sum to ``total``.
    """
    bounds = [u.bounds(mode) for u in res.units]
    for subset in mode_vectors(len(bounds)):
        lo = sum(bounds[g][0] for g in subset)
        hi = sum(bounds[g][1] for g in subset)
        if lo - tol <= total <= hi + tol:
            theta = 0.0 if hi == lo else min(1.0, max(0.0, (total - lo) / (hi - lo)))
            powers = [0.0] * len(bounds)
            for g in subset:
                glo, ghi = bounds[g]
                powers[g] = glo + theta * (ghi - glo)
            return set(subset), powers
    raise RecoveryError(f"reservoir {res.id}: total {mode} power {total} is not reachable by any unit subset")


def disaggregate_presolved(sol, inst: Instance, tol: float = 1e-6) -> RecoveredSchedule:
    """Per-unit schedule from a presolved-formulation solution."""
    values = _values(sol)
    sched = RecoveredSchedule()
    for res in inst.reservoirs:
        for t in inst.periods:
            wp = _binary(values, vname("w_pump", res.id, t))
            wg = _binary(values, vname("w_gen", res.id, t))
            pp = values[vname("P_pump", res.id, t)]
            pg = values[vname("P_gen", res.id, t)]
            if wp and wg:
                raise RecoveryError(f"reservoir {res.id}, period {t}: plant both pumping and generating")
            if wp:
                chosen, powers = _split(res, PUMP, pp, tol)
                _assign(sched, res, t, PUMP, chosen, powers)
            elif wg:
                chosen, powers = _split(res, GEN, pg, tol)
                _assign(sched, res, t, GEN, chosen, powers)
            else:
                if abs(pp) > tol or abs(pg) > tol:
                    raise RecoveryError(f"reservoir {res.id}, period {t}: power without an active plant mode")
                _assign(sched, res, t, OFF, set(), [])
            _plant_common(sched, values, res, t)
    return sched


def schedule_from_standard(sol, inst: Instance) -> RecoveredSchedule:
    """Read a schedule straight out of a standard-formulation solution."""
    values = _values(sol)
    sched = RecoveredSchedule()
    for res in inst.reservoirs:
        for t in inst.periods:
            for u in res.units:
                on = [m for m in (GEN, PUMP, OFF) if _binary(values, vname(f"u_{m}", res.id, u.id, t))]
                if len(on) != 1:
                    raise RecoveryError(f"unit {u.id}, period {t}: modes {on}")
                sched.mode[(u.id, t)] = on[0]
                sched.p_gen[(u.id, t)] = values[vname("p_gen", res.id, u.id, t)]
                sched.p_pump[(u.id, t)] = values[vname("p_pump", res.id, u.id, t)]
            _plant_common(sched, values, res, t)
    return sched


def standard_point(sched: RecoveredSchedule, inst: Instance, thermal_values: Mapping[str, float]) -> dict[str, float]:
    """Variable values for the standard model: PSH from ``sched``, thermal copied.

    ``thermal_values`` is any solution of the same instance (all three
    formulations share thermal variable names).
    """
    point = {}
    for g in inst.thermal:
        for t in inst.periods:
            for fam in ("x", "v", "w", "q", "qcost"):
                n = vname(fam, g.id, t)
                if n in thermal_values:
                    point[n] = thermal_values[n]
    for res in inst.reservoirs:
        for t in inst.periods:
            point[vname("s", res.id, t)] = sched.s[(res.id, t)]
            point[vname("w_gen", res.id, t)] = sched.w_gen[(res.id, t)]
            point[vname("w_pump", res.id, t)] = sched.w_pump[(res.id, t)]
            for u in res.units:
                m = sched.mode[(u.id, t)]
                for mode in (GEN, PUMP, OFF):
                    point[vname(f"u_{mode}", res.id, u.id, t)] = float(m == mode)
                point[vname("p_gen", res.id, u.id, t)] = sched.p_gen[(u.id, t)]
                point[vname("p_pump", res.id, u.id, t)] = sched.p_pump[(u.id, t)]
    return point


def validate_standard(sched: RecoveredSchedule, inst: Instance, tol: float = 1e-6) -> list[str]:
    """Names of violated per-unit PSH rows (modes, bounds, plant status, SOC).

    Names match the row names of the standard model.
    """
    bad: list[str] = []
    for res in inst.reservoirs:
        r = res.id
        prev = res.s_init
        for t in inst.periods:
            wg, wp = sched.w_gen[(r, t)], sched.w_pump[(r, t)]
            if wg not in (0, 1) or wp not in (0, 1) or wg + wp > 1:
                bad.append(vname("plant_excl", r, t))
            charge = discharge = 0.0
            for u in res.units:
                g = u.id
                m = sched.mode.get((g, t))
                pg, pp = sched.p_gen[(g, t)], sched.p_pump[(g, t)]
                if m not in (GEN, PUMP, OFF):
                    bad.append(vname("mode", g, t))
                ug, up = float(m == GEN), float(m == PUMP)
                if pg < u.p_gen_min * ug - tol:
                    bad.append(vname("gen_lb", g, t))
                if pg > u.p_gen_max * ug + tol:
                    bad.append(vname("gen_ub", g, t))
                if pp < u.p_pump_min * up - tol:
                    bad.append(vname("pump_lb", g, t))
                if pp > u.p_pump_max * up + tol:
                    bad.append(vname("pump_ub", g, t))
                if up > wp:
                    bad.append(vname("pump_mode", g, t))
                if ug > wg:
                    bad.append(vname("gen_mode", g, t))
                charge += u.charge_coeff * pp
                discharge += u.discharge_coeff * pg
            s_t = sched.s[(r, t)]
            if abs(s_t - (prev + charge - discharge)) > tol:
                bad.append(vname("soc", r, t))
            if prev + charge > res.s_max + tol:
                bad.append(vname("soc_cap", r, t))
            if prev - discharge < res.s_min - tol:
                bad.append(vname("soc_floor", r, t))
            prev = s_t
        if abs(prev - res.s_final) > tol:
            bad.append(vname("soc_final", r))
    return bad
