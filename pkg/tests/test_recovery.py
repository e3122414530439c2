import dataclasses

import pytest
from hypothesis import given, strategies as st

from pshuc.formulations import build_standard
from pshuc.instance import MIXED_UNITS, Instance
from pshuc.ir import vname
from pshuc.recovery import (
    GEN,
    OFF,
    PUMP,
    RecoveredSchedule,
    RecoveryError,
    disaggregate,
    disaggregate_presolved,
    validate_standard,
)

from conftest import cheap_thermal, reference_reservoir


def one_period(n=3, s_final=2600.0, units=None):
    res = reference_reservoir(n)
    if units is not None:
        res = dataclasses.replace(res, units=units)
    res = dataclasses.replace(res, s_final=s_final)
    return Instance(1, [500.0], (cheap_thermal(),), (res,))


def plant_values(t=1, U_pump=0, U_gen=0, P_pump=0.0, P_gen=0.0, s=2600.0, r="r1"):
    return {
        vname("U_pump", r, t): U_pump,
        vname("U_gen", r, t): U_gen,
        vname("U_off", r, t): 3 - U_pump - U_gen,
        vname("P_pump", r, t): P_pump,
        vname("P_gen", r, t): P_gen,
        vname("s", r, t): s,
        vname("w_pump", r, t): int(U_pump > 0),
        vname("w_gen", r, t): int(U_gen > 0),
    }


def test_two_units_pump_lowest_index_first():
    inst = one_period(s_final=2600 + 0.9 * 400)
    sched = disaggregate(plant_values(U_pump=2, P_pump=400.0, s=2960.0), inst)
    assert [sched.mode[(f"r1_u{i}", 1)] for i in (1, 2, 3)] == [PUMP, PUMP, OFF]
    assert [sched.p_pump[(f"r1_u{i}", 1)] for i in (1, 2, 3)] == [200.0, 200.0, 0.0]
    assert validate_standard(sched, inst) == []


def test_idle_plant_all_off():
    inst = one_period()
    sched = disaggregate(plant_values(), inst)
    assert all(m == OFF for m in sched.mode.values())
    assert all(p == 0.0 for p in list(sched.p_gen.values()) + list(sched.p_pump.values()))
    assert validate_standard(sched, inst) == []


def test_three_units_generate_equal_shares():
    inst = one_period(s_final=2600 - 0.9 * 450)
    sched = disaggregate(plant_values(U_gen=3, P_gen=450.0, s=2195.0), inst)
    assert [sched.p_gen[(f"r1_u{i}", 1)] for i in (1, 2, 3)] == [150.0] * 3
    assert validate_standard(sched, inst) == []


def test_conflicting_counts_rejected():
    with pytest.raises(RecoveryError):
        disaggregate(plant_values(U_pump=1, U_gen=1, P_pump=200, P_gen=150), one_period())


def test_fractional_count_rejected():
    vals = plant_values(U_gen=1, P_gen=150)
    vals["U_gen(r1,1)"] = 0.5
    with pytest.raises(RecoveryError):
        disaggregate(vals, one_period())


@given(st.integers(1, 3), st.floats(0, 1), st.sampled_from([PUMP, GEN]))
def test_equal_split_reassembles_total(U, frac, mode):
    lo, hi = (195, 205) if mode == PUMP else (100, 200)
    total = U * (lo + frac * (hi - lo))
    kw = dict(U_pump=U, P_pump=total) if mode == PUMP else dict(U_gen=U, P_gen=total)
    sched = disaggregate(plant_values(**kw), one_period())
    res = one_period().reservoirs[0]
    assert sched.plant_total(res, 1, mode) == pytest.approx(total, rel=1e-9)
    for u in res.units[:U]:
        assert lo - 1e-9 <= (sched.p_pump if mode == PUMP else sched.p_gen)[(u.id, 1)] <= hi + 1e-9


# --- presolved recovery -------------------------------------------------------


def presolved_values(P_pump=0.0, P_gen=0.0, s=2600.0):
    return {
        "P_pump(r1,1)": P_pump,
        "P_gen(r1,1)": P_gen,
        "s(r1,1)": s,
        "w_pump(r1,1)": int(P_pump > 0),
        "w_gen(r1,1)": int(P_gen > 0),
    }


def test_presolved_picks_smallest_covering_subset():
    inst = one_period(units=MIXED_UNITS[:3])
    s = 2600 + 0.9 * 390
    inst = dataclasses.replace(inst, reservoirs=(dataclasses.replace(inst.reservoirs[0], s_final=s),))
    sched = disaggregate_presolved(presolved_values(P_pump=390.0, s=s), inst)
    # pairs of units are tried in order (1,2), (1,3), (2,3); (1,2) spans [388, 413]
    assert [sched.mode[(u.id, 1)] for u in MIXED_UNITS[:3]] == [PUMP, PUMP, OFF]
    assert sched.plant_total(inst.reservoirs[0], 1, PUMP) == pytest.approx(390.0, rel=1e-12)
    assert validate_standard(sched, inst) == []


def test_presolved_unreachable_total():
    with pytest.raises(RecoveryError):
        disaggregate_presolved(presolved_values(P_pump=300.0), one_period())


@given(st.floats(95, 810))
def test_presolved_gen_split_within_bounds(P):
    units = MIXED_UNITS
    res = dataclasses.replace(reference_reservoir(1), units=units, s_final=2600 - 0.9 * P)
    inst = Instance(1, [500.0], (cheap_thermal(),), (res,))
    sched = disaggregate_presolved(presolved_values(P_gen=P, s=2600 - 0.9 * P), inst)
    assert sched.plant_total(res, 1, GEN) == pytest.approx(P, rel=1e-9)
    assert validate_standard(sched, inst) == []


# --- validation ---------------------------------------------------------------


def hand_schedule(inst, rows):
    """rows: per period, (mode, power) of the single unit; SOC follows."""
    res = inst.reservoirs[0]
    (u,) = res.units
    sched = RecoveredSchedule()
    s = res.s_init
    for t, (mode, p) in enumerate(rows, start=1):
        sched.mode[(u.id, t)] = mode
        sched.p_gen[(u.id, t)] = p if mode == GEN else 0.0
        sched.p_pump[(u.id, t)] = p if mode == PUMP else 0.0
        s += u.charge_coeff * sched.p_pump[(u.id, t)] - u.discharge_coeff * sched.p_gen[(u.id, t)]
        sched.s[(res.id, t)] = s
        sched.w_gen[(res.id, t)] = int(mode == GEN)
        sched.w_pump[(res.id, t)] = int(mode == PUMP)
    return sched


def test_final_state_off_by_one():
    inst = Instance(2, [500.0] * 2, (cheap_thermal(),), (reference_reservoir(1),))
    sched = hand_schedule(inst, [(PUMP, 200.0), (GEN, 200.0 - 1 / 0.9)])
    assert sched.s[("r1", 2)] == pytest.approx(2601.0)
    assert validate_standard(sched, inst) == ["soc_final(r1)"]


def test_pump_above_unit_limit():
    inst = one_period(n=1, s_final=2600 + 0.9 * 500)
    sched = hand_schedule(inst, [(PUMP, 500.0)])
    assert validate_standard(sched, inst) == ["pump_ub(r1_u1,1)"]


def test_validator_names_are_standard_model_rows():
    inst = Instance(2, [500.0] * 2, (cheap_thermal(),), (reference_reservoir(1),))
    ir, _ = build_standard(inst)
    sched = hand_schedule(inst, [(PUMP, 500.0), (GEN, 50.0)])
    for name in validate_standard(sched, inst):
        ir.row(name)


def test_mode_without_plant_status():
    inst = one_period(n=1, s_final=2600 + 0.9 * 200)
    sched = hand_schedule(inst, [(PUMP, 200.0)])
    sched.w_pump[("r1", 1)] = 0
    assert validate_standard(sched, inst) == ["pump_mode(r1_u1,1)"]
