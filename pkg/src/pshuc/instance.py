"""Instance data: thermal fleet, reservoirs with PSH units, JSON exchange.

Demand is net load (renewables already subtracted). All instance objects are
frozen; builders and solvers only ever read them.

The SOC balance multiplies pumping power by ``charge_coeff`` and generating
power by ``discharge_coeff``.  Literature tables label these two numbers
"generating" and "pumping" efficiency respectively, which is the other way
round; the field names here follow how the coefficients are *used*.
"""

from __future__ import annotations

import dataclasses
import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

__all__ = [
    "PshUnit",
    "Reservoir",
    "ThermalUnit",
    "Instance",
    "InstanceError",
    "validate_instance",
    "load_instance",
    "save_instance",
    "instance_from_dict",
    "instance_to_dict",
    "attach_psh",
    "REFERENCE_UNIT",
    "MIXED_UNITS",
    "REFERENCE_RESERVOIR",
]

# ids end up inside solver variable names such as ``pgen(r1,g1,3)``
_ID_RE = re.compile(r"^[A-Za-z0-9_]+$")


class InstanceError(ValueError):
    """Raised when an instance document cannot be parsed or is invalid."""

    def __init__(self, message: str, violations: list[str] | None = None):
        super().__init__(message)
        self.violations = list(violations or [])


@dataclass(frozen=True)
class PshUnit:
    id: str
    p_gen_min: float
    p_gen_max: float
    p_pump_min: float
    p_pump_max: float
    charge_coeff: float
    discharge_coeff: float

    def bounds(self, mode: str) -> tuple[float, float]:
        if mode == "gen":
            return (self.p_gen_min, self.p_gen_max)
        if mode == "pump":
            return (self.p_pump_min, self.p_pump_max)
        raise ValueError(f"unknown mode {mode!r}")

    def params(self) -> tuple[float, ...]:
        """The six technical parameters, without the id."""
        return (
            self.p_gen_min,
            self.p_gen_max,
            self.p_pump_min,
            self.p_pump_max,
            self.charge_coeff,
            self.discharge_coeff,
        )


@dataclass(frozen=True)
class Reservoir:
    id: str
    s_min: float
    s_max: float
    s_init: float
    s_final: float
    units: tuple[PshUnit, ...]

    def __post_init__(self):
        object.__setattr__(self, "units", tuple(self.units))

    @property
    def n_units(self) -> int:
        return len(self.units)


@dataclass(frozen=True)
class ThermalUnit:
    id: str
    q_min: float
    q_max: float
    ramp_up: float
    ramp_down: float
    startup_limit: float
    shutdown_limit: float
    min_up: int
    min_down: int
    init_state: int
    init_power: float | None = None
    cost_a: float = 0.0
    cost_b: float = 0.0
    cost_c: float = 0.0
    cost_startup: float = 0.0

    def __post_init__(self):
        # q0 defaults to q_min for units that start on, 0 otherwise
        if self.init_power is None:
            object.__setattr__(
                self, "init_power", self.q_min if self.init_state > 0 else 0.0
            )

    @property
    def initially_on(self) -> bool:
        return self.init_state > 0


@dataclass(frozen=True)
class Instance:
    horizon: int
    demand: tuple[float, ...]
    thermal: tuple[ThermalUnit, ...] = ()
    reservoirs: tuple[Reservoir, ...] = ()
    name: str = field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "demand", tuple(float(d) for d in self.demand))
        object.__setattr__(self, "thermal", tuple(self.thermal))
        object.__setattr__(self, "reservoirs", tuple(self.reservoirs))

    @property
    def periods(self) -> range:
        """1-based period indices."""
        return range(1, self.horizon + 1)

    @property
    def n_psh(self) -> int:
        return sum(r.n_units for r in self.reservoirs)


def _check_psh(u: PshUnit) -> list[str]:
    out = []
    if not 0 < u.p_gen_min <= u.p_gen_max:
        out.append(f"psh unit {u.id}: need 0 < p_gen_min <= p_gen_max")
    if not 0 < u.p_pump_min <= u.p_pump_max:
        out.append(f"psh unit {u.id}: need 0 < p_pump_min <= p_pump_max")
    if not 0 < u.charge_coeff <= 1:
        out.append(f"psh unit {u.id}: charge_coeff must lie in (0, 1]")
    if not u.discharge_coeff > 0:
        out.append(f"psh unit {u.id}: discharge_coeff must be positive")
    return out


def _check_reservoir(r: Reservoir) -> list[str]:
    out = []
    if not r.s_min <= r.s_max:
        out.append(f"reservoir {r.id}: s_min exceeds s_max")
    if not r.s_min <= r.s_init <= r.s_max:
        out.append(f"reservoir {r.id}: s_init outside [s_min, s_max]")
    if not r.s_min <= r.s_final <= r.s_max:
        out.append(f"reservoir {r.id}: s_final outside [s_min, s_max]")
    if not r.units:
        out.append(f"reservoir {r.id}: units must be nonempty")
    for u in r.units:
        out.extend(_check_psh(u))
    return out


def _check_thermal(g: ThermalUnit) -> list[str]:
    out = []
    if not 0 <= g.q_min <= g.q_max:
        out.append(f"thermal unit {g.id}: need 0 <= q_min <= q_max")
    for name in ("ramp_up", "ramp_down", "startup_limit", "shutdown_limit"):
        if getattr(g, name) < 0:
            out.append(f"thermal unit {g.id}: {name} must be nonnegative")
    if g.min_up < 1:
        out.append(f"thermal unit {g.id}: min_up must be >= 1")
    if g.min_down < 1:
        out.append(f"thermal unit {g.id}: min_down must be >= 1")
    if g.init_state == 0:
        out.append(f"thermal unit {g.id}: init_state must be nonzero")
    if g.init_state > 0:
        if not g.q_min <= g.init_power <= g.q_max:
            out.append(f"thermal unit {g.id}: init_power outside [q_min, q_max]")
    elif g.init_power != 0:
        out.append(f"thermal unit {g.id}: init_power must be 0 for an off unit")
    for name in ("cost_a", "cost_b", "cost_c", "cost_startup"):
        if getattr(g, name) < 0:
            out.append(f"thermal unit {g.id}: {name} must be nonnegative")
    return out


def validate_instance(inst: Instance) -> list[str]:
    """Return human-readable invariant violations; empty means valid."""
    out: list[str] = []
    if inst.horizon < 1:
        out.append("horizon must be a positive integer")
    if len(inst.demand) != inst.horizon:
        out.append(f"demand has length {len(inst.demand)}, horizon is {inst.horizon}")
    for g in inst.thermal:
        out.extend(_check_thermal(g))
    for r in inst.reservoirs:
        out.extend(_check_reservoir(r))

    seen: set[str] = set()
    ids = [g.id for g in inst.thermal] + [r.id for r in inst.reservoirs]
    ids += [u.id for r in inst.reservoirs for u in r.units]
    for i in ids:
        if not _ID_RE.match(i):
            out.append(f"id {i!r} must match [A-Za-z0-9_]+")
        if i in seen:
            out.append(f"duplicate id {i!r}")
        seen.add(i)
    return out


# --- JSON ----------------------------------------------------------------

_THERMAL_KEYS = {
    "id": str,
    "q_min": float,
    "q_max": float,
    "ramp_up": float,
    "ramp_down": float,
    "startup_limit": float,
    "shutdown_limit": float,
    "min_up": int,
    "min_down": int,
    "init_state": int,
    "init_power": float,
    "cost_a": float,
    "cost_b": float,
    "cost_c": float,
    "cost_startup": float,
}
_THERMAL_OPTIONAL = {"init_power"}
_PSH_KEYS = {
    "id": str,
    "p_gen_min": float,
    "p_gen_max": float,
    "p_pump_min": float,
    "p_pump_max": float,
    "charge_coeff": float,
    "discharge_coeff": float,
}
_RESERVOIR_KEYS = {
    "id": str,
    "s_min": float,
    "s_max": float,
    "s_init": float,
    "s_final": float,
    "units": list,
}
_TOP_KEYS = {"horizon": int, "demand": list, "thermal": list, "reservoirs": list}


def _coerce(value: Any, typ: type, where: str):
    if typ is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise InstanceError(f"{where}: expected a number, got {value!r}")
        return float(value)
    if typ is int:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise InstanceError(f"{where}: expected an integer, got {value!r}")
        if int(value) != value:
            raise InstanceError(f"{where}: expected an integer, got {value!r}")
        return int(value)
    if not isinstance(value, typ):
        raise InstanceError(f"{where}: expected {typ.__name__}, got {value!r}")
    return value


def _fields(doc: Any, spec: dict, where: str, optional=frozenset()) -> dict:
    if not isinstance(doc, dict):
        raise InstanceError(f"{where}: expected an object")
    unknown = sorted(set(doc) - set(spec))
    if unknown:
        raise InstanceError(f"{where}: unknown key(s) {', '.join(unknown)}")
    out = {}
    for key, typ in spec.items():
        if key not in doc:
            if key in optional:
                continue
            raise InstanceError(f"{where}: missing required field {key!r}")
        out[key] = _coerce(doc[key], typ, f"{where}.{key}")
    return out


def instance_from_dict(doc: Any, name: str = "") -> Instance:
    top = _fields(doc, _TOP_KEYS, "instance")
    demand = [_coerce(d, float, f"instance.demand[{i}]") for i, d in enumerate(top["demand"])]
    thermal = []
    for i, g in enumerate(top["thermal"]):
        f = _fields(g, _THERMAL_KEYS, f"thermal[{i}]", _THERMAL_OPTIONAL)
        thermal.append(ThermalUnit(**f))
    reservoirs = []
    for i, r in enumerate(top["reservoirs"]):
        f = _fields(r, _RESERVOIR_KEYS, f"reservoirs[{i}]")
        units = [
            PshUnit(**_fields(u, _PSH_KEYS, f"reservoirs[{i}].units[{j}]"))
            for j, u in enumerate(f.pop("units"))
        ]
        reservoirs.append(Reservoir(units=tuple(units), **f))
    return Instance(
        horizon=top["horizon"],
        demand=tuple(demand),
        thermal=tuple(thermal),
        reservoirs=tuple(reservoirs),
        name=name,
    )


def instance_to_dict(inst: Instance) -> dict:
    def unit(u):
        return {k: getattr(u, k) for k in _PSH_KEYS}

    return {
        "horizon": inst.horizon,
        "demand": list(inst.demand),
        "thermal": [{k: getattr(g, k) for k in _THERMAL_KEYS} for g in inst.thermal],
        "reservoirs": [
            {
                **{k: getattr(r, k) for k in _RESERVOIR_KEYS if k != "units"},
                "units": [unit(u) for u in r.units],
            }
            for r in inst.reservoirs
        ],
    }


def load_instance(path) -> Instance:
    """Read and validate an instance JSON document.

    Raises InstanceError on malformed JSON (with line/column), missing or
    unknown fields, wrong types, or invariant violations.
    """
    path = Path(path)
    text = path.read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise InstanceError(f"{path}: line {e.lineno} column {e.colno}: {e.msg}") from e
    inst = instance_from_dict(doc, name=path.stem)
    problems = validate_instance(inst)
    if problems:
        raise InstanceError(f"{path}: invalid instance: " + "; ".join(problems), problems)
    return inst


def save_instance(inst: Instance, path) -> None:
    with open(path, "w") as fh:
        json.dump(instance_to_dict(inst), fh, indent=1)
        fh.write("\n")


# --- reference PSH plant -------------------------------------------------

REFERENCE_UNIT = PshUnit("psh", 100.0, 200.0, 195.0, 205.0, 0.9, 0.9)

MIXED_UNITS = (
    PshUnit("psh1", 95.0, 195.0, 195.0, 205.0, 0.9, 0.9),
    PshUnit("psh2", 100.0, 200.0, 193.0, 208.0, 0.9, 0.9),
    PshUnit("psh3", 105.0, 205.0, 192.0, 204.0, 0.9, 0.9),
    PshUnit("psh4", 110.0, 210.0, 197.0, 210.0, 0.9, 0.9),
)

# s_min, s_max, s_init, s_final in MWh
REFERENCE_RESERVOIR = dict(s_min=1000.0, s_max=3500.0, s_init=2600.0, s_final=2600.0)


def attach_psh(inst: Instance, n_units: int, identical: bool = True, reservoir_id: str | None = None) -> Instance:
    """Return a copy of ``inst`` with one reference PSH reservoir added.

    ``identical`` selects ``n_units`` copies of the reference unit; otherwise
    the first ``n_units`` of the four nonidentical reference units are used.
    """
    if not 1 <= n_units <= 4:
        raise ValueError(f"n_units must be between 1 and 4, got {n_units}")
    rid = reservoir_id or f"r{len(inst.reservoirs) + 1}"
    if identical:
        units = [dataclasses.replace(REFERENCE_UNIT, id=f"{rid}_u{i + 1}") for i in range(n_units)]
    else:
        units = [dataclasses.replace(u, id=f"{rid}_u{i + 1}") for i, u in enumerate(MIXED_UNITS[:n_units])]
    res = Reservoir(id=rid, units=tuple(units), **REFERENCE_RESERVOIR)
    return dataclasses.replace(inst, reservoirs=inst.reservoirs + (res,))
