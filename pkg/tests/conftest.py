import dataclasses
import math
import re
from collections import OrderedDict
from pathlib import Path

import hypothesis
import pytest

from pshuc.instance import REFERENCE_UNIT, Instance, PshUnit, Reservoir, ThermalUnit, REFERENCE_RESERVOIR

hypothesis.settings.register_profile("ci", max_examples=200, deadline=None)
hypothesis.settings.register_profile("fast", max_examples=20, deadline=None)
hypothesis.settings.load_profile("ci")

ROOT = Path(__file__).resolve().parent.parent
INSTANCE_DIR = ROOT / "instances"


def reference_reservoir(n=3, rid="r1"):
    units = tuple(dataclasses.replace(REFERENCE_UNIT, id=f"{rid}_u{i + 1}") for i in range(n))
    return Reservoir(id=rid, units=units, **REFERENCE_RESERVOIR)


def cheap_thermal(uid="g1", **kw):
    base = dict(
        q_min=100.0,
        q_max=1500.0,
        ramp_up=1500.0,
        ramp_down=1500.0,
        startup_limit=1500.0,
        shutdown_limit=1500.0,
        min_up=1,
        min_down=1,
        init_state=2,
        init_power=500.0,
        cost_a=0.001,
        cost_b=20.0,
        cost_c=100.0,
        cost_startup=300.0,
    )
    base.update(kw)
    return ThermalUnit(id=uid, **base)


@pytest.fixture
def reference_instance():
    """Two thermal units plus the 3-unit reference plant, T=24."""
    T = 24
    demand = tuple(700 + 300 * math.sin(2 * math.pi * t / 24) for t in range(T))
    thermal = (cheap_thermal("g1"), cheap_thermal("g2", cost_b=35.0, q_max=800.0, init_power=200.0))
    return Instance(T, demand, thermal, (reference_reservoir(3),), name="reference")


# --- acceptance reporting -----------------------------------------------------

_CRITERIA = OrderedDict()
_NAME_RE = re.compile(r"test_criterion_(\d+)_?(\w*)")


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    m = _NAME_RE.search(report.nodeid.split("::")[-1])
    if not m:
        return
    key = int(m.group(1))
    title = m.group(2).split("[")[0].replace("_", " ")
    prev = _CRITERIA.get(key, (title, True))
    _CRITERIA[key] = (prev[0], prev[1] and report.outcome == "passed")


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_CRITERIA):
        title, ok = _CRITERIA[key]
        terminalreporter.write_line(f"criterion {key} ({title}): {'PASS' if ok else 'FAIL'}")
