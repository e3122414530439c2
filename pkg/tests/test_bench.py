import json

import pytest
from hypothesis import given, strategies as st

from pshuc import cli
from pshuc.bench import (
    CSV_COLUMNS,
    MISMATCH,
    ExperimentSpec,
    ResultRow,
    Setting,
    generate_instance,
    generate_suite,
    objectives_agree,
    performance_profile,
    read_results,
    run_experiment,
    summarize,
    write_results,
)
from pshuc.formulations import build_standard
from pshuc.instance import REFERENCE_UNIT, load_instance, validate_instance
from pshuc.solver import OPTIMAL, SolveConfig, solve


def row(inst="i1", form="standard", status=OPTIMAL, time=1.0, nodes=10, obj=100.0, gap=0.0, T=6, n=3, k=3):
    solved = status in (OPTIMAL, "feasible_time_limit")
    return ResultRow(inst, form, T, n, k, status, time, nodes, obj if solved else None, gap)


# --- summary and profile ------------------------------------------------------


def test_summary_mean_of_five():
    (s,) = summarize([row(f"i{i}", time=float(i), nodes=i) for i in range(1, 6)])
    assert (s.solved, s.runs, s.mean_time, s.mean_nodes) == (5, 5, 3.0, 3.0)


def test_summary_mean_over_solved_only():
    rows = [row("a", time=2.0), row("b", time=4.0), row("c", status="feasible_time_limit", time=1800.0)]
    (s,) = summarize(rows)
    assert (s.solved, s.runs, s.mean_time) == (2, 3, 3.0)


def test_summary_single_row():
    (s,) = summarize([row(time=7.5, nodes=4)])
    assert (s.solved, s.mean_time, s.mean_nodes) == (1, 7.5, 4.0)


def test_summary_groups_by_setting():
    rows = [row(T=6), row(T=12), row(T=6, form="aggregated")]
    assert len(summarize(rows)) == 3


def test_profile_two_instances():
    pts = performance_profile([row("a", time=1.0), row("b", time=3.0)], time_limit=10)
    assert pts == [("standard", 1.0, 0.5), ("standard", 3.0, 1.0), ("standard", 10, 1.0)]


def test_profile_unsolved_plateau():
    pts = performance_profile([row("a", time=1.0), row("b", status="error", time=None)], time_limit=5)
    assert pts == [("standard", 1.0, 0.5), ("standard", 5, 0.5)]


def test_profile_tied_times():
    pts = performance_profile([row("a", time=2.0), row("b", time=2.0)], time_limit=2.0)
    assert pts == [("standard", 2.0, 1.0)]


def test_profile_per_formulation():
    pts = performance_profile([row(form="standard", time=1.0), row(form="presolved", time=2.0)], time_limit=4)
    assert {p[0] for p in pts} == {"standard", "presolved"}


# --- csv ------------------------------------------------------------------------


finite = st.floats(min_value=0, max_value=1e9, allow_nan=False)


@given(
    st.lists(
        st.builds(
            ResultRow,
            instance=st.from_regex(r"[A-Za-z0-9_]{1,12}", fullmatch=True),
            formulation=st.sampled_from(["standard", "aggregated", "presolved", "standard+sym"]),
            T=st.integers(1, 48),
            n_thermal=st.integers(0, 50),
            n_psh=st.integers(0, 4),
            status=st.sampled_from(["optimal", "error", "mismatch"]),
            time_s=st.none() | finite,
            nodes=st.none() | st.integers(0, 10**9),
            objective=st.none() | finite,
            gap=st.none() | finite,
        ),
        max_size=5,
    )
)
def test_csv_round_trip(tmp_path_factory, rows):
    p = tmp_path_factory.mktemp("csv") / "r.csv"
    write_results(rows, p)
    assert read_results(p) == rows
    assert p.read_text().splitlines()[0] == ",".join(CSV_COLUMNS)


def test_csv_wrong_header(tmp_path):
    p = tmp_path / "r.csv"
    p.write_text("a,b\n1,2\n")
    with pytest.raises(ValueError):
        read_results(p)


# --- generator ---------------------------------------------------------------


def test_setting_parse():
    assert Setting.parse("24:10:3") == Setting(24, 10, 3, True)
    assert Setting.parse("6:3:2:nonidentical").identical is False
    with pytest.raises(ValueError):
        Setting.parse("24:10")


def test_generated_instance_shape():
    inst = generate_instance(1, Setting(24, 10, 3, True))
    assert len(inst.thermal) == 10 and inst.horizon == 24
    (res,) = inst.reservoirs
    assert all(u.params() == REFERENCE_UNIT.params() for u in res.units) and res.n_units == 3
    assert validate_instance(inst) == []


def test_generator_deterministic(tmp_path):
    settings = [Setting(6, 3, 2, True), Setting(12, 4, 0, True)]
    a = generate_suite(7, settings, tmp_path / "a", per_setting=2)
    b = generate_suite(7, settings, tmp_path / "b", per_setting=2)
    assert [p.name for p in a] == [p.name for p in b]
    assert all(x.read_bytes() == y.read_bytes() for x, y in zip(a, b))
    c = generate_suite(8, settings, tmp_path / "c", per_setting=2)
    assert a[0].read_bytes() != c[0].read_bytes()


@pytest.mark.parametrize("seed", [1, 2, 3])
def test_generated_instances_are_feasible(seed):
    inst = generate_instance(seed, Setting(12, 5, 3, True))
    peak = max(inst.demand)
    assert peak <= sum(g.q_max for g in inst.thermal) + sum(u.p_gen_max for u in inst.reservoirs[0].units)
    ir, _ = build_standard(inst)
    assert solve(ir.relaxed()).status == OPTIMAL


@pytest.mark.parametrize("seed", [4, 5])
def test_demand_within_policy_band(seed):
    inst = generate_instance(seed, Setting(24, 6, 0, True))
    cap = sum(g.q_max for g in inst.thermal)
    assert all(0.4 * cap - 1e-6 <= d <= 0.9 * cap + 1e-6 for d in inst.demand)


# --- experiment --------------------------------------------------------------


def test_empty_formulations_rejected():
    with pytest.raises(ValueError):
        ExperimentSpec(instances=["x.json"], formulations=[])


def test_unknown_formulation_rejected():
    with pytest.raises(ValueError):
        ExperimentSpec(instances=["x.json"], formulations=["clever"])


def test_objective_tolerance():
    assert objectives_agree(100000.0, 100029.0, 3e-4)
    assert not objectives_agree(100000.0, 100031.0, 3e-4)
    assert objectives_agree(0.0, 1e-4, 3e-4)


@pytest.fixture(scope="module")
def small_run(tmp_path_factory):
    d = tmp_path_factory.mktemp("exp")
    generate_suite(3, [Setting(6, 3, 0, True)], d / "inst", per_setting=2)
    spec = ExperimentSpec(
        instances=[str(d / "inst" / "*.json")],
        formulations=["standard", "aggregated", "presolved"],
        n_psh=[2],
        identical=False,
        solve=SolveConfig(time_limit=60),
        output_dir=str(d / "out"),
    )
    return spec, run_experiment(spec)


def test_experiment_rows_and_admissibility_error(small_run):
    spec, rows = small_run
    assert len(rows) == 6
    agg = [r for r in rows if r.formulation == "aggregated"]
    assert all(r.status == "error" and "needs equal" in r.reason for r in agg)
    others = [r for r in rows if r.formulation != "aggregated"]
    assert all(r.status == OPTIMAL for r in others)
    failures = (spec.output_dir + "/failures.txt")
    assert "aggregated" in open(failures).read()


def test_experiment_csv_matches_rows(small_run):
    spec, rows = small_run
    assert read_results(spec.output_dir + "/results.csv") == rows


def test_mismatch_is_flagged(small_run, tmp_path):
    spec, _ = small_run
    spec2 = ExperimentSpec(**{**spec.__dict__, "output_dir": str(tmp_path), "formulations": ["standard", "presolved"]})
    # a negative tolerance makes any pair of objectives disagree
    rows = run_experiment(spec2, rel_tol=-1.0)
    assert all(r.status == MISMATCH for r in rows)
    assert any((tmp_path / "mismatch").rglob("*.mps"))


# --- cli ------------------------------------------------------------------------


def test_cli_gen_run_summary_profile(tmp_path, capsys):
    inst_dir = tmp_path / "inst"
    assert cli.main(["gen", "--seed", "5", "--settings", "6:3:2", "--per-setting", "1", "--out", str(inst_dir)]) == 0
    (path,) = inst_dir.glob("*.json")
    assert load_instance(path).reservoirs[0].n_units == 2
    spec = {
        "instances": ["inst/*.json"],
        "formulations": ["standard", "aggregated", "presolved"],
        "solve": {"time_limit": 60},
        "output_dir": "out",
    }
    (tmp_path / "spec.json").write_text(json.dumps(spec))
    assert cli.main(["run", "--spec", str(tmp_path / "spec.json")]) == 0
    csv_path = tmp_path / "out" / "results.csv"
    assert len(read_results(csv_path)) == 3
    capsys.readouterr()
    assert cli.main(["summary", "--in", str(csv_path), "--json"]) == 0
    summary = json.loads(capsys.readouterr().out)
    assert {s["formulation"] for s in summary} == {"standard", "aggregated", "presolved"}
    assert cli.main(["profile", "--in", str(csv_path), "--limit", "100"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "formulation,time_s,fraction_solved" and len(out) >= 4


def test_cli_bad_spec(tmp_path, capsys):
    (tmp_path / "spec.json").write_text(json.dumps({"instances": ["nothing/*.json"], "formulations": ["standard"]}))
    assert cli.main(["run", "--spec", str(tmp_path / "spec.json")]) == 2
    assert "no instance matches" in capsys.readouterr().err
