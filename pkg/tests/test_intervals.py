from collections import Counter
import random

import pytest
from hypothesis import given, strategies as st

from pshuc.instance import REFERENCE_UNIT, MIXED_UNITS
from pshuc.intervals import (
    MAX_UNITS,
    Interval,
    IntervalSet,
    enumerate_mode_intervals,
    merge_intervals,
    mode_interval_set,
    mode_vectors,
)


def covered(raw, x):
    return any(lo <= x <= hi for lo, hi in raw)


def test_three_reference_pump_bounds_multiplicities():
    raw = enumerate_mode_intervals([(195, 205)] * 3)
    assert len(raw) == 7
    assert Counter(tuple(iv) for iv in raw) == {(195, 205): 3, (390, 410): 3, (585, 615): 1}


def test_single_unit():
    assert enumerate_mode_intervals([(100, 200)]) == [Interval(100, 200)]


def test_two_nonidentical_pump_units():
    raw = enumerate_mode_intervals([(195, 205), (193, 208)])
    assert set(map(tuple, raw)) == {(195, 205), (193, 208), (388, 413)}


def test_enumeration_length_is_all_nonzero_vectors():
    for n in range(1, 8):
        assert len(enumerate_mode_intervals([(1, 2)] * n)) == 2**n - 1
        assert len(set(mode_vectors(n))) == 2**n - 1


@pytest.mark.parametrize("n", [0, MAX_UNITS + 1])
def test_unit_count_guard(n):
    with pytest.raises(ValueError):
        enumerate_mode_intervals([(1, 2)] * n)


def test_reversed_bounds_rejected():
    with pytest.raises(ValueError):
        enumerate_mode_intervals([(5, 1)])


@pytest.mark.parametrize(
    "raw, expected",
    [
        ([(1, 3), (2, 5), (7, 9)], [(1, 5), (7, 9)]),
        ([(1, 2), (2, 3)], [(1, 3)]),
        ([(100, 200), (200, 400), (300, 600)], [(100, 600)]),
        ([(7, 9), (1, 3)], [(1, 3), (7, 9)]),
        ([(4, 4)], [(4, 4)]),
    ],
)
def test_merge_examples(raw, expected):
    assert merge_intervals(raw).as_tuples() == expected


def test_merge_empty_rejected():
    with pytest.raises(ValueError):
        merge_intervals([])


def test_interval_set_rejects_touching():
    with pytest.raises(ValueError):
        IntervalSet((Interval(1, 2), Interval(2, 3)))


def test_reference_plant_pump_and_gen():
    units = [REFERENCE_UNIT] * 3
    pump = mode_interval_set(units, "pump")
    gen = mode_interval_set(units, "gen")
    assert pump.as_tuples() == [(195, 205), (390, 410), (585, 615)] and pump.k == 3
    assert gen.as_tuples() == [(100, 600)] and gen.k == 1


def _grid_oracle(raw, step=0.5):
    """Maximal covered runs of a fine grid, rebuilt without any sorting sweep."""
    lo = min(a for a, _ in raw)
    hi = max(b for _, b in raw)
    pts = [lo + i * step for i in range(int((hi - lo) / step) + 1)]
    runs, start, last = [], None, None
    for x in pts:
        if covered(raw, x):
            start = x if start is None else start
            last = x
        elif start is not None:
            runs.append((start, last))
            start = None
    if start is not None:
        runs.append((start, last))
    return runs


def test_four_nonidentical_pump_units():
    bounds = [u.bounds("pump") for u in MIXED_UNITS]
    raw = [tuple(iv) for iv in enumerate_mode_intervals(bounds)]
    got = mode_interval_set(MIXED_UNITS, "pump")
    # integer data, so a half-unit grid resolves every gap between intervals
    assert got.as_tuples() == _grid_oracle(raw)
    assert got.as_tuples() == [(192, 210), (385, 418), (580, 623), (777, 827)]


def test_four_nonidentical_gen_units():
    got = mode_interval_set(MIXED_UNITS, "gen")
    raw = [tuple(iv) for iv in enumerate_mode_intervals([u.bounds("gen") for u in MIXED_UNITS])]
    assert got.as_tuples() == _grid_oracle(raw) == [(95, 810)]


intervals_st = st.lists(
    st.tuples(st.integers(0, 1000), st.integers(0, 1000)).map(lambda p: (min(p), max(p))),
    min_size=1,
    max_size=8,
)


@given(intervals_st)
def test_merge_is_ordered_and_disjoint(raw):
    out = merge_intervals(raw)
    for a, b in zip(out, list(out)[1:]):
        assert a.hi < b.lo


@given(intervals_st, st.lists(st.floats(-10, 1010, allow_nan=False), max_size=50))
def test_merge_preserves_membership(raw, xs):
    out = merge_intervals(raw)
    for x in xs + [v for iv in raw for v in iv]:
        assert (x in out) == covered(raw, x)


@given(intervals_st)
def test_merge_idempotent(raw):
    once = merge_intervals(raw)
    assert merge_intervals(once) == once


@given(intervals_st, st.randoms())
def test_merge_permutation_invariant(raw, rnd):
    shuffled = list(raw)
    rnd.shuffle(shuffled)
    assert merge_intervals(shuffled) == merge_intervals(raw)


@given(st.integers(0, 1000), intervals_st)
def test_common_point_gives_one_interval(c, raw):
    through_c = [(min(lo, c), max(hi, c)) for lo, hi in raw]
    assert merge_intervals(through_c).k == 1


@given(st.lists(st.tuples(st.integers(1, 50), st.integers(0, 50)), min_size=1, max_size=6))
def test_mode_interval_set_matches_subset_sums(spec):
    bounds = [(lo, lo + w) for lo, w in spec]
    out = merge_intervals(enumerate_mode_intervals(bounds))
    rng = random.Random(0)
    for subset in mode_vectors(len(bounds)):
        lo = sum(bounds[g][0] for g in subset)
        hi = sum(bounds[g][1] for g in subset)
        assert lo in out and hi in out and rng.uniform(lo, hi) in out
    assert out.k <= len(bounds) * (len(bounds) + 1)
