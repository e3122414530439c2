"""Reachable total-power sets of a multi-unit plant as disjoint intervals.

For a fixed nonzero on/off vector ``u`` over the plant's units, the total
power can be anything in ``[sum(lo_g * u_g), sum(hi_g * u_g)]``.  The union
over all ``2**n - 1`` vectors is then merged into as few closed intervals as
possible; intervals that share even a single point are merged.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

__all__ = [
    "Interval",
    "IntervalSet",
    "MAX_UNITS",
    "enumerate_mode_intervals",
    "merge_intervals",
    "mode_interval_set",
    "mode_vectors",
]

MAX_UNITS = 20


@dataclass(frozen=True, order=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo <= self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    def __contains__(self, x: float) -> bool:
        return self.lo <= x <= self.hi

    def __iter__(self):
        yield self.lo
        yield self.hi


@dataclass(frozen=True)
class IntervalSet:
    """Closed intervals, sorted, with ``hi[i] < lo[i+1]`` strictly."""

    intervals: tuple[Interval, ...]

    def __post_init__(self):
        object.__setattr__(self, "intervals", tuple(self.intervals))
        for a, b in zip(self.intervals, self.intervals[1:]):
            if not a.hi < b.lo:
                raise ValueError(f"intervals {a} and {b} are not disjoint and ordered")

    @property
    def k(self) -> int:
        return len(self.intervals)

    def __len__(self):
        return len(self.intervals)

    def __iter__(self):
        return iter(self.intervals)

    def __getitem__(self, i) -> Interval:
        return self.intervals[i]

    def __contains__(self, x: float) -> bool:
        return any(x in iv for iv in self.intervals)

    def as_tuples(self) -> list[tuple[float, float]]:
        return [(iv.lo, iv.hi) for iv in self.intervals]


def _as_interval(iv) -> Interval:
    return iv if isinstance(iv, Interval) else Interval(*iv)


def mode_vectors(n: int) -> Iterable[tuple[int, ...]]:
    """Nonempty subsets of ``range(n)``: by size, then lexicographically."""
    for size in range(1, n + 1):
        yield from itertools.combinations(range(n), size)


def enumerate_mode_intervals(bounds: Sequence[tuple[float, float]]) -> list[Interval]:
    """One interval per nonzero on/off vector over the given unit bounds."""
    n = len(bounds)
    if not 1 <= n <= MAX_UNITS:
        raise ValueError(f"need between 1 and {MAX_UNITS} units, got {n}")
    for lo, hi in bounds:
        if not lo <= hi:
            raise ValueError(f"unit bounds ({lo}, {hi}) have lo > hi")
    return [
        Interval(sum(bounds[g][0] for g in subset), sum(bounds[g][1] for g in subset))
        for subset in mode_vectors(n)
    ]


def merge_intervals(raw: Iterable) -> IntervalSet:
    """Merge closed intervals into an ordered set of disjoint ones.

    Sort by lower end (ties by upper end), then sweep: an interval whose lower
    end does not exceed the running upper end is absorbed.
    """
    items = sorted(_as_interval(iv) for iv in raw)
    if not items:
        raise ValueError("cannot merge an empty list of intervals")
    merged: list[Interval] = []
    lo, hi = items[0].lo, items[0].hi
    for iv in items[1:]:
        if iv.lo <= hi:
            hi = max(hi, iv.hi)
        else:
            merged.append(Interval(lo, hi))
            lo, hi = iv.lo, iv.hi
    merged.append(Interval(lo, hi))
    return IntervalSet(tuple(merged))


def mode_interval_set(units, mode: str) -> IntervalSet:
    """Disjoint intervals of total plant power in ``mode`` ('pump' or 'gen')."""
    units = list(units)
    if not units:
        raise ValueError("a plant needs at least one unit")
    return merge_intervals(enumerate_mode_intervals([u.bounds(mode) for u in units]))
