"""Solver-neutral model container.

Variables and rows keep declaration order, which is also the order in which
the MPS/LP writers emit them.  Names follow ``family(index,...)``.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

__all__ = ["Var", "Row", "ModelIR", "CONTINUOUS", "INTEGER", "BINARY", "vname"]

CONTINUOUS = "continuous"
INTEGER = "integer"
BINARY = "binary"
_KINDS = (CONTINUOUS, INTEGER, BINARY)
_SENSES = ("<=", "=", ">=")


def vname(family: str, *index) -> str:
    return f"{family}({','.join(str(i) for i in index)})"


@dataclass(frozen=True)
class Var:
    name: str
    kind: str = CONTINUOUS
    lo: float = 0.0
    hi: float = math.inf
    owner: str | None = None

    @property
    def is_integral(self) -> bool:
        return self.kind != CONTINUOUS


@dataclass(frozen=True)
class Row:
    name: str
    terms: tuple[tuple[str, float], ...]
    sense: str
    rhs: float

    def activity(self, values: Mapping[str, float]) -> float:
        return sum(c * values[v] for v, c in self.terms)

    def violation(self, values: Mapping[str, float]) -> float:
        lhs = self.activity(values)
        if self.sense == "<=":
            return max(0.0, lhs - self.rhs)
        if self.sense == ">=":
            return max(0.0, self.rhs - lhs)
        return abs(lhs - self.rhs)


@dataclass
class ModelIR:
    name: str = "model"
    variables: list[Var] = field(default_factory=list)
    rows: list[Row] = field(default_factory=list)
    objective: dict[str, float] = field(default_factory=dict)
    # c * x**2 for each entry x -> c
    quadratic: dict[str, float] = field(default_factory=dict)
    _index: dict[str, int] = field(default_factory=dict, repr=False)
    _row_index: dict[str, int] = field(default_factory=dict, repr=False)

    # -- construction ------------------------------------------------------

    def add_var(self, name, kind=CONTINUOUS, lo=0.0, hi=math.inf, owner=None) -> str:
        if name in self._index:
            raise ValueError(f"duplicate variable {name!r}")
        if kind not in _KINDS:
            raise ValueError(f"unknown variable kind {kind!r}")
        if kind == BINARY and not (0 <= lo and hi <= 1):
            raise ValueError(f"binary {name!r} needs bounds within [0, 1]")
        if lo > hi:
            raise ValueError(f"variable {name!r} has lo > hi")
        self._index[name] = len(self.variables)
        self.variables.append(Var(name, kind, float(lo), float(hi), owner))
        return name

    def add_row(self, name: str, terms: Iterable[tuple[str, float]], sense: str, rhs: float) -> Row:
        if name in self._row_index:
            raise ValueError(f"duplicate row {name!r}")
        if sense not in _SENSES:
            raise ValueError(f"unknown sense {sense!r}")
        merged: dict[str, float] = {}
        for v, c in terms:
            if v not in self._index:
                raise KeyError(f"row {name!r} references undeclared variable {v!r}")
            merged[v] = merged.get(v, 0.0) + float(c)
        kept = tuple((v, c) for v, c in merged.items() if c != 0.0)
        if not kept:
            raise ValueError(f"row {name!r} has no nonzero terms")
        row = Row(name, kept, sense, float(rhs))
        self._row_index[name] = len(self.rows)
        self.rows.append(row)
        return row

    def add_objective(self, name: str, coef: float) -> None:
        if name not in self._index:
            raise KeyError(f"objective references undeclared variable {name!r}")
        total = self.objective.get(name, 0.0) + float(coef)
        if total == 0.0:
            self.objective.pop(name, None)
        else:
            self.objective[name] = total

    def add_quadratic(self, name: str, coef: float) -> None:
        if name not in self._index:
            raise KeyError(f"objective references undeclared variable {name!r}")
        if coef < 0:
            raise ValueError("negative diagonal quadratic term makes the objective nonconvex")
        if coef:
            self.quadratic[name] = self.quadratic.get(name, 0.0) + float(coef)

    # -- queries -----------------------------------------------------------

    def var(self, name: str) -> Var:
        return self.variables[self._index[name]]

    def has_var(self, name: str) -> bool:
        return name in self._index

    def row(self, name: str) -> Row:
        return self.rows[self._row_index[name]]

    @property
    def n_nonzeros(self) -> int:
        return sum(len(r.terms) for r in self.rows)

    def count(self, kind: str, owner: str | None = None) -> int:
        return sum(
            1 for v in self.variables if v.kind == kind and (owner is None or v.owner == owner)
        )

    def evaluate_objective(self, values: Mapping[str, float]) -> float:
        lin = sum(c * values[v] for v, c in self.objective.items())
        return lin + sum(c * values[v] ** 2 for v, c in self.quadratic.items())

    def violations(self, values: Mapping[str, float], tol: float = 1e-6) -> list[str]:
        """Rows and bounds violated by ``values`` beyond ``tol``."""
        out = [r.name for r in self.rows if r.violation(values) > tol]
        for v in self.variables:
            x = values[v.name]
            if x < v.lo - tol or x > v.hi + tol:
                out.append(f"bound:{v.name}")
            elif v.is_integral and abs(x - round(x)) > tol:
                out.append(f"integrality:{v.name}")
        return out

    def relaxed(self) -> "ModelIR":
        """Copy with every integer/binary variable made continuous."""
        out = dataclasses.replace(
            self,
            name=self.name + "_relaxed",
            variables=[dataclasses.replace(v, kind=CONTINUOUS) for v in self.variables],
            rows=list(self.rows),
            objective=dict(self.objective),
            quadratic=dict(self.quadratic),
            _index=dict(self._index),
            _row_index=dict(self._row_index),
        )
        return out
