"""Free-format MPS and CPLEX-style LP writers for :class:`ModelIR`.

Output is a pure function of the IR: declaration order everywhere and
``repr`` for numbers, so identical models give byte-identical files.
"""

from __future__ import annotations

import math
from collections import defaultdict

from ..ir import BINARY, INTEGER, ModelIR

__all__ = ["emit_mps", "emit_lp", "mps_text", "lp_text", "MAX_NAME"]

MAX_NAME = 255
_OBJ = "obj"
_MPS_SENSE = {"<=": "L", "=": "E", ">=": "G"}


def _num(x: float) -> str:
    x = float(x)
    if x == 0:
        return "0"
    if x.is_integer() and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


def _check_names(ir: ModelIR) -> None:
    names = [v.name for v in ir.variables] + [r.name for r in ir.rows]
    assert len(set(v.name for v in ir.variables)) == len(ir.variables), "duplicate variable names"
    assert len(set(r.name for r in ir.rows)) == len(ir.rows), "duplicate row names"
    for n in names:
        if len(n) > MAX_NAME or not n or any(c.isspace() for c in n):
            raise ValueError(f"name {n!r} cannot be written to a model file")
    if _OBJ in {r.name for r in ir.rows}:
        raise ValueError(f"row name {_OBJ!r} is reserved for the objective")


def mps_text(ir: ModelIR) -> str:
    _check_names(ir)
    out = [f"NAME {ir.name}", "ROWS", f" N  {_OBJ}"]
    out += [f" {_MPS_SENSE[r.sense]}  {r.name}" for r in ir.rows]

    cols: dict[str, list[tuple[str, float]]] = defaultdict(list)
    for r in ir.rows:
        for v, c in r.terms:
            cols[v].append((r.name, c))

    out.append("COLUMNS")
    in_marker = False
    n_marker = 0
    for var in ir.variables:
        if var.is_integral and not in_marker:
            out.append(f"    MARKER{n_marker}  'MARKER'  'INTORG'")
            in_marker = True
        elif not var.is_integral and in_marker:
            out.append(f"    MARKER{n_marker}  'MARKER'  'INTEND'")
            in_marker = False
            n_marker += 1
        entries = []
        if var.name in ir.objective:
            entries.append((_OBJ, ir.objective[var.name]))
        entries += cols.get(var.name, [])
        if not entries:
            entries = [(_OBJ, 0.0)]
        out += [f"    {var.name}  {row}  {_num(c)}" for row, c in entries]
    if in_marker:
        out.append(f"    MARKER{n_marker}  'MARKER'  'INTEND'")

    out.append("RHS")
    out += [f"    RHS  {r.name}  {_num(r.rhs)}" for r in ir.rows if r.rhs != 0]

    out.append("BOUNDS")
    for v in ir.variables:
        if v.kind == BINARY and v.lo == 0 and v.hi == 1:
            out.append(f" BV BND  {v.name}")
        elif v.lo == v.hi:
            out.append(f" FX BND  {v.name}  {_num(v.lo)}")
        else:
            if v.lo == -math.inf:
                out.append(f" MI BND  {v.name}")
            elif v.lo != 0 or v.kind == INTEGER:
                out.append(f" LO BND  {v.name}  {_num(v.lo)}")
            if v.hi != math.inf:
                out.append(f" UP BND  {v.name}  {_num(v.hi)}")
            elif v.kind == INTEGER or v.kind == BINARY:
                out.append(f" PL BND  {v.name}")

    if ir.quadratic:
        # objective is c'x + 1/2 x'Qx, so a*x^2 becomes Q_xx = 2a
        out.append("QMATRIX")
        out += [f"    {n}  {n}  {_num(2 * c)}" for n, c in ir.quadratic.items()]
    out.append("ENDATA")
    return "\n".join(out) + "\n"


def _lp_expr(terms, per_line: int = 6) -> list[str]:
    chunks = []
    for i, (v, c) in enumerate(terms):
        sign = "-" if c < 0 else "+"
        mag = _num(abs(c))
        tok = f"{sign} {mag} {v}"
        if i == 0:
            tok = f"{'-' if c < 0 else ''}{mag} {v}"
        chunks.append(tok)
    return [" ".join(chunks[i:i + per_line]) for i in range(0, len(chunks), per_line)]


def lp_text(ir: ModelIR) -> str:
    _check_names(ir)
    out = [f"\\ {ir.name}", "Minimize"]
    lines = _lp_expr(list(ir.objective.items()))
    if ir.quadratic:
        quad = " + ".join(f"{_num(2 * c)} {n}^2" for n, c in ir.quadratic.items())
        lines.append(("+ " if lines else "") + f"[ {quad} ] / 2")
    if not lines:
        lines = ["0"]
    out.append(f" {_OBJ}: " + lines[0])
    out += [f"   {ln}" for ln in lines[1:]]

    out.append("Subject To")
    for r in ir.rows:
        lines = _lp_expr(r.terms)
        lines[-1] += f" {r.sense} {_num(r.rhs)}"
        out.append(f" {r.name}: " + lines[0])
        out += [f"   {ln}" for ln in lines[1:]]

    out.append("Bounds")
    for v in ir.variables:
        if v.kind == BINARY and v.lo == 0 and v.hi == 1:
            continue
        if v.lo == v.hi:
            out.append(f" {v.name} = {_num(v.lo)}")
        elif v.lo == -math.inf and v.hi == math.inf:
            out.append(f" {v.name} free")
        elif v.lo == 0 and v.hi == math.inf:
            continue
        else:
            lo = "-inf" if v.lo == -math.inf else _num(v.lo)
            hi = "+inf" if v.hi == math.inf else _num(v.hi)
            out.append(f" {lo} <= {v.name} <= {hi}")

    gen = [v.name for v in ir.variables if v.kind == INTEGER]
    binv = [v.name for v in ir.variables if v.kind == BINARY]
    if gen:
        out.append("General")
        out += [f" {n}" for n in gen]
    if binv:
        out.append("Binary")
        out += [f" {n}" for n in binv]
    out.append("End")
    return "\n".join(out) + "\n"


def emit_mps(ir: ModelIR, path) -> None:
    with open(path, "w") as fh:
        fh.write(mps_text(ir))


def emit_lp(ir: ModelIR, path) -> None:
    with open(path, "w") as fh:
        fh.write(lp_text(ir))
