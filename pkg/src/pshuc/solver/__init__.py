"""Model-file emission and MILP backend drivers."""

from __future__ import annotations

import shutil
import tempfile
from pathlib import Path

from ..ir import ModelIR
from .backends import BACKENDS, get_backend
from .formats import emit_lp, emit_mps, lp_text, mps_text
from .types import (
    ERROR,
    FEASIBLE_TIME_LIMIT,
    INFEASIBLE,
    OPTIMAL,
    STATUSES,
    BackendNotFound,
    Solution,
    SolveConfig,
    SolveStats,
    SolverError,
)

__all__ = [
    "BACKENDS",
    "BackendNotFound",
    "ERROR",
    "FEASIBLE_TIME_LIMIT",
    "INFEASIBLE",
    "OPTIMAL",
    "STATUSES",
    "Solution",
    "SolveConfig",
    "SolveStats",
    "SolverError",
    "emit_lp",
    "emit_mps",
    "get_backend",
    "lp_text",
    "mps_text",
    "solve",
    "INTEGRALITY_TOL",
]

INTEGRALITY_TOL = 1e-6


def solve(ir: ModelIR, cfg: SolveConfig | None = None) -> Solution:
    """Write ``ir`` to a model file, run the configured backend, read back.

    Values of integer/binary columns within ``INTEGRALITY_TOL`` of an
    integer are snapped to it.  Backend-internal auxiliary columns are
    dropped from ``values``.
    """
    cfg = cfg or SolveConfig()
    backend = get_backend(cfg.backend)
    if ir.quadratic and not backend.supports_miqp and any(v.is_integral for v in ir.variables):
        raise SolverError(
            f"backend {cfg.backend!r} cannot solve a quadratic objective with integer "
            "variables; use piecewise cost or backend 'scip'"
        )

    if cfg.work_dir is not None:
        Path(cfg.work_dir).mkdir(parents=True, exist_ok=True)
    tmp = Path(tempfile.mkdtemp(prefix="pshuc_", dir=cfg.work_dir))
    path = tmp / f"{_safe(ir.name)}.{cfg.file_format}"
    try:
        (emit_mps if cfg.file_format == "mps" else emit_lp)(ir, path)
        sol = backend.solve_file(path, cfg)
    finally:
        if not cfg.keep_files:
            shutil.rmtree(tmp, ignore_errors=True)

    if sol.values:
        missing = [v.name for v in ir.variables if v.name not in sol.values]
        if missing:
            raise SolverError(f"backend returned no value for {len(missing)} columns, e.g. {missing[0]}")
        clean = {}
        for v in ir.variables:
            x = sol.values[v.name]
            if v.is_integral and abs(x - round(x)) <= INTEGRALITY_TOL:
                x = float(round(x))
            clean[v.name] = x
        sol.values = clean
    if cfg.keep_files:
        sol.model_path = path
    return sol


def _safe(name: str) -> str:
    return "".join(c if c.isalnum() or c in "-_" else "_" for c in name) or "model"
