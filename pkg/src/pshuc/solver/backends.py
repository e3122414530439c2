"""Backend adapters: model file in, :class:`Solution` out.

highs
    ``highspy`` library call.  Reads MPS or LP, MILP and continuous QP only
    (no quadratic objective together with integer variables).  Exposes node
    counts, final gap and a symmetry-detection switch
    (``mip_detect_symmetry``).
scip
    ``pyscipopt`` library call.  Reads MPS (incl. QMATRIX) or LP and handles
    convex MIQP.  Symmetry handling is switched by ``misc/usesymmetry``.
    Runs single-threaded, so the ``threads`` setting is recorded as
    unsupported.
"""

from __future__ import annotations

import time
from pathlib import Path

from .types import (
    ERROR,
    FEASIBLE_TIME_LIMIT,
    INFEASIBLE,
    OPTIMAL,
    BackendNotFound,
    Solution,
    SolveConfig,
    SolveStats,
    SolverError,
)

__all__ = ["HighsBackend", "ScipBackend", "BACKENDS", "get_backend"]


class HighsBackend:
    name = "highs"
    supports_miqp = False

    def __init__(self):
        try:
            import highspy
        except ImportError as e:
            raise BackendNotFound("backend 'highs' needs the highspy package") from e
        self._highspy = highspy

    def solve_file(self, path: Path, cfg: SolveConfig) -> Solution:
        hs = self._highspy
        h = hs.Highs()
        log = Path(path).with_suffix(".log")
        opts = {
            "output_flag": True,
            "log_to_console": False,
            "log_file": str(log),
            "time_limit": float(cfg.time_limit),
            "mip_rel_gap": float(cfg.mip_gap),
            "dual_feasibility_tolerance": float(cfg.optimality_tol),
            "mip_detect_symmetry": cfg.symmetry_detection,
            "random_seed": int(cfg.seed),
        }
        if cfg.threads:
            opts["threads"] = int(cfg.threads)
        for k, v in opts.items():
            if h.setOptionValue(k, v) == hs.HighsStatus.kError:
                raise SolverError(f"highs rejected option {k}={v!r}")
        if h.readModel(str(path)) == hs.HighsStatus.kError:
            raise SolverError(f"highs could not parse {path}: {_tail(log)}")

        start = time.perf_counter()
        run_status = h.run()
        wall = time.perf_counter() - start
        if run_status == hs.HighsStatus.kError:
            raise SolverError(f"highs failed on {path}: {_tail(log)}")

        info = h.getInfo()
        ms = h.getModelStatus()
        M = hs.HighsModelStatus
        has_sol = info.primal_solution_status == 2
        if ms == M.kOptimal:
            status = OPTIMAL
        elif ms in (M.kTimeLimit, M.kIterationLimit, M.kSolutionLimit, M.kInterrupt) and has_sol:
            status = FEASIBLE_TIME_LIMIT
        elif ms in (M.kInfeasible, M.kUnboundedOrInfeasible):
            status = INFEASIBLE
        else:
            status = ERROR

        lp = h.getLp()
        is_mip = any(int(x) != 0 for x in lp.integrality_) if lp.integrality_ else False
        nodes = int(info.mip_node_count) if is_mip and info.mip_node_count >= 0 else None
        gap = float(info.mip_gap) if is_mip and status in (OPTIMAL, FEASIBLE_TIME_LIMIT) else None
        if not is_mip and status == OPTIMAL:
            gap = 0.0
        stats = SolveStats(
            backend=self.name,
            wall_time=wall,
            nodes=nodes,
            gap=gap,
            symmetry="on" if cfg.symmetry_detection else "off",
            threads=cfg.threads,
            n_rows=lp.num_row_,
            n_cols=lp.num_col_,
            n_nonzeros=int(h.getNumNz()),
        )
        if status not in (OPTIMAL, FEASIBLE_TIME_LIMIT):
            return Solution(status=status, objective=None, values={}, stats=stats)
        values = dict(zip(lp.col_names_, h.getSolution().col_value))
        return Solution(status=status, objective=float(info.objective_function_value), values=values, stats=stats)


class ScipBackend:
    name = "scip"
    supports_miqp = True

    def __init__(self):
        try:
            import pyscipopt
        except ImportError as e:
            raise BackendNotFound("backend 'scip' needs the pyscipopt package") from e
        self._scip = pyscipopt

    def solve_file(self, path: Path, cfg: SolveConfig) -> Solution:
        m = self._scip.Model()
        m.hideOutput()
        log = Path(path).with_suffix(".log")
        m.setLogfile(str(log))
        try:
            m.readProblem(str(path))
        except OSError as e:
            raise SolverError(f"scip could not parse {path}: {e}") from e
        m.setParam("limits/time", float(cfg.time_limit))
        m.setParam("limits/gap", float(cfg.mip_gap))
        m.setParam("numerics/dualfeastol", float(cfg.optimality_tol))
        m.setParam("randomization/randomseedshift", int(cfg.seed))
        if not cfg.symmetry_detection:
            m.setParam("misc/usesymmetry", 0)

        start = time.perf_counter()
        try:
            m.optimize()
        except Exception as e:  # pyscipopt surfaces solver failures as generic errors
            raise SolverError(f"scip failed on {path}: {e}; {_tail(log)}") from e
        wall = time.perf_counter() - start

        st = m.getStatus()
        n_sols = m.getNSols()
        if st in ("optimal", "gaplimit"):
            status = OPTIMAL
        elif st in ("timelimit", "nodelimit", "userinterrupt", "memlimit") and n_sols > 0:
            status = FEASIBLE_TIME_LIMIT
        elif st in ("infeasible", "inforunbd"):
            status = INFEASIBLE
        else:
            status = ERROR

        stats = SolveStats(
            backend=self.name,
            wall_time=wall,
            nodes=int(m.getNNodes()),
            gap=float(m.getGap()) if status in (OPTIMAL, FEASIBLE_TIME_LIMIT) else None,
            symmetry="on" if cfg.symmetry_detection else "off",
            threads="unsupported" if cfg.threads else None,
            n_rows=m.getNConss(),
            n_cols=m.getNVars(),
            n_nonzeros=None,
        )
        if status not in (OPTIMAL, FEASIBLE_TIME_LIMIT):
            return Solution(status=status, objective=None, values={}, stats=stats)
        sol = m.getBestSol()
        values = {v.name: m.getSolVal(sol, v) for v in m.getVars()}
        return Solution(status=status, objective=float(m.getObjVal()), values=values, stats=stats)


BACKENDS = {"highs": HighsBackend, "scip": ScipBackend}


def get_backend(name: str):
    try:
        cls = BACKENDS[name]
    except KeyError:
        raise BackendNotFound(f"unknown backend {name!r}; available: {', '.join(BACKENDS)}") from None
    return cls()


def _tail(log: Path, n: int = 20) -> str:
    try:
        return "\n".join(log.read_text().splitlines()[-n:])
    except OSError:
        return "(no solver log)"
