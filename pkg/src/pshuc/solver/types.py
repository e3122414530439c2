from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

OPTIMAL = "optimal"
FEASIBLE_TIME_LIMIT = "feasible_time_limit"
INFEASIBLE = "infeasible"
ERROR = "error"
STATUSES = (OPTIMAL, FEASIBLE_TIME_LIMIT, INFEASIBLE, ERROR)


class SolverError(RuntimeError):
    """Backend crashed, rejected the model, or returned something unusable."""


class BackendNotFound(SolverError):
    pass


@dataclass(frozen=True)
class SolveConfig:
    backend: str = "highs"
    time_limit: float = 1800.0
    mip_gap: float = 1e-4
    optimality_tol: float = 1e-4
    symmetry_detection: bool = False
    threads: int | None = None
    seed: int = 0
    file_format: str = "mps"
    work_dir: Path | str | None = None
    keep_files: bool = False

    def __post_init__(self):
        if not self.time_limit > 0:
            raise ValueError("time_limit must be positive")
        if not 0 <= self.mip_gap < 1:
            raise ValueError("mip_gap must lie in [0, 1)")
        if self.file_format not in ("mps", "lp"):
            raise ValueError("file_format must be 'mps' or 'lp'")


@dataclass
class SolveStats:
    backend: str
    wall_time: float
    # None when the backend does not report it
    nodes: int | None = None
    gap: float | None = None
    symmetry: str = "off"
    threads: int | str | None = None
    n_rows: int | None = None
    n_cols: int | None = None
    n_nonzeros: int | None = None


@dataclass
class Solution:
    status: str
    objective: float | None
    values: dict[str, float] = field(default_factory=dict)
    stats: SolveStats | None = None
    model_path: Path | None = None

    def __post_init__(self):
        has_obj = self.objective is not None
        if has_obj != (self.status in (OPTIMAL, FEASIBLE_TIME_LIMIT)):
            raise ValueError(f"status {self.status!r} inconsistent with objective {self.objective!r}")

    @property
    def ok(self) -> bool:
        return self.status in (OPTIMAL, FEASIBLE_TIME_LIMIT)

    def __getitem__(self, name: str) -> float:
        return self.values[name]
