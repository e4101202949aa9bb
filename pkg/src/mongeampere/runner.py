"""End-to-end solves and the refinement / initial-guess benchmark grid."""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .fem import FemContext
from .mesh import generate_disk_mesh
from .objective import LeastSquaresObjective
from .optimizer import OptimizerConfig, RunReport, minimize
from .problems import ProblemSpec, builtin_problem, l2_error

logger = logging.getLogger(__name__)

BENCH_H = (1 / 32, 1 / 64, 1 / 128)
BENCH_G0 = (0.1, 0.2, 0.3)


@dataclass
class SolveResult:
    problem: ProblemSpec
    mesh: object
    report: RunReport
    l2_error: float | None

    @property
    def u(self):
        return self.report.u

    @property
    def g(self):
        return self.report.g


def initial_shift(mesh, g0) -> np.ndarray:
    """Interior starting field from a constant, an interior field or a full field."""
    g0 = np.asarray(g0, dtype=float)
    if g0.ndim == 0:
        return np.full(mesh.n_interior, float(g0))
    if g0.shape == (mesh.n_interior,):
        return g0.copy()
    if g0.shape == (mesh.n_vertices,):
        return mesh.restrict(g0)
    raise ValueError(
        f"g0 of shape {g0.shape} matches neither {mesh.n_interior} interior "
        f"nor {mesh.n_vertices} vertices")


def solve(problem: ProblemSpec, mesh, g0=0.0, config: OptimizerConfig = OptimizerConfig(),
          context: FemContext | None = None) -> SolveResult:
    """Minimize the least-squares functional of ``problem`` on ``mesh``."""
    ctx = context if context is not None else FemContext(mesh)
    objective = LeastSquaresObjective(ctx, problem.nodal_f(mesh))
    report = minimize(objective, initial_shift(mesh, g0), config)
    err = l2_error(mesh, report.u, problem.exact_u) if problem.exact_u is not None else None
    return SolveResult(problem, mesh, report, err)


@dataclass(frozen=True)
class BenchRow:
    h: float
    g0: float
    l2_error: float
    iterations: int
    termination: str


def _bench_cell(args):
    problem_id, h, g0, config = args
    try:
        result = solve(builtin_problem(problem_id), generate_disk_mesh(h), g0, config)
    except Exception as exc:  # a failed cell must not stop the table
        logger.exception("bench cell h=%s g0=%s failed", h, g0)
        return BenchRow(h, g0, float("nan"), -1, f"error: {type(exc).__name__}: {exc}")
    return BenchRow(h, g0, result.l2_error, result.report.iterations,
                    result.report.termination.value)


def run_bench(table: int, hs=BENCH_H, g0s=BENCH_G0, config: OptimizerConfig = OptimizerConfig(),
              jobs: int = 1) -> list[BenchRow]:
    """Rows ``(h, g0)`` for every mesh size and constant initial guess.

    ``table`` 1, 2 or 3 selects the benchmark problem. Cells are independent;
    ``jobs > 1`` runs them in worker processes.
    """
    if table not in (1, 2, 3):
        raise ValueError(f"table must be 1, 2 or 3, got {table!r}")
    cells = [(table, h, g0, config) for h in hs for g0 in g0s]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_bench_cell, cells))
    return [_bench_cell(c) for c in cells]
