"""Benchmark Monge-Ampere problems on the unit disk and discrete error norms.

All functions take an array of points of shape (N, 2) and return shape (N,).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np


class ProblemId(str, enum.Enum):
    TEST1 = "test1"
    TEST2 = "test2"
    TEST3 = "test3"


@dataclass(frozen=True)
class ProblemSpec:
    name: str
    f: Callable[[np.ndarray], np.ndarray]
    exact_u: Optional[Callable[[np.ndarray], np.ndarray]] = None
    domain: str = "unit-disk"

    def nodal_f(self, mesh) -> np.ndarray:
        """Nodal interpolant of ``f``, checked to be positive."""
        values = np.asarray(self.f(mesh.vertices), dtype=float)
        bad = np.flatnonzero(~(values > 0))
        if len(bad):
            raise ValueError(
                f"{self.name}: f must be positive, got {values[bad[0]]!r} at vertex {bad[0]}")
        return values


def _r2(x):
    x = np.asarray(x, dtype=float)
    return x[..., 0] ** 2 + x[..., 1] ** 2


def _test1_f(x):
    r2 = _r2(x)
    return 4.0 * (1.0 + 2.0 * r2) * np.exp(2.0 * (r2 - 1.0))


def _test1_u(x):
    return np.exp(_r2(x) - 1.0) - 1.0


def _test2_f(x):
    r2 = _r2(x)
    return (4.0 / 5.0) ** 2 * np.pi ** 2 * (
        np.cos(np.pi / 2.0 * (1.0 - r2)) ** 2
        + np.pi / 2.0 * r2 * np.sin(np.pi * (1.0 - r2)))


def _test2_u(x):
    return -(4.0 / 5.0) * np.sin(np.pi / 2.0 * (1.0 - _r2(x)))


def _test3_f(x):
    return np.ones(np.shape(x)[:-1])


def _test3_u(x):
    return 0.5 * (_r2(x) - 1.0)


_BUILTINS = {
    ProblemId.TEST1: ProblemSpec("test1", _test1_f, _test1_u),
    ProblemId.TEST2: ProblemSpec("test2", _test2_f, _test2_u),
    ProblemId.TEST3: ProblemSpec("test3", _test3_f, _test3_u),
}


def builtin_problem(problem_id) -> ProblemSpec:
    """One of the three unit-disk benchmarks; accepts ``'test1'``, ``1``, ``ProblemId.TEST1``..."""
    if isinstance(problem_id, int) and not isinstance(problem_id, bool):
        problem_id = f"test{problem_id}"
    if isinstance(problem_id, str):
        problem_id = problem_id.strip().lower()
    try:
        return _BUILTINS[ProblemId(problem_id)]
    except ValueError:
        raise ValueError(
            f"unknown problem {problem_id!r}; expected one of test1, test2, test3") from None


_EXPR_NAMES = {
    name: getattr(np, name)
    for name in ("sin", "cos", "tan", "exp", "log", "sqrt", "sinh", "cosh", "tanh",
                 "arctan", "arctan2", "abs", "pi", "e", "minimum", "maximum")
}


def expression_function(expr: str) -> Callable[[np.ndarray], np.ndarray]:
    """Vectorized function of ``x1``, ``x2`` (and ``r2 = x1^2 + x2^2``) from a
    numpy expression string such as ``"1 + 0.5*x1**2"``."""
    code = compile(expr, "<expression>", "eval")
    allowed = set(_EXPR_NAMES) | {"x1", "x2", "r2"}
    unknown = set(code.co_names) - allowed
    if unknown:
        raise ValueError(f"unknown name(s) in expression {expr!r}: {', '.join(sorted(unknown))}")

    def fn(x):
        x = np.asarray(x, dtype=float)
        scope = dict(_EXPR_NAMES, x1=x[:, 0], x2=x[:, 1], r2=_r2(x))
        return np.broadcast_to(eval(code, {"__builtins__": {}}, scope), (len(x),)).astype(float)

    return fn


def custom_problem(f_expr: str, u_expr: str | None = None, domain: str = "unit-disk") -> ProblemSpec:
    return ProblemSpec(
        name="custom", f=expression_function(f_expr),
        exact_u=expression_function(u_expr) if u_expr else None, domain=domain)


def l2_error(mesh, u_h, exact_u) -> float:
    """L2 norm over the mesh of ``I_h(exact_u) - u_h``.

    The squared P1 difference is integrated exactly with the edge-midpoint
    rule on each triangle.
    """
    if exact_u is None:
        raise ValueError("problem has no exact solution")
    u_h = np.asarray(u_h, dtype=float)
    if u_h.shape != (mesh.n_vertices,):
        raise ValueError(f"u_h must be a full nodal field of length {mesh.n_vertices}")
    e = (np.asarray(exact_u(mesh.vertices), dtype=float) - u_h)[mesh.triangles]
    mid = 0.5 * (e + e[:, [1, 2, 0]])
    return float(np.sqrt(np.sum(mesh.triangle_areas * np.mean(mid ** 2, axis=1))))
