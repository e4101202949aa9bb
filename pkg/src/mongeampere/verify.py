"""Self-checks run by ``mongeampere verify``.

``fast``: adjoint gradient against central differences, affine exactness of
the discrete Hessian, linearity of the Poisson solve.
``full``: additionally the refinement studies (Poisson L2 order, Hessian
consistency trend) and a five-draw gradient check at N_0h <= 200.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import objective as obj
from .fem import FemContext
from .hessian import discrete_hessian
from .mesh import generate_disk_mesh
from .problems import builtin_problem, l2_error


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    measured: float
    required: str
    seconds: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.name}: measured {self.measured:.3e}, required {self.required} ({self.seconds:.1f}s)"


def gradient_check(h=0.3, draws=3, eps=1e-6, tol=1e-5, seed=0, gradient_fn=None) -> CheckResult:
    """Worst relative l2 gap between the adjoint gradient and central differences."""
    gradient_fn = gradient_fn or obj.gradient
    mesh = generate_disk_mesh(h)
    ctx = FemContext(mesh)
    f = builtin_problem("test1").nodal_f(mesh)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(draws):
        g = rng.uniform(0.0, 1.0, mesh.n_interior)
        fd = obj.fd_gradient(ctx, f, g, eps)
        worst = max(worst, np.linalg.norm(gradient_fn(ctx, f, g) - fd) / np.linalg.norm(fd))
    return CheckResult(f"adjoint gradient vs finite differences (N_0h={mesh.n_interior}, {draws} draws)",
                       bool(worst < tol), float(worst), f"< {tol:g}")


def affine_hessian_check(h=0.2, seed=1, tol=1e-12) -> CheckResult:
    mesh = generate_disk_mesh(h)
    ctx = FemContext(mesh)
    a, b, c = np.random.default_rng(seed).uniform(-1.0, 1.0, 3)
    phi = a + b * mesh.vertices[:, 0] + c * mesh.vertices[:, 1]
    hess = discrete_hessian(mesh, ctx.k11, ctx.k22, ctx.k12, phi)
    worst = float(max(np.abs(d).max() for d in hess))
    return CheckResult("discrete Hessian of affine field vanishes", worst <= tol, worst, f"<= {tol:g}")


def poisson_linearity_check(h=0.1, seed=2, tol=1e-10) -> CheckResult:
    mesh = generate_disk_mesh(h)
    ctx = FemContext(mesh)
    rng = np.random.default_rng(seed)
    s1, s2 = rng.normal(size=(2, mesh.n_vertices))
    lhs = ctx.solve(s1 + s2)
    gap = float(np.abs(lhs - ctx.solve(s1) - ctx.solve(s2)).max() / np.abs(lhs).max())
    return CheckResult("Poisson solve is linear", gap <= tol, gap, f"<= {tol:g}")


def poisson_order_check(hs=(1 / 8, 1 / 16, 1 / 32), lo=3.2, hi=4.8) -> CheckResult:
    """Error ratios per halving for the source 2 against u = (|x|^2 - 1)/2."""
    exact = builtin_problem("test3").exact_u
    errors = []
    for h in hs:
        mesh = generate_disk_mesh(h)
        errors.append(l2_error(mesh, FemContext(mesh).solve(np.full(mesh.n_vertices, 2.0)), exact))
    ratios = [e0 / e1 for e0, e1 in zip(errors, errors[1:])]
    worst = max(ratios, key=lambda r: abs(r - 4.0))
    ok = all(lo <= r <= hi for r in ratios)
    return CheckResult("Poisson L2 error ratio per halving " + ", ".join(f"{r:.2f}" for r in ratios),
                       ok, float(worst), f"in [{lo}, {hi}]")


def hessian_trend_check(hs=(1 / 16, 1 / 32), radius=0.3) -> CheckResult:
    """Max deviation of D11(x1^2) from 2 over interior vertices with |x| >= radius
    must shrink under refinement."""
    devs = []
    for h in hs:
        mesh = generate_disk_mesh(h)
        ctx = FemContext(mesh)
        x = mesh.vertices
        d11 = discrete_hessian(mesh, ctx.k11, ctx.k22, ctx.k12, x[:, 0] ** 2).d11
        away = np.hypot(*x[mesh.interior].T) >= radius
        devs.append(float(np.abs(d11[away] - 2.0).max()))
    ratio = devs[0] / devs[1]
    return CheckResult(f"Hessian consistency away from center {devs[0]:.2e} -> {devs[1]:.2e}",
                       ratio > 1.0, ratio, "> 1 (ratio)")


def run_checks(level="fast", gradient_fn=None) -> list[CheckResult]:
    if level not in ("fast", "full"):
        raise ValueError(f"level must be 'fast' or 'full', got {level!r}")
    checks = [lambda: gradient_check(gradient_fn=gradient_fn), affine_hessian_check,
              poisson_linearity_check]
    if level == "full":
        checks += [lambda: gradient_check(h=0.2, draws=5, seed=3, gradient_fn=gradient_fn),
                   poisson_order_check, hessian_trend_check]
    results = []
    for check in checks:
        t0 = time.perf_counter()
        res = check()
        results.append(CheckResult(res.name, res.passed, res.measured, res.required,
                                   time.perf_counter() - t0))
    return results
