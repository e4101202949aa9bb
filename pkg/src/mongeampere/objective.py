"""Discrete least-squares functional and its exact gradient.

For an interior source shift ``g``::

    u   = Poisson solution for the source 2 sqrt(f) + g   (g = 0 on the boundary)
    r_k = det(D_h^2 u)(P_k) - f(P_k)                     (interior vertices)
    J   = 1/6 sum_k A_k r_k^2

The gradient is taken with respect to the interior nodal values of ``g`` in
the plain Euclidean coefficient space, by reverse differentiation through
the frozen discretization (one extra Poisson solve).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hessian import DiscreteHessian, discrete_determinant, discrete_hessian


@dataclass(frozen=True)
class ObjectiveState:
    g: np.ndarray
    u: np.ndarray
    hessian: DiscreteHessian
    residual: np.ndarray
    J: float


def least_squares_value(vertex_areas, residual) -> float:
    """``1/6 sum A_k r_k^2``, the vertex-rule value of ``1/2 integral r^2``."""
    residual = np.asarray(residual, dtype=float)
    return float(np.dot(np.asarray(vertex_areas) * residual, residual) / 6.0)


def _check_inputs(ctx, f, g):
    mesh = ctx.mesh
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    if f.shape != (mesh.n_vertices,):
        raise ValueError(f"f must be a full nodal field of length {mesh.n_vertices}")
    if g.shape != (mesh.n_interior,):
        raise ValueError(f"g must be an interior nodal field of length {mesh.n_interior}")
    if not (f > 0).all():
        k = int(np.flatnonzero(~(f > 0))[0])
        raise ValueError(f"f must be positive at every vertex (f = {f[k]!r} at vertex {k})")
    if not np.isfinite(g).all():
        raise ValueError("g has non-finite entries")
    return f, g


def evaluate(ctx, f, g) -> ObjectiveState:
    """Solve for ``u^g`` and evaluate ``J_h(g)``.

    Parameters
    ----------
    ctx : FemContext
    f : ndarray, shape (N_h,)
        Positive right-hand side at all vertices.
    g : ndarray, shape (N_0h,)
        Source shift at interior vertices.
    """
    f, g = _check_inputs(ctx, f, g)
    mesh = ctx.mesh
    u = ctx.solve(2.0 * np.sqrt(f) + mesh.extend(g))
    hess = discrete_hessian(mesh, ctx.k11, ctx.k22, ctx.k12, u)
    residual = discrete_determinant(hess) - f[mesh.interior]
    J = least_squares_value(mesh.vertex_areas[mesh.interior], residual)
    return ObjectiveState(g=g, u=u, hessian=hess, residual=residual, J=J)


def gradient_from_state(ctx, state: ObjectiveState) -> np.ndarray:
    """Euclidean gradient of ``J_h`` at an already evaluated state."""
    mesh = ctx.mesh
    d11, d22, d12 = state.hessian
    r = state.residual
    # dJ = -q . du_int with q below; du_int = -K^{-1} diag(w) dg
    q = (ctx.k11.T @ (r * d22) + ctx.k22.T @ (r * d11) - 2.0 * (ctx.k12.T @ (r * d12)))
    adjoint = ctx.solve_interior(q[mesh.interior])
    return ctx.weights * adjoint


def gradient(ctx, f, g) -> np.ndarray:
    return gradient_from_state(ctx, evaluate(ctx, f, g))


def fd_gradient(ctx, f, g, eps: float = 1e-6) -> np.ndarray:
    """Central finite differences of ``J_h``, one component at a time.

    Costs ``2 N_0h`` objective evaluations; meant for coarse meshes.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    f, g = _check_inputs(ctx, f, g)
    out = np.empty_like(g)
    for k in range(len(g)):
        gp = g.copy()
        gp[k] += eps
        gm = g.copy()
        gm[k] -= eps
        out[k] = (evaluate(ctx, f, gp).J - evaluate(ctx, f, gm).J) / (2.0 * eps)
    return out


class LeastSquaresObjective:
    """``J_h`` bound to one FEM context and right-hand side.

    This is the object :func:`mongeampere.optimizer.minimize` works on.
    ``metric_weights`` are the lumped-mass weights ``A_k / 3`` defining the
    discrete L2 inner product of source shifts.
    """

    def __init__(self, ctx, f):
        self.ctx = ctx
        self.f = np.asarray(f, dtype=float)
        self.metric_weights = ctx.weights

    @property
    def size(self) -> int:
        return self.ctx.mesh.n_interior

    def evaluate(self, g) -> ObjectiveState:
        return evaluate(self.ctx, self.f, g)

    def gradient(self, state: ObjectiveState) -> np.ndarray:
        return gradient_from_state(self.ctx, state)
