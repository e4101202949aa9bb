"""P1 Galerkin operators on a :class:`~mongeampere.mesh.Mesh` and the
Dirichlet Poisson solve ``Laplace(u) = s, u = 0 on the boundary``.

Weak form with test functions vanishing on the boundary::

    integral grad(u) . grad(v) = - integral s v

The load integral uses the vertex (trapezoidal) rule, so the load of interior
vertex k is ``(A_k / 3) s(P_k)``.
"""

from __future__ import annotations

import numpy as np
from scipy import sparse
from scipy.sparse import linalg as spla


class SolverError(RuntimeError):
    """The Poisson system is singular, indefinite or was not solved accurately."""


def p1_gradients(mesh) -> np.ndarray:
    """Constant gradients of the three hat functions on every triangle.

    Returns an array of shape (M, 3, 2): ``grads[t, a]`` is the gradient of
    the hat function of local vertex ``a`` restricted to triangle ``t``.
    """
    p = mesh.vertices[mesh.triangles]
    # edge opposite to each local vertex, rotated by -90 degrees
    opp = np.stack([p[:, 2] - p[:, 1], p[:, 0] - p[:, 2], p[:, 1] - p[:, 0]], axis=1)
    grads = np.stack([-opp[..., 1], opp[..., 0]], axis=2)
    return grads / (2.0 * mesh.triangle_areas[:, None, None])


def _check_axis(axis):
    if axis not in (1, 2):
        raise ValueError(f"axis must be 1 or 2, got {axis!r}")
    return axis - 1


def _assemble(mesh, local, rows):
    """Scatter (M, 3, 3) element matrices; ``local[t, a, b]`` couples test
    vertex a (row) and trial vertex b (column)."""
    t = mesh.triangles
    r = np.repeat(t, 3, axis=1).ravel()
    c = np.tile(t, (1, 3)).ravel()
    n = mesh.n_vertices
    full = sparse.csr_matrix((local.ravel(), (r, c)), shape=(n, n))
    full.sum_duplicates()
    if rows == "all":
        return full
    if rows == "interior":
        return full[mesh.interior]
    raise ValueError(f"rows must be 'all' or 'interior', got {rows!r}")


def assemble_directional_stiffness(mesh, i: int, j: int, rows: str = "interior") -> sparse.csr_matrix:
    """Matrix of ``integral (dw_l/dx_i)(dw_k/dx_j)``, symmetrized in (i, j).

    Row k is a test vertex (interior vertices by default), column l any
    vertex. For ``i != j`` the entry is
    ``1/2 integral (dw_l/dx_1 dw_k/dx_2 + dw_l/dx_2 dw_k/dx_1)``, so
    ``K12 == K21``.
    """
    a, b = _check_axis(i), _check_axis(j)
    g = p1_gradients(mesh)
    area = mesh.triangle_areas[:, None, None]
    local = 0.5 * area * (g[:, :, None, a] * g[:, None, :, b] + g[:, :, None, b] * g[:, None, :, a])
    return _assemble(mesh, local, rows)


def assemble_stiffness(mesh, full: bool = False) -> sparse.csr_matrix:
    """Stiffness matrix ``integral grad(w_k) . grad(w_l)``.

    Interior x interior block (rows and columns in interior-index order)
    unless ``full`` is set, in which case all vertices are kept.
    """
    g = p1_gradients(mesh)
    local = mesh.triangle_areas[:, None, None] * np.einsum("tad,tbd->tab", g, g)
    k = _assemble(mesh, local, "all")
    if full:
        return k
    if mesh.n_interior == 0:
        raise ValueError("mesh has no interior vertices")
    return k[mesh.interior][:, mesh.interior].tocsr()


def lumped_load(mesh, s) -> np.ndarray:
    """Vertex-rule load ``(A_k / 3) s(P_k)`` at interior vertices.

    ``s`` is a full nodal field. The sign of the weak form is left to the caller.
    """
    s = np.asarray(s, dtype=float)
    if s.shape != (mesh.n_vertices,):
        raise ValueError(f"source must be a full nodal field of length {mesh.n_vertices}, got {s.shape}")
    return mesh.vertex_areas[mesh.interior] / 3.0 * s[mesh.interior]


class FemContext:
    """Operators of one mesh, assembled and factorized once.

    Attributes
    ----------
    stiffness : csr_matrix
        Interior x interior stiffness.
    k11, k22, k12 : csr_matrix
        Directional stiffness, interior rows x all-vertex columns.
    weights : ndarray
        Vertex-rule weights ``A_k / 3`` of the interior vertices.
    pivots : ndarray
        Diagonal pivots of the symmetric factorization; all positive.
    """

    def __init__(self, mesh):
        self.mesh = mesh
        self.stiffness = assemble_stiffness(mesh)
        self.k11 = assemble_directional_stiffness(mesh, 1, 1)
        self.k22 = assemble_directional_stiffness(mesh, 2, 2)
        self.k12 = assemble_directional_stiffness(mesh, 1, 2)
        self.weights = mesh.vertex_areas[mesh.interior] / 3.0
        self.weights.setflags(write=False)
        # No pivoting plus a symmetric ordering makes the LU an LDL^T
        # factorization: the U diagonal holds the Cholesky pivots squared.
        self._lu = spla.splu(
            self.stiffness.tocsc(), permc_spec="MMD_AT_PLUS_A", diag_pivot_thresh=0.0,
            options=dict(SymmetricMode=True))
        if not np.array_equal(self._lu.perm_r, self._lu.perm_c):
            raise SolverError("factorization pivoted off the diagonal")
        self.pivots = self._lu.U.diagonal()
        if not (self.pivots > 0).all():
            raise SolverError(
                f"stiffness is not positive definite (smallest pivot {self.pivots.min():.3e})")

    def solve_interior(self, rhs) -> np.ndarray:
        """Solve ``stiffness @ x = rhs`` with the cached factorization."""
        rhs = np.asarray(rhs, dtype=float)
        x = self._lu.solve(rhs)
        scale = np.linalg.norm(rhs)
        if scale > 0:
            res = np.linalg.norm(self.stiffness @ x - rhs) / scale
            if not res <= 1e-10:
                raise SolverError(f"relative residual {res:.3e} exceeds 1e-10")
        return x

    def solve(self, source) -> np.ndarray:
        """Full nodal solution of ``Laplace(u) = source`` with zero boundary values."""
        u_int = self.solve_interior(-lumped_load(self.mesh, source))
        return self.mesh.extend(u_int)


def solve_poisson(mesh, source, context: FemContext | None = None) -> np.ndarray:
    """One-shot Poisson solve; pass ``context`` to reuse a factorization."""
    if context is None:
        context = FemContext(mesh)
    elif context.mesh is not mesh:
        raise ValueError("context was built for a different mesh")
    return context.solve(source)
