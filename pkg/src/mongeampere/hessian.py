"""Discrete second derivatives of P1 fields at interior vertices.

The weak second derivative tested against hat function ``w_k`` is
integrated with the vertex rule, ``integral D w_k ~ (A_k / 3) D(P_k)``,
which gives

    D_ii(P_k) = -(3 / A_k) (K^{ii} phi)_k
    D_12(P_k) = -(3 / A_k) (K^{12} phi)_k

with ``K^{12}`` already holding the 1/2 symmetrization.

Every row of ``K^{ij}`` sums to zero, so the products are formed as
``sum_l K_kl (phi_l - phi_k)``: constants cancel exactly and the 1/A_k
scaling does not amplify their roundoff.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np


class DiscreteHessian(NamedTuple):
    """Second-derivative fields at interior vertices; ``d12`` doubles as ``d21``."""

    d11: np.ndarray
    d22: np.ndarray
    d12: np.ndarray


def discrete_hessian(mesh, k11, k22, k12, phi) -> DiscreteHessian:
    """Vertex values of the discrete Hessian of the full nodal field ``phi``.

    ``k11``, ``k22`` and ``k12`` are the directional stiffness matrices of
    ``mesh`` (interior rows, all-vertex columns).
    """
    phi = np.asarray(phi, dtype=float)
    if phi.shape != (mesh.n_vertices,):
        raise ValueError(f"phi must be a full nodal field of length {mesh.n_vertices}")
    shape = (mesh.n_interior, mesh.n_vertices)
    for name, k in (("k11", k11), ("k22", k22), ("k12", k12)):
        if k.shape != shape:
            raise ValueError(f"{name} has shape {k.shape}, expected {shape} for this mesh")
    scale = -3.0 / mesh.vertex_areas[mesh.interior]
    return DiscreteHessian(*(scale * _centered_product(mesh, k, phi) for k in (k11, k22, k12)))


def _centered_product(mesh, k, phi):
    """``k @ phi`` evaluated as ``sum_l k_kl (phi_l - phi_k)`` over interior rows k."""
    k = k.tocsr()
    rows = np.repeat(np.arange(k.shape[0]), np.diff(k.indptr))
    diffs = phi[k.indices] - phi[mesh.interior[rows]]
    return np.bincount(rows, weights=k.data * diffs, minlength=k.shape[0])


def discrete_determinant(hess: DiscreteHessian) -> np.ndarray:
    return hess.d11 * hess.d22 - hess.d12 ** 2
