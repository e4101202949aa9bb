"""Conforming triangle meshes: the unit-disk generator, a text loader and
the per-vertex patch areas used by the vertex quadrature."""

from __future__ import annotations

import logging
import math
import warnings

import numpy as np

logger = logging.getLogger(__name__)

MESH_HEADER = "ma-mesh 1"

# Longest edge of the hexagonal ring layout, in units of the ring spacing.
# The supremum sqrt(1 + (pi/3)^2) is approached by the outer rings.
_HEX_EDGE_RATIO = math.sqrt(1.0 + (math.pi / 3.0) ** 2)


class MeshFormatError(ValueError):
    """Raised when mesh-file text cannot be parsed."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class MeshValidationError(ValueError):
    """Raised when a mesh violates one of the conformity invariants."""

    def __init__(self, invariant, message):
        self.invariant = invariant
        super().__init__(f"{invariant}: {message}")


def _signed_areas(vertices, triangles):
    p = vertices[triangles]
    a = p[:, 1] - p[:, 0]
    b = p[:, 2] - p[:, 0]
    return 0.5 * (a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0])


def _edges(triangles):
    e = np.concatenate([triangles[:, [0, 1]], triangles[:, [1, 2]], triangles[:, [2, 0]]])
    return np.sort(e, axis=1)


def vertex_areas(mesh) -> np.ndarray:
    """Area A_k of the union of triangles sharing each vertex.

    Every triangle contributes its full area to each of its three vertices,
    so ``vertex_areas(mesh).sum() == 3 * mesh.area`` up to roundoff.
    """
    contrib = np.repeat(mesh.triangle_areas, 3)
    return np.bincount(mesh.triangles.ravel(), weights=contrib, minlength=mesh.n_vertices)


class Mesh:
    """Immutable conforming triangulation of a polygonal domain.

    Parameters
    ----------
    vertices : array_like, shape (N, 2)
        Vertex coordinates, stored in the given order.
    triangles : array_like of int, shape (M, 3)
        Vertex indices of each triangle, counterclockwise.
    h : float, optional
        Characteristic mesh size. Defaults to the longest edge length.
    repair_orientation : bool
        Swap two indices of every clockwise triangle (with a warning)
        instead of rejecting the mesh.

    Notes
    -----
    Boundary flags are always derived from the edge topology: a vertex is on
    the boundary iff it touches an edge that belongs to a single triangle.
    Interior vertices are numbered 0..N_0h-1 in vertex order.
    """

    def __init__(self, vertices, triangles, h=None, repair_orientation=False):
        vertices = np.array(vertices, dtype=float)
        triangles = np.array(triangles, dtype=np.int64)
        if vertices.ndim != 2 or vertices.shape[1] != 2:
            raise MeshValidationError("shape", "vertices must have shape (N, 2)")
        if triangles.ndim != 2 or triangles.shape[1] != 3:
            raise MeshValidationError("shape", "triangles must have shape (M, 3)")
        if len(triangles) == 0:
            raise MeshValidationError("shape", "mesh has no triangles")
        if triangles.min() < 0 or triangles.max() >= len(vertices):
            bad = int(np.flatnonzero((triangles < 0).any(1) | (triangles >= len(vertices)).any(1))[0])
            raise MeshValidationError("index-bounds", f"triangle {bad} references a missing vertex")

        signed = _signed_areas(vertices, triangles)
        flipped = signed < 0
        if flipped.any():
            first = int(np.flatnonzero(flipped)[0])
            if not repair_orientation:
                raise MeshValidationError(
                    "orientation", f"triangle {first} is clockwise ({flipped.sum()} in total)")
            warnings.warn(
                f"repaired orientation of {int(flipped.sum())} clockwise triangle(s), first is {first}",
                stacklevel=2)
            triangles[flipped] = triangles[flipped][:, [0, 2, 1]]
            signed = np.abs(signed)
        degenerate = np.flatnonzero(signed <= 0)
        if len(degenerate):
            raise MeshValidationError(
                "positive-area", f"triangle {int(degenerate[0])} has zero area")

        edges, counts = np.unique(_edges(triangles), axis=0, return_counts=True)
        if counts.max() > 2:
            e = edges[np.argmax(counts)]
            raise MeshValidationError(
                "edge-manifold", f"edge ({e[0]}, {e[1]}) is shared by {counts.max()} triangles")
        used = np.zeros(len(vertices), dtype=bool)
        used[triangles.ravel()] = True
        if not used.all():
            raise MeshValidationError(
                "unused-vertex", f"vertex {int(np.flatnonzero(~used)[0])} belongs to no triangle")

        boundary = np.zeros(len(vertices), dtype=bool)
        boundary[edges[counts == 1].ravel()] = True

        self.vertices = vertices
        self.triangles = triangles
        self.boundary_flags = boundary
        self.triangle_areas = signed
        self.edges = edges
        self.interior = np.flatnonzero(~boundary)
        index_map = np.full(len(vertices), -1, dtype=np.int64)
        index_map[self.interior] = np.arange(len(self.interior))
        self.interior_index_map = index_map
        self.vertex_areas = vertex_areas(self)
        self.h = float(self.edge_lengths().max()) if h is None else float(h)
        for arr in (self.vertices, self.triangles, self.boundary_flags, self.triangle_areas,
                    self.edges, self.interior, self.interior_index_map, self.vertex_areas):
            arr.setflags(write=False)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_interior(self) -> int:
        return len(self.interior)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    @property
    def area(self) -> float:
        return float(self.triangle_areas.sum())

    def edge_lengths(self) -> np.ndarray:
        d = self.vertices[self.edges[:, 0]] - self.vertices[self.edges[:, 1]]
        return np.hypot(d[:, 0], d[:, 1])

    def min_angle(self) -> float:
        """Smallest interior angle over all triangles, in degrees."""
        p = self.vertices[self.triangles]
        angles = []
        for i in range(3):
            a = p[:, (i + 1) % 3] - p[:, i]
            b = p[:, (i + 2) % 3] - p[:, i]
            cos = (a * b).sum(1) / (np.linalg.norm(a, axis=1) * np.linalg.norm(b, axis=1))
            angles.append(np.degrees(np.arccos(np.clip(cos, -1.0, 1.0))))
        return float(np.min(angles))

    def extend(self, interior_values) -> np.ndarray:
        """Full nodal field equal to ``interior_values`` inside and 0 on the boundary."""
        interior_values = np.asarray(interior_values, dtype=float)
        if interior_values.shape != (self.n_interior,):
            raise ValueError(
                f"interior field has length {interior_values.shape}, expected {self.n_interior}")
        full = np.zeros(self.n_vertices)
        full[self.interior] = interior_values
        return full

    def restrict(self, values) -> np.ndarray:
        values = np.asarray(values, dtype=float)
        if values.shape != (self.n_vertices,):
            raise ValueError(f"full field has length {values.shape}, expected {self.n_vertices}")
        return values[self.interior]

    def __repr__(self):
        return (f"Mesh(n_vertices={self.n_vertices}, n_interior={self.n_interior}, "
                f"n_triangles={self.n_triangles}, h={self.h:.4g})")


def generate_disk_mesh(h: float) -> Mesh:
    """Deterministic triangulation of the unit disk from concentric rings.

    Ring ``i`` (``i = 1..n``) has radius ``i/n`` and ``6 i`` equally spaced
    nodes; neighboring rings are joined sector by sector so that the mesh is
    a smooth image of the hexagonal lattice away from the six sector rays.
    ``n`` is the smallest ring count for which every edge is at most ``h``.
    The outer ring lies exactly on the unit circle.
    """
    if not 0.0 < h < 1.0:
        raise ValueError(f"mesh size h must lie in (0, 1), got {h!r}")
    n = max(1, math.ceil(_HEX_EDGE_RATIO / h - 1e-12))

    coords = [np.zeros((1, 2))]
    start = [0, 1]
    for i in range(1, n + 1):
        theta = 2.0 * np.pi * np.arange(6 * i) / (6 * i)
        radius = 1.0 if i == n else i / n
        coords.append(radius * np.column_stack([np.cos(theta), np.sin(theta)]))
        start.append(start[-1] + 6 * i)
    vertices = np.vstack(coords)

    tris = [(0, 1 + j, 1 + (j + 1) % 6) for j in range(6)]
    for i in range(1, n):
        inner, outer = start[i], start[i + 1]
        m_in, m_out = 6 * i, 6 * (i + 1)
        for s in range(6):
            for k in range(i + 1):
                a = inner + (s * i + k) % m_in
                b0 = outer + (s * (i + 1) + k) % m_out
                b1 = outer + (s * (i + 1) + k + 1) % m_out
                tris.append((a, b0, b1))
                if k < i:
                    tris.append((a, b1, inner + (s * i + k + 1) % m_in))

    mesh = Mesh(vertices, np.array(tris), h=h)
    outer_ring = np.arange(start[n], start[n + 1])
    if not (mesh.boundary_flags[outer_ring].all() and mesh.boundary_flags.sum() == len(outer_ring)):
        raise MeshValidationError("boundary-flags", "boundary is not exactly the outer ring")
    return mesh


def generate_square_mesh(n: int, length: float = 1.0) -> Mesh:
    """Structured mesh of ``[0, length]^2``: ``n x n`` cells, two triangles each,
    all diagonals running from lower-left to upper-right."""
    if n < 2:
        raise ValueError("need at least 2 cells per side for an interior vertex")
    x = np.linspace(0.0, length, n + 1)
    X, Y = np.meshgrid(x, x, indexing="xy")
    vertices = np.column_stack([X.ravel(), Y.ravel()])
    idx = np.arange((n + 1) ** 2).reshape(n + 1, n + 1)
    a, b = idx[:-1, :-1].ravel(), idx[:-1, 1:].ravel()
    c, d = idx[1:, 1:].ravel(), idx[1:, :-1].ravel()
    tris = np.concatenate([np.column_stack([a, b, c]), np.column_stack([a, c, d])])
    return Mesh(vertices, tris, h=length / n)


def _content_lines(text):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line


def load_mesh(text: str) -> Mesh:
    """Parse mesh-file text (header ``ma-mesh 1``) into a validated Mesh.

    Clockwise triangles are repaired with a warning; boundary flags are
    recomputed from the topology.
    """
    lines = list(_content_lines(text))
    pos = 0

    def take(what):
        nonlocal pos
        if pos >= len(lines):
            raise MeshFormatError(f"unexpected end of file, expected {what}")
        item = lines[pos]
        pos += 1
        return item

    def section(name):
        lineno, line = take(f"'{name} <count>'")
        parts = line.split()
        if len(parts) != 2 or parts[0] != name:
            raise MeshFormatError(f"expected '{name} <count>', got {line!r}", lineno)
        try:
            count = int(parts[1])
        except ValueError:
            raise MeshFormatError(f"bad {name} count {parts[1]!r}", lineno) from None
        if count < 0:
            raise MeshFormatError(f"negative {name} count", lineno)
        return count

    lineno, line = take("header")
    if line.split() != MESH_HEADER.split():
        raise MeshFormatError(f"expected header {MESH_HEADER!r}, got {line!r}", lineno)

    nv = section("vertices")
    vertices = np.empty((nv, 2))
    for row in range(nv):
        lineno, line = take(f"vertex row {row}")
        parts = line.split()
        try:
            if len(parts) != 2:
                raise ValueError
            vertices[row] = [float(parts[0]), float(parts[1])]
        except ValueError:
            raise MeshFormatError(f"vertex row {row}: expected 'x y', got {line!r}", lineno) from None
        if not np.isfinite(vertices[row]).all():
            raise MeshFormatError(f"vertex row {row} is not finite", lineno)

    nt = section("triangles")
    triangles = np.empty((nt, 3), dtype=np.int64)
    for row in range(nt):
        lineno, line = take(f"triangle row {row}")
        parts = line.split()
        try:
            if len(parts) != 3:
                raise ValueError
            tri = [int(p) for p in parts]
        except ValueError:
            raise MeshFormatError(f"triangle row {row}: expected 'i j k', got {line!r}", lineno) from None
        if min(tri) < 0 or max(tri) >= nv:
            raise MeshFormatError(
                f"triangle row {row} references vertex outside 0..{nv - 1}", lineno)
        if len(set(tri)) != 3:
            raise MeshFormatError(f"triangle row {row} repeats a vertex", lineno)
        triangles[row] = tri

    if pos != len(lines):
        raise MeshFormatError("trailing content after triangles", lines[pos][0])

    mesh = Mesh(vertices, triangles, repair_orientation=True)
    logger.info("loaded %r, min angle %.2f deg", mesh, mesh.min_angle())
    return mesh


def dump_mesh(mesh: Mesh) -> str:
    """Serialize a mesh in the format read by :func:`load_mesh`."""
    out = [MESH_HEADER, f"vertices {mesh.n_vertices}"]
    out += [f"{x!r} {y!r}" for x, y in mesh.vertices.tolist()]
    out.append(f"triangles {mesh.n_triangles}")
    out += [f"{i} {j} {k}" for i, j, k in mesh.triangles.tolist()]
    return "\n".join(out) + "\n"
