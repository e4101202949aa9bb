"""Text exports of nodal fields for external plotting, and their readers.

``csv-points``: one line ``x y value`` per vertex, in vertex order.
``vtk-like-text``: legacy VTK ASCII unstructured grid (points, triangles,
per-vertex scalars), readable by ParaView/VisIt.

Floats are written with ``repr`` so that a read-back is bit-identical.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

FORMATS = ("csv-points", "vtk-like-text")
EXTENSIONS = {"csv-points": ".csv", "vtk-like-text": ".vtk"}


def _check(mesh, field):
    field = np.asarray(field, dtype=float)
    if field.shape != (mesh.n_vertices,):
        raise ValueError(f"field must have one value per vertex ({mesh.n_vertices}), got {field.shape}")
    return field


def format_field(mesh, field, fmt: str = "csv-points", name: str = "u") -> str:
    field = _check(mesh, field)
    if fmt == "csv-points":
        return "".join(f"{x!r} {y!r} {v!r}\n"
                       for (x, y), v in zip(mesh.vertices.tolist(), field.tolist()))
    if fmt == "vtk-like-text":
        n, m = mesh.n_vertices, mesh.n_triangles
        out = ["# vtk DataFile Version 3.0", name, "ASCII", "DATASET UNSTRUCTURED_GRID",
               f"POINTS {n} double"]
        out += [f"{x!r} {y!r} 0.0" for x, y in mesh.vertices.tolist()]
        out.append(f"CELLS {m} {4 * m}")
        out += [f"3 {i} {j} {k}" for i, j, k in mesh.triangles.tolist()]
        out.append(f"CELL_TYPES {m}")
        out += ["5"] * m
        out += [f"POINT_DATA {n}", f"SCALARS {name} double 1", "LOOKUP_TABLE default"]
        out += [repr(v) for v in field.tolist()]
        return "\n".join(out) + "\n"
    raise ValueError(f"unknown export format {fmt!r}; expected one of {', '.join(FORMATS)}")


def export_field(mesh, field, fmt: str, path, name: str = "u") -> Path:
    """Write ``field`` to ``path``; raises ``OSError`` if the path is not writable."""
    path = Path(path)
    text = format_field(mesh, field, fmt, name)
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(text)
    return path


def parse_field(text: str, fmt: str = "csv-points"):
    """Inverse of :func:`format_field`: returns ``(points, values)``."""
    if fmt == "csv-points":
        rows = [line.split() for line in text.splitlines() if line.strip()]
        if any(len(r) != 3 for r in rows):
            raise ValueError("csv-points lines must have exactly 3 columns")
        data = np.array([[float(c) for c in r] for r in rows]).reshape(-1, 3)
        return data[:, :2], data[:, 2]
    if fmt == "vtk-like-text":
        lines = text.splitlines()
        head = next(i for i, l in enumerate(lines) if l.startswith("POINTS"))
        n = int(lines[head].split()[1])
        points = np.array([[float(c) for c in l.split()[:2]] for l in lines[head + 1:head + 1 + n]])
        start = next(i for i, l in enumerate(lines) if l.startswith("LOOKUP_TABLE")) + 1
        values = np.array([float(l) for l in lines[start:start + n]])
        return points.reshape(-1, 2), values
    raise ValueError(f"unknown export format {fmt!r}")


def read_field(path, fmt: str | None = None):
    path = Path(path)
    if fmt is None:
        fmt = "vtk-like-text" if path.suffix == ".vtk" else "csv-points"
    return parse_field(path.read_text(encoding="ascii"), fmt)
