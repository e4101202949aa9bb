import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mongeampere.mesh import (Mesh, MeshFormatError, MeshValidationError, dump_mesh,
                              generate_disk_mesh, generate_square_mesh, load_mesh, vertex_areas)

from conftest import disk, hex_patch

RIGHT_TRIANGLE = """ma-mesh 1
vertices 3
0 0
1 0
0 1
triangles 1
0 1 2
"""


def test_coarsest_disk_has_center_and_rings():
    mesh = generate_disk_mesh(0.5)
    r = np.hypot(*mesh.vertices.T)
    assert r[0] == 0.0 and not mesh.boundary_flags[0]
    radii = np.unique(np.round(r, 12))
    # center plus concentric rings, outermost at radius 1 carrying the boundary
    assert radii[0] == 0.0 and radii[-1] == 1.0 and len(radii) >= 3
    np.testing.assert_array_equal(mesh.boundary_flags, np.isclose(r, 1.0))


def test_disk_area_close_to_pi():
    mesh = disk(1 / 32)
    assert 1e3 <= mesh.n_vertices <= 1e4
    assert abs(mesh.area - math.pi) / math.pi < 0.02


def test_vertex_count_quadruples_under_halving():
    ratio = disk(1 / 64).n_vertices / disk(1 / 32).n_vertices
    assert 3.2 <= ratio <= 4.8


@pytest.mark.parametrize("h", [0.5, 0.3, 1 / 8, 1 / 32])
def test_disk_mesh_invariants(h):
    mesh = disk(h)
    assert mesh.edge_lengths().max() <= h * (1 + 1e-12)
    assert (mesh.triangle_areas > 0).all()
    assert 0 < mesh.n_interior < mesh.n_vertices
    assert np.isclose(mesh.vertex_areas.sum(), 3 * mesh.area, rtol=1e-12)
    on_circle = np.isclose(np.hypot(*mesh.vertices.T), 1.0, atol=1e-12)
    np.testing.assert_array_equal(mesh.boundary_flags, on_circle)
    np.testing.assert_array_equal(mesh.interior_index_map[mesh.interior], np.arange(mesh.n_interior))
    assert (mesh.interior_index_map[mesh.boundary_flags] == -1).all()


def test_disk_mesh_is_deterministic():
    a, b = generate_disk_mesh(0.1), generate_disk_mesh(0.1)
    np.testing.assert_array_equal(a.vertices, b.vertices)
    np.testing.assert_array_equal(a.triangles, b.triangles)


@pytest.mark.parametrize("h", [0.0, 1.0, -0.1, 2.0])
def test_disk_mesh_rejects_bad_h(h):
    with pytest.raises(ValueError, match="h"):
        generate_disk_mesh(h)


def test_mesh_arrays_are_read_only():
    mesh = disk(0.3)
    with pytest.raises(ValueError):
        mesh.vertices[0, 0] = 1.0


def test_single_right_triangle_file():
    mesh = load_mesh(RIGHT_TRIANGLE)
    assert mesh.n_vertices == 3 and mesh.n_interior == 0
    np.testing.assert_allclose(mesh.vertex_areas, [0.5, 0.5, 0.5])
    assert mesh.boundary_flags.all()


def test_equilateral_patch_area():
    side = 0.7
    mesh = hex_patch(side)
    assert mesh.n_interior == 1
    assert np.isclose(mesh.vertex_areas[0], 6 * math.sqrt(3) / 4 * side ** 2, rtol=1e-14)


def test_clockwise_triangle_is_repaired_with_warning():
    text = RIGHT_TRIANGLE.replace("0 1 2", "0 2 1")
    with pytest.warns(UserWarning, match="clockwise"):
        mesh = load_mesh(text)
    assert mesh.triangle_areas[0] == pytest.approx(0.5)
    assert set(mesh.triangles[0]) == {0, 1, 2}


def test_clockwise_triangle_rejected_without_repair():
    with pytest.raises(MeshValidationError, match="orientation"):
        Mesh([[0, 0], [1, 0], [0, 1]], [[0, 2, 1]])


def test_out_of_range_index_names_triangle_row():
    text = RIGHT_TRIANGLE.replace("0 1 2", "0 1 3")
    with pytest.raises(MeshFormatError, match="triangle row 0") as info:
        load_mesh(text)
    assert info.value.line == 7


@pytest.mark.parametrize("text, line", [
    ("ma-mesh 2\n", 1),
    ("ma-mesh 1\nvertices x\n", 2),
    ("ma-mesh 1\nvertices 1\n0 zero\n", 3),
    ("ma-mesh 1\nvertices 3\n0 0\n1 0\n0 1\ntriangles 1\n0 1\n", 7),
])
def test_parse_errors_carry_line_numbers(text, line):
    with pytest.raises(MeshFormatError) as info:
        load_mesh(text)
    assert info.value.line == line


def test_comments_and_blank_lines_are_skipped():
    text = "# a comment\n\n" + RIGHT_TRIANGLE.replace("vertices 3\n", "vertices 3  # count\n")
    assert load_mesh(text).n_vertices == 3


def test_degenerate_triangle_rejected():
    with pytest.raises(MeshValidationError, match="positive-area"):
        Mesh([[0, 0], [1, 0], [2, 0]], [[0, 1, 2]])


def test_nonmanifold_edge_rejected():
    verts = [[0, 0], [1, 0], [0.5, 1], [0.5, -1], [0.5, 2]]
    with pytest.raises(MeshValidationError, match="edge-manifold"):
        Mesh(verts, [[0, 1, 2], [0, 3, 1], [0, 1, 4]])


def test_unused_vertex_rejected():
    with pytest.raises(MeshValidationError, match="unused-vertex"):
        Mesh([[0, 0], [1, 0], [0, 1], [5, 5]], [[0, 1, 2]])


def test_dump_load_round_trip():
    mesh = disk(0.25)
    again = load_mesh(dump_mesh(mesh))
    np.testing.assert_array_equal(again.vertices, mesh.vertices)
    np.testing.assert_array_equal(again.triangles, mesh.triangles)
    np.testing.assert_array_equal(again.boundary_flags, mesh.boundary_flags)


def test_extend_and_restrict():
    mesh = disk(0.3)
    vals = np.arange(mesh.n_interior, dtype=float)
    full = mesh.extend(vals)
    assert (full[mesh.boundary_flags] == 0).all()
    np.testing.assert_array_equal(mesh.restrict(full), vals)
    with pytest.raises(ValueError):
        mesh.extend(np.zeros(mesh.n_vertices))


def test_min_angle_of_disk_mesh_is_reasonable():
    assert 30.0 < disk(1 / 16).min_angle() <= 60.0


@settings(max_examples=25, deadline=None)
@given(n=st.integers(2, 12), length=st.floats(0.1, 10.0))
def test_square_mesh_area_identity(n, length):
    mesh = generate_square_mesh(n, length)
    assert mesh.n_interior == (n - 1) ** 2
    assert np.isclose(mesh.area, length ** 2, rtol=1e-12)
    assert np.isclose(vertex_areas(mesh).sum(), 3 * length ** 2, rtol=1e-12)
