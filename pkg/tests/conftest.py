import functools
import math

import numpy as np
import pytest

from mongeampere.fem import FemContext
from mongeampere.mesh import Mesh, generate_disk_mesh

# Lines collected by test_acceptance.py, echoed in the terminal summary so they
# show up regardless of output capturing.
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


@functools.lru_cache(maxsize=None)
def disk(h):
    return generate_disk_mesh(h)


@functools.lru_cache(maxsize=None)
def disk_context(h):
    return FemContext(disk(h))


def hex_patch(side=1.0):
    """Center vertex surrounded by six equilateral triangles of the given side."""
    angles = np.arange(6) * math.pi / 3
    verts = np.vstack([[0.0, 0.0], side * np.column_stack([np.cos(angles), np.sin(angles)])])
    tris = [[0, 1 + i, 1 + (i + 1) % 6] for i in range(6)]
    return Mesh(verts, tris)


@pytest.fixture
def patch():
    return hex_patch()


@pytest.fixture(scope="session")
def coarse():
    return disk(0.2)


@pytest.fixture(scope="session")
def coarse_ctx():
    return disk_context(0.2)
