"""Shared fixtures."""

import math

import pytest

from phasefield.entire.construction import approximate_solution, refine_entire
from phasefield.entire.lines import make_line_config
from phasefield.mesh.operators import assemble_operators
from phasefield.mesh.surface import build_surface
from phasefield.model.heteroclinic import solve_heteroclinic
from phasefield.model.potential import get_potential

AXIS_ANGLES = [0.0, 0.5 * math.pi, math.pi, 1.5 * math.pi]
DIAGONAL_ANGLES = [0.25 * math.pi, 0.75 * math.pi, 1.25 * math.pi, 1.75 * math.pi]


@pytest.fixture(scope="session")
def quartic():
    return get_potential("quartic")


@pytest.fixture(scope="session")
def profile(quartic):
    return solve_heteroclinic(quartic)


@pytest.fixture(scope="session")
def sphere():
    mesh = build_surface("sphere", 3)
    return mesh, assemble_operators(mesh)


@pytest.fixture(scope="session")
def flat_torus():
    mesh = build_surface("flat_torus", 32, {"side": 1.0})
    return mesh, assemble_operators(mesh)


@pytest.fixture(scope="session")
def unit_box():
    """Planar box [-1/2, 1/2]^2."""
    mesh = build_surface("planar_box", 64, {"half_width": 0.5})
    return mesh, assemble_operators(mesh)


@pytest.fixture(scope="session")
def saddle(quartic, profile):
    """Refined four-ended saddle u ~ sign(xy) on [-8, 8]^2 at h = 0.25."""
    lines = make_line_config(AXIS_ANGLES)
    mesh = build_surface("planar_box", 64, {"half_width": 8.0})
    ops = assemble_operators(mesh)
    u0 = approximate_solution(lines, profile, mesh)
    refined = refine_entire(u0, ops, mesh, quartic, tol=1e-8)
    return lines, mesh, ops, refined
