"""Unit tests for line configurations and glued entire solutions."""

import math

import numpy as np
import pytest

from phasefield.entire.construction import (
    approximate_solution,
    directional_jacobi_field,
    partition_of_unity,
    refine_entire,
    smooth_step,
    symmetry_defect,
)
from phasefield.entire.lines import (
    half_line_starts,
    make_line_config,
    minimal_radius,
    separation,
)
from phasefield.exceptions import (
    PhaseFieldInputError,
    SeparationError,
    UnsupportedKindError,
)
from phasefield.mesh.operators import assemble_operators
from phasefield.mesh.surface import build_surface
from phasefield.model.heteroclinic import eval_profile
from phasefield.solver.energy import PhaseField
from tests.conftest import AXIS_ANGLES, DIAGONAL_ANGLES


@pytest.fixture(scope="module")
def box8():
    mesh = build_surface("planar_box", 32, {"half_width": 8.0})
    return mesh, assemble_operators(mesh)


@pytest.mark.parametrize(
    "angles,offsets",
    [
        ([0.0], None),
        ([0.0, 1.0, 2.0], None),
        ([1.0, 0.5], None),
        ([0.0, 2.0 * math.pi], None),
        ([0.0, math.pi], [0.0]),
    ],
)
def test_line_config_validation(angles, offsets):
    """Test odd counts, unordered angles, a full period and short offsets are rejected."""
    with pytest.raises(PhaseFieldInputError):
        make_line_config(angles, offsets)


def test_axis_config_properties():
    """Test k, theta_lambda and balance of the four axis lines."""
    cfg = make_line_config(AXIS_ANGLES)
    assert cfg.k == 2
    assert cfg.theta_lambda == pytest.approx(math.pi / 4)
    assert cfg.balanced


def test_unbalanced_config():
    """Test ends that do not sum to zero are reported as unbalanced."""
    assert not make_line_config([0.0, 1.0, 2.0, 3.0]).balanced


def test_minimal_radius_axis():
    """Test perpendicular neighbours need R sqrt 2 >= 4."""
    cfg = make_line_config(AXIS_ANGLES)
    assert minimal_radius(cfg) == pytest.approx(2.0 * math.sqrt(2.0), rel=1e-6)
    assert separation(cfg, 3.0)[0] == pytest.approx(3.0 * math.sqrt(2.0))


def test_minimal_radius_is_admissible():
    """Test the returned radius meets the separation and a slightly smaller one does not."""
    cfg = make_line_config(AXIS_ANGLES, offsets=[0.5, -0.3, 0.2, 0.0])
    R = minimal_radius(cfg)
    assert separation(cfg, R)[0] >= 4.0
    assert separation(cfg, R * (1.0 - 1e-6))[0] < 4.0


def test_half_line_starts_on_circle():
    """Test half-lines start on the circle of radius R, also with offsets."""
    cfg = make_line_config([0.0, math.pi], [0.5, -0.5])
    starts = half_line_starts(cfg, 3.0)
    assert np.allclose(np.linalg.norm(starts, axis=1), 3.0)
    with pytest.raises(PhaseFieldInputError):
        half_line_starts(cfg, 0.4)


def test_smooth_step():
    """Test the transition is 0 below 0, 1 above 1, 1/2 in the middle and monotone."""
    t = np.linspace(-1.0, 2.0, 301)
    s = smooth_step(t)
    assert np.all(s[t <= 0] == 0.0) and np.all(s[t >= 1] == 1.0)
    assert smooth_step(np.array([0.5]))[0] == pytest.approx(0.5)
    assert np.all(np.diff(s) >= 0)


def test_partition_of_unity():
    """Test the weights are non-negative, sum to one and chi_0 = 1 near the origin."""
    cfg = make_line_config(AXIS_ANGLES)
    R = minimal_radius(cfg)
    points = np.random.default_rng(2).uniform(-10.0, 10.0, (500, 2))
    chi = partition_of_unity(cfg, R, points)
    assert chi.shape == (500, 5)
    assert np.all(chi >= 0.0)
    assert np.allclose(chi.sum(axis=1), 1.0)
    inner = np.linalg.norm(points, axis=1) < R - 1.0
    assert np.allclose(chi[inner, 0], 1.0)


def test_approximate_solution_vanishes_at_origin(box8, profile):
    """Test u_lambda = 0 on the inner ball and |u_lambda| <= 1."""
    mesh, _ = box8
    u = approximate_solution(make_line_config(AXIS_ANGLES), profile, mesh)
    origin = int(np.argmin(np.linalg.norm(mesh.vertices, axis=1)))
    assert u.values[origin] == 0.0
    assert u.epsilon == 1.0
    assert np.max(np.abs(u.values)) <= 1.0


def test_two_ended_solution_is_the_profile_outside(box8, profile):
    """Test the k = 1 glued state equals H(y) outside B_{R+1}."""
    mesh, _ = box8
    cfg = make_line_config([0.0, math.pi])
    R = minimal_radius(cfg)
    assert R == pytest.approx(2.0, rel=1e-6)
    u = approximate_solution(cfg, profile, mesh)
    x, y = mesh.vertices.T
    far = np.abs(x) >= R + 1.0
    assert np.allclose(u.values[far], eval_profile(profile, y[far]), atol=1e-12)


def test_approximate_solution_checks_geometry(box8, profile):
    """Test a small radius, a small box and a curved surface are rejected."""
    mesh, _ = box8
    cfg = make_line_config(AXIS_ANGLES)
    with pytest.raises(SeparationError) as info:
        approximate_solution(cfg, profile, mesh, R=1.0)
    assert info.value.minimal_radius == pytest.approx(2.0 * math.sqrt(2.0), rel=1e-6)
    small = build_surface("planar_box", 8, {"half_width": 6.0})
    with pytest.raises(PhaseFieldInputError):
        approximate_solution(cfg, profile, small)
    with pytest.raises(UnsupportedKindError):
        approximate_solution(cfg, profile, build_surface("sphere", 1))


def test_axis_saddle_symmetries(saddle):
    """Test the refined axis saddle is odd under x -> -x and even under swap."""
    _, mesh, _, refined = saddle
    u = refined.solution
    assert refined.residual <= 1e-8
    assert symmetry_defect(u, mesh, "reflect_x", -1) < 1e-6
    assert symmetry_defect(u, mesh, "reflect_y", -1) < 1e-6
    assert symmetry_defect(u, mesh, "swap", 1) < 1e-6


def test_diagonal_saddle_is_odd_under_swap(box8, profile):
    """Test the diagonal glued state changes sign under (x, y) -> (y, x)."""
    mesh, _ = box8
    u = approximate_solution(make_line_config(DIAGONAL_ANGLES), profile, mesh)
    assert symmetry_defect(u, mesh, "swap", -1) < 1e-10


def test_symmetry_defect_validation(box8):
    """Test unknown maps and non-planar meshes are rejected."""
    mesh, _ = box8
    u = PhaseField(np.zeros(mesh.n_vertices), 1.0, mesh.mesh_id)
    with pytest.raises(PhaseFieldInputError):
        symmetry_defect(u, mesh, "shear")
    sphere = build_surface("sphere", 1)
    with pytest.raises(UnsupportedKindError):
        symmetry_defect(PhaseField(np.zeros(sphere.n_vertices), 1.0, sphere.mesh_id), sphere)


def test_refine_requires_unit_epsilon(box8, quartic):
    """Test entire solutions are refined at eps = 1 only."""
    mesh, ops = box8
    u = PhaseField(np.zeros(mesh.n_vertices), 0.5, mesh.mesh_id)
    with pytest.raises(PhaseFieldInputError):
        refine_entire(u, ops, mesh, quartic)


def test_jacobi_field_of_straight_interface(box8, profile, quartic):
    """Test <grad H(y), e> vanishes along x and approximates H'(y) along y."""
    mesh, ops = box8
    y = mesh.vertices[:, 1]
    u = PhaseField(eval_profile(profile, y), 1.0, mesh.mesh_id)
    along_x = directional_jacobi_field(u, ops, mesh, quartic, (1.0, 0.0))
    assert np.all(along_x.values == 0.0)
    assert along_x.residual == 0.0
    along_y = directional_jacobi_field(u, ops, mesh, quartic, (0.0, 2.0))
    assert np.allclose(along_y.direction, [0.0, 1.0])
    interior = ~mesh.boundary_mask
    assert np.allclose(
        along_y.values[interior], profile.slope(y[interior]), rtol=0.1, atol=1e-2
    )
    with pytest.raises(PhaseFieldInputError):
        directional_jacobi_field(u, ops, mesh, quartic, (0.0, 0.0))
