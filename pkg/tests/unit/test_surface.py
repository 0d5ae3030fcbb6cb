"""Unit tests for meshes and discrete operators."""

import numpy as np
import pytest

from phasefield.exceptions import (
    DegenerateGeometry,
    PhaseFieldInputError,
    UnknownSurfaceKind,
    UnsupportedKindError,
)
from phasefield.mesh.operators import assemble_operators
from phasefield.mesh.surface import SURFACE_KINDS, build_surface, geodesic_reference


@pytest.mark.parametrize("level", [0, 1, 2, 3])
def test_icosphere_counts(level):
    """Test icosphere vertex count 10 * 4^level + 2 and closedness."""
    if level == 0:
        with pytest.raises(PhaseFieldInputError):
            build_surface("sphere", level)
        return
    mesh = build_surface("sphere", level)
    assert mesh.n_vertices == 10 * 4**level + 2
    assert mesh.is_closed
    assert np.allclose(np.linalg.norm(mesh.vertices, axis=1), 1.0)


def test_sphere_area_converges():
    """Test the lumped mass sums to nearly 4 pi on a fine sphere."""
    ops = assemble_operators(build_surface("sphere", 4))
    assert ops.total_area == pytest.approx(4.0 * np.pi, rel=5e-3)
    assert ops.mass.sum() == pytest.approx(ops.total_area)


@pytest.mark.parametrize(
    "kind,resolution,params",
    [
        ("ellipsoid", 2, {}),
        ("torus_of_revolution", 4, {"R": 1.0, "r": 0.3}),
        ("flat_torus", 8, {"side": 2.0}),
        ("planar_box", 8, {"half_width": 1.5}),
    ],
)
def test_stiffness_kernel_and_symmetry(kind, resolution, params):
    """Test K is symmetric, annihilates constants and has positive mass."""
    mesh = build_surface(kind, resolution, params)
    ops = assemble_operators(mesh)
    K = ops.stiffness
    assert abs(K - K.T).max() < 1e-12
    assert np.max(np.abs(K @ np.ones(ops.n))) < 1e-10
    assert np.all(ops.mass > 0)


def test_flat_torus_area_and_periods(flat_torus):
    """Test the flat torus has area side^2 and no boundary."""
    mesh, ops = flat_torus
    assert mesh.is_closed
    assert ops.total_area == pytest.approx(1.0, rel=1e-12)
    assert mesh.periods == (1.0, 1.0)


def test_flat_torus_dirichlet_energy_of_cosine(flat_torus):
    """Test u^T K u against the exact Dirichlet energy of cos(2 pi x)."""
    mesh, ops = flat_torus
    u = np.cos(2.0 * np.pi * mesh.vertices[:, 0])
    exact = 0.5 * (2.0 * np.pi) ** 2
    assert u @ (ops.stiffness @ u) == pytest.approx(exact, rel=2e-2)


def test_planar_box_boundary(unit_box):
    """Test the box boundary ring has 4n vertices."""
    mesh, _ = unit_box
    assert mesh.boundary_vertices.size == 4 * 64
    assert not mesh.is_closed


def test_planar_box_symmetric_under_swap():
    """Test the edges of an even box map onto themselves under (x, y) -> (y, x)."""
    mesh = build_surface("planar_box", 6, {"half_width": 1.0})
    ends = np.round(mesh.vertices[mesh.edges], 12)

    def edge_set(e):
        return {frozenset(map(tuple, pair)) for pair in e}

    assert edge_set(ends[:, :, ::-1]) == edge_set(ends)


def test_mesh_id_is_deterministic():
    """Test equal recipes give equal ids and different recipes differ."""
    a = build_surface("sphere", 2)
    b = build_surface("sphere", 2)
    c = build_surface("sphere", 2, {"radius": 2.0})
    assert a.mesh_id == b.mesh_id
    assert a.mesh_id != c.mesh_id


def test_unknown_kind():
    """Test an unknown kind raises UnknownSurfaceKind."""
    with pytest.raises(UnknownSurfaceKind):
        build_surface("klein_bottle", 2)
    assert "klein_bottle" not in SURFACE_KINDS


def test_degenerate_torus():
    """Test a tube radius at least the ring radius is rejected."""
    with pytest.raises(DegenerateGeometry):
        build_surface("torus_of_revolution", 4, {"R": 1.0, "r": 1.0})


def test_non_positive_radius():
    """Test a non-positive sphere radius is rejected."""
    with pytest.raises(DegenerateGeometry):
        build_surface("sphere", 2, {"radius": 0.0})


def test_geodesic_reference_sphere():
    """Test the coordinate great circles have length 2 pi r."""
    mesh = build_surface("sphere", 2, {"radius": 2.0})
    refs = geodesic_reference(mesh)
    assert [r.label for r in refs] == ["meridian_yz", "meridian_xz", "equator"]
    for ref in refs:
        assert ref.length == pytest.approx(4.0 * np.pi)
        assert np.allclose(np.linalg.norm(ref.points, axis=1), 2.0)
        assert np.allclose(ref.points @ ref.normal, 0.0)


def test_geodesic_reference_flat_torus(flat_torus):
    """Test the flat torus references are the two side-length loops."""
    mesh, _ = flat_torus
    refs = geodesic_reference(mesh)
    assert {r.label for r in refs} == {"horizontal", "vertical"}
    assert all(r.length == pytest.approx(1.0) for r in refs)


def test_geodesic_reference_unsupported():
    """Test ellipsoids have no analytic reference."""
    with pytest.raises(UnsupportedKindError):
        geodesic_reference(build_surface("ellipsoid", 2))


def test_obj_export(unit_box):
    """Test OBJ text carries every vertex and face."""
    mesh, _ = unit_box
    lines = mesh.to_obj().splitlines()
    assert sum(line.startswith("v ") for line in lines) == mesh.n_vertices
    assert sum(line.startswith("f ") for line in lines) == mesh.n_triangles


def test_submesh_keeps_parent_id(unit_box):
    """Test a submesh records its parent and keeps only selected vertices."""
    mesh, _ = unit_box
    mask = np.max(np.abs(mesh.vertices), axis=1) <= 0.25 + 1e-12
    sub, used = mesh.submesh(mask)
    assert sub.params["parent"] == mesh.mesh_id
    assert np.all(mask[used])
