"""Unit tests for the energy functional and Newton refinement."""

import numpy as np
import pytest

from phasefield.exceptions import MeshMismatchError, NewtonConvergenceError, PhaseFieldInputError
from phasefield.model.heteroclinic import eval_profile
from phasefield.model.potential import interface_constants
from phasefield.solver.energy import (
    PhaseField,
    discrepancy_xi,
    energy,
    gradient,
    hessian,
    residual_norm,
)
from phasefield.solver.newton import NewtonOptions, dirichlet_mask, newton_refine


@pytest.fixture
def random_field(sphere):
    mesh, _ = sphere
    rng = np.random.default_rng(7)
    return PhaseField(rng.uniform(-0.9, 0.9, mesh.n_vertices), 0.3, mesh.mesh_id)


def test_constant_wells_have_zero_energy(sphere, quartic):
    """Test u = +-1 has zero energy and zero residual."""
    mesh, ops = sphere
    for sign in (-1.0, 1.0):
        u = PhaseField(np.full(mesh.n_vertices, sign), 0.1, mesh.mesh_id)
        assert energy(u, ops, quartic) == pytest.approx(0.0, abs=1e-14)
        assert residual_norm(u, ops, quartic) == pytest.approx(0.0, abs=1e-12)


def test_zero_state_energy(sphere, quartic):
    """Test u = 0 has energy W(0) |S| / eps."""
    mesh, ops = sphere
    u = PhaseField(np.zeros(mesh.n_vertices), 0.2, mesh.mesh_id)
    assert energy(u, ops, quartic) == pytest.approx(0.25 * ops.total_area / 0.2)


def test_gradient_matches_central_differences(random_field, sphere, quartic):
    """Test the first variation against a directional difference quotient."""
    _, ops = sphere
    v = np.random.default_rng(3).standard_normal(ops.n)
    h = 1e-6
    plus = energy(random_field.with_values(random_field.values + h * v), ops, quartic)
    minus = energy(random_field.with_values(random_field.values - h * v), ops, quartic)
    expected = gradient(random_field, ops, quartic) @ v
    assert (plus - minus) / (2 * h) == pytest.approx(expected, rel=1e-6)


def test_hessian_matches_gradient_differences(random_field, sphere, quartic):
    """Test H v against differences of the gradient."""
    _, ops = sphere
    v = np.random.default_rng(4).standard_normal(ops.n)
    h = 1e-5
    plus = gradient(random_field.with_values(random_field.values + h * v), ops, quartic)
    minus = gradient(random_field.with_values(random_field.values - h * v), ops, quartic)
    H = hessian(random_field, ops, quartic)
    assert np.allclose((plus - minus) / (2 * h), H @ v, rtol=1e-6, atol=1e-8)
    assert abs(H - H.T).max() < 1e-12


def test_consistent_discrepancy_identity(random_field, sphere, quartic):
    """Test int eps |grad u|^2 = E + int xi with the consistent density."""
    _, ops = sphere
    xi = discrepancy_xi(random_field, ops, quartic, recovery="consistent")
    u = random_field.values
    dirichlet = random_field.epsilon * float(u @ (ops.stiffness @ u))
    assert dirichlet == pytest.approx(energy(random_field, ops, quartic) + xi.integral, rel=1e-12)
    assert xi.l1_norm >= abs(xi.integral)


def test_recovered_discrepancy_is_default(random_field, sphere, quartic):
    """Test the default recovery and rejection of unknown recoveries."""
    _, ops = sphere
    assert discrepancy_xi(random_field, ops, quartic).recovery == "recovered"
    with pytest.raises(PhaseFieldInputError):
        discrepancy_xi(random_field, ops, quartic, recovery="nodal")


def test_mesh_mismatch(sphere, quartic):
    """Test a field tagged with another mesh is rejected."""
    mesh, ops = sphere
    u = PhaseField(np.zeros(mesh.n_vertices), 0.1, "not-this-mesh")
    with pytest.raises(MeshMismatchError):
        energy(u, ops, quartic)


def test_field_validation():
    """Test non-positive epsilon and non-finite values are rejected."""
    with pytest.raises(PhaseFieldInputError):
        PhaseField(np.zeros(3), 0.0, "m")
    with pytest.raises(PhaseFieldInputError):
        PhaseField(np.array([0.0, np.nan]), 0.1, "m")


def _box_interface(unit_box, profile, epsilon):
    mesh, ops = unit_box
    values = eval_profile(profile, mesh.vertices[:, 0] / epsilon)
    return PhaseField(values, epsilon, mesh.mesh_id)


def test_newton_straight_interface(unit_box, profile, quartic):
    """Test Newton converges to a straight interface of energy close to sigma."""
    mesh, ops = unit_box
    u0 = _box_interface(unit_box, profile, 0.05)
    result = newton_refine(u0, ops, quartic, fixed=dirichlet_mask(mesh))
    assert result.residual <= 1e-10
    assert result.residuals[0] > result.residual
    assert energy(result.solution, ops, quartic) == pytest.approx(
        interface_constants(quartic).sigma, rel=0.05
    )
    boundary = mesh.boundary_mask
    assert np.array_equal(result.solution.values[boundary], u0.values[boundary])


def test_newton_reports_best_iterate(unit_box, profile, quartic):
    """Test exhausting the iteration budget raises with the best iterate attached."""
    mesh, ops = unit_box
    u0 = _box_interface(unit_box, profile, 0.05)
    with pytest.raises(NewtonConvergenceError) as info:
        newton_refine(u0, ops, quartic, NewtonOptions(max_iters=0), fixed=dirichlet_mask(mesh))
    assert info.value.iterations == 0
    assert np.array_equal(info.value.best_iterate, u0.values)


def test_dirichlet_mask_only_on_boxes(unit_box, sphere):
    """Test only planar boxes freeze their boundary."""
    assert dirichlet_mask(unit_box[0]).sum() == 4 * 64
    assert not dirichlet_mask(sphere[0]).any()
