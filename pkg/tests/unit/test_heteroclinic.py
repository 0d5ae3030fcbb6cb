"""Unit tests for the heteroclinic profile."""

import numpy as np
import pytest

from phasefield.exceptions import HeteroclinicError, PhaseFieldInputError
from phasefield.model.heteroclinic import (
    eval_profile,
    periodic_band_values,
    profile_energy,
    profile_table,
    solve_heteroclinic,
)
from phasefield.model.potential import get_potential, interface_constants


def test_quartic_matches_tanh(profile):
    """Test the quartic profile against tanh(s / sqrt 2) on [-10, 10]."""
    s = np.linspace(-10.0, 10.0, 4001)
    error = np.max(np.abs(eval_profile(profile, s) - np.tanh(s / np.sqrt(2.0))))
    assert error <= 1e-8


def test_equipartition(profile, quartic):
    """Test H' = sqrt(2 W(H)) on the grid."""
    s = np.linspace(-8.0, 8.0, 801)
    residual = profile.slope(s) - np.sqrt(2.0 * quartic.W(eval_profile(profile, s)))
    assert np.max(np.abs(residual)) <= 1e-10


def test_profile_energy_matches_sigma(profile, quartic):
    """Test the integral of H'^2 equals sigma."""
    assert profile_energy(profile) == pytest.approx(interface_constants(quartic).sigma, abs=1e-6)


def test_profile_is_odd_and_monotone(profile):
    """Test H(0) = 0, H odd and increasing."""
    assert eval_profile(profile, 0.0) == 0.0
    s = np.linspace(0.1, 15.0, 200)
    assert np.allclose(eval_profile(profile, -s), -eval_profile(profile, s), atol=1e-12)
    assert np.all(np.diff(eval_profile(profile, np.linspace(-20.0, 20.0, 500))) > 0)


def test_tails_beyond_grid(profile):
    """Test exponential tails stay inside (-1, 1) and decay at rate sqrt(W''(1))."""
    s = np.array([13.0, 14.0])
    gap = 1.0 - eval_profile(profile, s)
    assert np.all(gap > 0.0)
    assert gap[1] / gap[0] == pytest.approx(np.exp(-profile.tail_rate), rel=1e-6)
    assert 1.0 + eval_profile(profile, -13.0) == pytest.approx(gap[0], rel=1e-6)
    assert profile.tail_rate == pytest.approx(np.sqrt(2.0), rel=1e-3)
    # far out the tail rounds onto the well
    assert eval_profile(profile, 30.0) == 1.0
    assert eval_profile(profile, -30.0) == -1.0


def test_inverse(profile):
    """Test inverse recovers s inside the core."""
    s = np.linspace(-5.0, 5.0, 41)
    assert np.allclose(profile.inverse(eval_profile(profile, s)), s, atol=1e-8)


def test_sextic_profile_is_monotone():
    """Test a different well shape still gives a monotone connection."""
    h = solve_heteroclinic(get_potential("sextic"))
    values = eval_profile(h, np.linspace(-10.0, 10.0, 300))
    assert np.all(np.diff(values) > 0)
    assert values[0] < -0.99 and values[-1] > 0.99


def test_interior_zero_rejected():
    """Test a potential with an interior zero has no connection."""
    # t^2 (1 - t^2)^2 vanishes at 0
    p = get_potential("triple", coefficients=[0.0, 0.0, 1.0, 0.0, -2.0, 0.0, 1.0])
    with pytest.raises(HeteroclinicError):
        solve_heteroclinic(p)


def test_grid_arguments_checked(quartic):
    """Test half_width below 5 and step above 0.01 are rejected."""
    with pytest.raises(PhaseFieldInputError):
        solve_heteroclinic(quartic, half_width=4.0)
    with pytest.raises(PhaseFieldInputError):
        solve_heteroclinic(quartic, step=0.02)


def test_profile_table_columns(profile):
    """Test the profile table layout."""
    table = profile_table(profile)
    assert list(table.columns) == ["s", "H", "Hprime"]
    assert len(table) == profile.grid.size


def test_periodic_band_signs(profile):
    """Test the band is positive in the middle half of the period and negative outside."""
    x = np.array([0.0, 0.1, 0.4, 0.6, 0.9])
    values = periodic_band_values(x, 1.0, 0.05, profile)
    assert values[0] > 0.99 and values[1] > 0.5
    assert values[2] < -0.5 and values[3] < -0.5
    assert values[4] > 0.5
