"""Unit tests for double-well potentials."""

import math

import numpy as np
import pytest

from phasefield.exceptions import (
    PhaseFieldInputError,
    PotentialEvaluationError,
    PotentialHypothesisError,
)
from phasefield.model.potential import (
    HYPOTHESES,
    get_potential,
    interface_constants,
    validate_potential,
)


def test_quartic_values():
    """Test W, W' and W'' of the quartic at a few points."""
    p = get_potential("quartic")
    assert p.W(0.0) == pytest.approx(0.25)
    assert p.W(1.0) == pytest.approx(0.0, abs=1e-15)
    assert p.dW(0.5) == pytest.approx(0.5**3 - 0.5)
    assert p.d2W(1.0) == pytest.approx(2.0)


def test_eval_keeps_shape():
    """Test array evaluation keeps the input shape."""
    p = get_potential("quartic")
    t = np.linspace(-1.0, 1.0, 12).reshape(3, 4)
    assert p.eval(t, 1).shape == (3, 4)


def test_eval_rejects_bad_order():
    """Test derivative orders other than 0, 1, 2 are rejected."""
    with pytest.raises(PhaseFieldInputError):
        get_potential("quartic").eval(0.0, 3)


def test_eval_non_finite():
    """Test a non-finite argument raises PotentialEvaluationError."""
    with pytest.raises(PotentialEvaluationError):
        get_potential("quartic").eval(np.array([0.0, np.inf]))


@pytest.mark.parametrize("name", ["quartic", "sextic"])
def test_builtins_pass_all_hypotheses(name):
    """Test the built-in potentials satisfy H1-H4."""
    report = validate_potential(get_potential(name))
    assert report.passed
    assert set(report.checks) == set(HYPOTHESES)


def test_shifted_wells_fail_h1():
    """Test wells at +-2 fail H1."""
    # 1/4 (t^2 - 4)^2
    p = get_potential("shifted", coefficients=[4.0, 0.0, -2.0, 0.0, 0.25])
    report = validate_potential(p)
    assert not report.checks["H1"].passed
    assert "H1" in report.failed()


def test_odd_term_fails_h4():
    """Test an odd perturbation breaks evenness."""
    p = get_potential("tilted", coefficients=[0.25, 0.01, -0.5, -0.01, 0.25])
    report = validate_potential(p)
    assert not report.checks["H4"].passed


def test_unknown_builtin():
    """Test an unknown name without coefficients is rejected."""
    with pytest.raises(PhaseFieldInputError):
        get_potential("octic")


def test_validate_rejects_coarse_grid():
    """Test grid_resolution below 16 is rejected."""
    with pytest.raises(PhaseFieldInputError):
        validate_potential(get_potential("quartic"), grid_resolution=8)


def test_sigma_quartic():
    """Test sigma = 2 sqrt(2) / 3 for the quartic."""
    constants = interface_constants(get_potential("quartic"))
    assert constants.sigma == pytest.approx(2.0 * math.sqrt(2.0) / 3.0, abs=1e-8)
    assert constants.h0 == pytest.approx(constants.sigma / 2.0)


def test_constants_require_a_valid_potential():
    """Test sigma is refused for a potential whose wells are not at +-1."""
    p = get_potential("shifted", coefficients=[4.0, 0.0, -2.0, 0.0, 0.25])
    with pytest.raises(PotentialHypothesisError) as info:
        interface_constants(p)
    assert "H1" in info.value.failed
    assert isinstance(info.value, ValueError)


def test_sigma_homogeneity():
    """Test sigma of c^2 W is c times sigma of W."""
    p = get_potential("quartic")
    base = interface_constants(p).sigma
    assert interface_constants(p.scaled(3.0)).sigma == pytest.approx(3.0 * base, rel=1e-10)


def test_scaled_potential_stays_valid():
    """Test scaling keeps the hypotheses with a scaled convexity constant."""
    assert validate_potential(get_potential("quartic").scaled(2.0)).passed
