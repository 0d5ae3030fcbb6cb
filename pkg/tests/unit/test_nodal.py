"""Unit tests for nodal-set analysis."""

import numpy as np
import pytest

from phasefield.entire.nodal import nodal_analysis
from phasefield.exceptions import DegenerateFieldError, UnsupportedKindError
from phasefield.mesh.surface import build_surface


@pytest.fixture(scope="module")
def box():
    return build_surface("planar_box", 16, {"half_width": 1.0})


def test_product_has_one_crossing(box):
    """Test xy has four domains, one singular point and four arcs."""
    x, y = box.vertices.T
    nodal = nodal_analysis(x * y, box)
    assert nodal.domain_count == 4
    assert nodal.singular_count == 1
    assert nodal.component_count == 4
    assert nodal.euler_consistent
    assert nodal.end_count == 4
    assert nodal.sign_pattern in ("+-+-", "-+-+")
    assert np.allclose(nodal.singular_points[0], [0.0, 0.0])
    assert nodal.changes_sign


def test_linear_field_has_one_arc(box):
    """Test x has two domains separated by one arc."""
    nodal = nodal_analysis(box.vertices[:, 0], box)
    assert nodal.domain_count == 2
    assert nodal.singular_count == 0
    assert nodal.component_count == 1
    assert nodal.euler_consistent
    assert nodal.unbounded_domain_count == 2
    assert nodal.positive_domains == 1 and nodal.negative_domains == 1


def test_zero_crossing_inside_edges(box):
    """Test a nodal line between vertices is found through sign-changing edges."""
    nodal = nodal_analysis(box.vertices[:, 1] - 0.03, box)
    assert nodal.domain_count == 2
    assert nodal.component_count == 1
    assert nodal.end_count == 2


def test_positive_field_has_one_domain(box):
    """Test a field without zeros is a single domain with no nodal set."""
    nodal = nodal_analysis(np.ones(box.n_vertices), box)
    assert nodal.domain_count == 1
    assert nodal.component_count == 0
    assert nodal.euler_consistent
    assert not nodal.changes_sign


def test_zero_field_is_degenerate(box):
    """Test an identically zero field is rejected."""
    with pytest.raises(DegenerateFieldError):
        nodal_analysis(np.zeros(box.n_vertices), box)


def test_requires_planar_box():
    """Test curved surfaces are rejected."""
    sphere = build_surface("sphere", 1)
    with pytest.raises(UnsupportedKindError):
        nodal_analysis(sphere.vertices[:, 2], sphere)
