"""Dirichlet-box index of a refined 2k-ended solution against the bound k - 1."""

import logging
from typing import List, Optional, Sequence

import numpy as np
from pydantic import BaseModel, Field

from ..mesh.operators import DiscreteOperators
from ..mesh.surface import SurfaceMesh
from ..model.potential import Potential
from ..solver.energy import PhaseField
from ..solver.newton import dirichlet_mask
from ..solver.spectrum import morse_index, nested_indices
from .construction import directional_jacobi_field
from .nodal import nodal_analysis

logger = logging.getLogger(__name__)

GENERIC_ANGLE = 0.37


class IndexBoundVerdict(BaseModel):
    """Computed index, the lower bound it must meet and the nodal cross-check."""

    index_computed: int
    bound: int
    passed: bool
    nullity: int
    lowest_eigenvalues: List[float]
    k: int = Field(..., description="Half the number of ends, reported next to q")
    nodal_domains: Optional[int] = Field(
        None, description="q of a generic directional Jacobi field; ind >= q - 1 is informational"
    )
    euler_consistent: Optional[bool] = None
    jacobi_positive_domains: Optional[int] = None
    jacobi_negative_domains: Optional[int] = None
    jacobi_sign_pattern: Optional[str] = None
    nested_indices: Optional[List[int]] = None
    nested_half_widths: Optional[List[float]] = None
    certified: str = "lower bound: Dirichlet truncation of the entire-plane index"


def box_regions(mesh: SurfaceMesh, half_widths: Sequence[float]) -> List[np.ndarray]:
    """Vertex masks of the open squares max(|x|, |y|) < L, one per half width."""
    extent = np.max(np.abs(mesh.vertices), axis=1)
    return [extent < float(L) - 1e-9 for L in half_widths]


def index_lower_bound_check(
    u: PhaseField,
    ops: DiscreteOperators,
    mesh: SurfaceMesh,
    p: Potential,
    k: int,
    q: int = 6,
    tol: Optional[float] = None,
    direction: Optional[Sequence[float]] = None,
    nested: Optional[Sequence[float]] = None,
) -> IndexBoundVerdict:
    """Check ind(u) >= k - 1 on the Dirichlet box and cross-check with the nodal count.

    Args:
        u: Refined 2k-ended solution on a planar_box mesh (residual <= 1e-6)
        ops: Operators of the mesh
        mesh: planar_box mesh
        p: Potential
        k: Half the number of ends
        q: Eigenvalues computed
        tol: Zero-eigenvalue threshold
        direction: Direction of the Jacobi field for the nodal count; default a generic angle
        nested: Half widths of nested sub-boxes whose localized indices are also reported

    Returns:
        IndexBoundVerdict
    """
    fixed = dirichlet_mask(mesh)
    summary = morse_index(u, ops, p, q=q, tol=tol, fixed=fixed)
    bound = k - 1

    if direction is None:
        direction = (np.cos(GENERIC_ANGLE), np.sin(GENERIC_ANGLE))
    jacobi = directional_jacobi_field(u, ops, mesh, p, direction)
    nodal = nodal_analysis(jacobi.values, mesh)

    nested_list = None
    if nested:
        regions = box_regions(mesh, nested)
        nested_list = nested_indices(u, ops, p, regions, fixed=fixed, q=q, tol=tol)

    verdict = IndexBoundVerdict(
        index_computed=summary.index,
        bound=bound,
        passed=summary.index >= bound,
        nullity=summary.nullity,
        lowest_eigenvalues=[float(v) for v in summary.lowest_eigenvalues],
        k=k,
        nodal_domains=nodal.domain_count,
        euler_consistent=nodal.euler_consistent,
        jacobi_positive_domains=nodal.positive_domains,
        jacobi_negative_domains=nodal.negative_domains,
        jacobi_sign_pattern=nodal.sign_pattern,
        nested_indices=nested_list,
        nested_half_widths=[float(L) for L in nested] if nested else None,
    )
    logger.info(
        f"Index bound check k={k}: index {summary.index} >= {bound}: {verdict.passed}; "
        f"Jacobi nodal domains q={nodal.domain_count} (+{nodal.positive_domains}/"
        f"-{nodal.negative_domains})"
    )
    if nodal.domain_count - 1 > summary.index:
        logger.warning(
            f"Box index {summary.index} is below q - 1 = {nodal.domain_count - 1}; the box may be "
            "too small to resolve the unstable directions"
        )
    return verdict
