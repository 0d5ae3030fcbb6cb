"""Glued approximate 2k-ended solutions, their Newton refinement and Jacobi fields."""

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.spatial import cKDTree

from ..exceptions import PhaseFieldInputError, SeparationError, UnsupportedKindError
from ..mesh.operators import DiscreteOperators
from ..mesh.surface import SurfaceMesh
from ..model.heteroclinic import HeteroclinicProfile, eval_profile
from ..model.potential import Potential
from ..solver.energy import PhaseField, bind_functional
from ..solver.newton import NewtonOptions, NewtonResult, dirichlet_mask, newton_refine
from .lines import MIN_SEPARATION, LineConfig, half_line_distances, minimal_radius, separation

logger = logging.getLogger(__name__)

COLLAR = 2.0
BOX_MARGIN = 4.0
MATCH_TOL = 1e-6

SYMMETRY_MAPS = {
    "swap": lambda x, y: (y, x),
    "reflect_x": lambda x, y: (-x, y),
    "reflect_y": lambda x, y: (x, -y),
    "rotate90": lambda x, y: (-y, x),
}


def smooth_step(t: np.ndarray) -> np.ndarray:
    """C-infinity transition: 0 for t <= 0, 1 for t >= 1."""
    t = np.asarray(t, dtype=float)

    def bump(s):
        out = np.zeros_like(s)
        pos = s > 0
        out[pos] = np.exp(-1.0 / s[pos])
        return out

    a, b = bump(t), bump(1.0 - t)
    return a / (a + b)


def partition_of_unity(cfg: LineConfig, R: float, points: np.ndarray) -> np.ndarray:
    """(n_points, 2k + 1) weights chi_0, ..., chi_2k summing to 1.

    chi_0 is 1 on B_{R-1} and vanishes outside B_{R+1}; chi_j is 1 where lambda_j^+ is closer
    than every other half-line by more than 2 (outside B_{R+1}) and vanishes where some other
    half-line is closer by 2 or more.
    """
    radius = np.linalg.norm(points, axis=1)
    outer = smooth_step((radius - (R - 1.0)) / 2.0)
    d = half_line_distances(cfg, R, points)
    n = d.shape[1]
    w = np.ones_like(d)
    for j in range(n):
        for i in range(n):
            if i != j:
                w[:, j] *= smooth_step((d[:, i] - d[:, j] + COLLAR) / (2.0 * COLLAR))
    chi = outer[:, None] * w / w.sum(axis=1, keepdims=True)
    return np.column_stack([1.0 - outer, chi])


def _planar_box(mesh: SurfaceMesh, operation: str) -> float:
    if mesh.kind != "planar_box":
        raise UnsupportedKindError(mesh.kind, operation)
    return float(mesh.params["half_width"])


def approximate_solution(
    cfg: LineConfig,
    profile: HeteroclinicProfile,
    mesh: SurfaceMesh,
    R: Optional[float] = None,
) -> PhaseField:
    """u_lambda = sum_j (-1)^{j+1} chi_j H(dist^s(., lambda_j)) at eps = 1 on a planar box.

    Args:
        cfg: Line configuration
        profile: Heteroclinic profile
        mesh: planar_box mesh of half width L > R + 4
        R: Gluing radius; default the minimal radius with half-lines 4 apart

    Returns:
        PhaseField at epsilon 1
    """
    L = _planar_box(mesh, "approximate_solution")
    if R is None:
        R = minimal_radius(cfg)
    else:
        dist, pair = separation(cfg, R)
        if dist < MIN_SEPARATION:
            raise SeparationError(pair, dist, minimal_radius(cfg))
    if L <= R + BOX_MARGIN:
        raise PhaseFieldInputError(f"Box half width {L} must exceed R + 4 = {R + BOX_MARGIN:.4f}")

    points = mesh.vertices
    chi = partition_of_unity(cfg, R, points)[:, 1:]
    heights = eval_profile(profile, cfg.signed_distances(points))
    signs = (-1.0) ** np.arange(len(cfg.angles))
    values = np.einsum("pj,pj,j->p", chi, heights, signs)
    logger.info(
        f"Approximate {2 * cfg.k}-ended solution: R={R:.4f}, L={L:g}, "
        f"max|u|={np.max(np.abs(values)):.6f}"
    )
    return PhaseField(values=values, epsilon=1.0, mesh_id=mesh.mesh_id)


def refine_entire(
    u0: PhaseField,
    ops: DiscreteOperators,
    mesh: SurfaceMesh,
    p: Potential,
    tol: float = 1e-8,
    opts: Optional[NewtonOptions] = None,
) -> NewtonResult:
    """Newton-refine u0 at eps = 1 with the box boundary frozen to u0's trace.

    Args:
        u0: Initial field on a planar_box mesh
        ops: Operators of the mesh
        mesh: The planar_box mesh
        p: Potential
        tol: Residual tolerance on interior vertices
        opts: Further Newton options; ``tol`` overrides theirs

    Returns:
        NewtonResult whose solution is the refined field
    """
    _planar_box(mesh, "refine_entire")
    if u0.epsilon != 1.0:
        raise PhaseFieldInputError(f"Entire solutions live at eps = 1, got {u0.epsilon}")
    opts = (opts or NewtonOptions()).model_copy(update={"tol": tol})
    result = newton_refine(u0, ops, p, opts, fixed=dirichlet_mask(mesh))
    logger.info(f"Refined entire solution: residual {result.residual:.3e}")
    return result


def symmetry_defect(
    u: PhaseField, mesh: SurfaceMesh, transform: str = "swap", parity: int = -1
) -> float:
    """max |u(T x) - parity * u(x)| over vertices whose image under T is a vertex.

    Args:
        u: Field on a planar mesh
        mesh: Mesh of the field
        transform: One of swap, reflect_x, reflect_y, rotate90
        parity: +1 for invariance, -1 for oddness

    Returns:
        Largest defect
    """
    if transform not in SYMMETRY_MAPS:
        raise PhaseFieldInputError(f"Unknown symmetry '{transform}'; use {sorted(SYMMETRY_MAPS)}")
    if mesh.dim != 2:
        raise UnsupportedKindError(mesh.kind, "symmetry_defect")
    x, y = mesh.vertices[:, 0], mesh.vertices[:, 1]
    image_points = np.column_stack(SYMMETRY_MAPS[transform](x, y))
    gap, images = cKDTree(mesh.vertices).query(image_points)
    matched = gap <= MATCH_TOL * mesh.h_max
    if not matched.any():
        raise PhaseFieldInputError(f"Mesh has no vertex pairs related by {transform}")
    return float(np.max(np.abs(u.values[images[matched]] - parity * u.values[matched])))


@dataclass(frozen=True)
class JacobiField:
    """Directional derivative <grad u, e> with its discrete Jacobi residual."""

    values: np.ndarray = field(repr=False)
    direction: np.ndarray
    residual: float
    mesh_id: str


def directional_jacobi_field(
    u: PhaseField,
    ops: DiscreteOperators,
    mesh: SurfaceMesh,
    p: Potential,
    e: Sequence[float],
) -> JacobiField:
    """v_i = <recovered grad u_i, e>, with the Jacobi residual of v on interior vertices.

    The residual is the M^-1 norm of eps K v + M W''(u) v / eps.

    Args:
        u: Field on a planar mesh
        ops: Operators of the mesh
        mesh: Mesh of the field
        p: Potential
        e: Direction, normalized internally

    Returns:
        JacobiField
    """
    if not mesh.is_planar:
        raise UnsupportedKindError(mesh.kind, "directional_jacobi_field")
    e = np.asarray(e, dtype=float)
    if e.shape != (2,) or not np.linalg.norm(e) > 0:
        raise PhaseFieldInputError("Direction must be a non-zero 2-vector")
    e = e / np.linalg.norm(e)
    functional = bind_functional(u, ops, p)

    v = ops.vertex_gradients(u.values) @ e
    jacobi = functional.hessian(u.values) @ v
    interior = ~mesh.boundary_mask
    residual = float(np.sqrt(np.sum(jacobi[interior] ** 2 / ops.mass[interior])))
    logger.info(f"Jacobi field along {e.round(4).tolist()}: residual {residual:.3e}")
    return JacobiField(values=v, direction=e, residual=residual, mesh_id=u.mesh_id)
