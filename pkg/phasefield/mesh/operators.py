"""Piecewise-linear mass and stiffness forms on a SurfaceMesh."""

import logging
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np
import pandas as pd
from scipy import sparse

from ..exceptions import DegenerateTriangleError
from .surface import SurfaceMesh

logger = logging.getLogger(__name__)

MIN_ANGLE = 1e-6


@dataclass(frozen=True)
class DiscreteOperators:
    """Lumped mass M, cotangent stiffness K and per-triangle gradient data."""

    mesh_id: str
    mass: np.ndarray = field(repr=False)
    stiffness: sparse.csr_matrix = field(repr=False)
    total_area: float
    areas: np.ndarray = field(repr=False)
    # (n_triangles, 3, dim): gradient of each corner's hat function
    basis_gradients: np.ndarray = field(repr=False)
    triangles: np.ndarray = field(repr=False)
    # vertices held by Dirichlet data: the boundary of planar boxes
    dirichlet: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return int(self.mass.size)

    @property
    def mass_matrix(self) -> sparse.dia_matrix:
        return sparse.diags(self.mass)

    def triangle_gradients(self, u: np.ndarray) -> np.ndarray:
        """Constant gradient of the piecewise-linear interpolant on each triangle."""
        return np.einsum("tk,tkd->td", u[self.triangles], self.basis_gradients)

    def vertex_gradients(self, u: np.ndarray) -> np.ndarray:
        """Recovered vertex gradients: area-weighted average of incident triangle gradients."""
        g = self.triangle_gradients(u)
        weighted = np.zeros((self.n, g.shape[1]))
        for k in range(3):
            np.add.at(weighted, self.triangles[:, k], self.areas[:, None] * g)
        return weighted / (3.0 * self.mass[:, None])

    def dirichlet_density(self, u: np.ndarray) -> np.ndarray:
        """Per-vertex |grad u|^2 with sum_i M_i density_i = u^T K u."""
        g = self.triangle_gradients(u)
        per_triangle = self.areas * np.einsum("td,td->t", g, g) / 3.0
        density = np.bincount(self.triangles.ravel(), np.repeat(per_triangle, 3), minlength=self.n)
        return density / self.mass

    def to_frame(self) -> pd.DataFrame:
        """Stiffness in coordinate-list form plus the lumped mass as a diagonal."""
        coo = self.stiffness.tocoo()
        stiffness = pd.DataFrame(
            {"matrix": "K", "row": coo.row, "col": coo.col, "value": coo.data}
        )
        idx = np.arange(self.n)
        mass = pd.DataFrame({"matrix": "M", "row": idx, "col": idx, "value": self.mass})
        return pd.concat([stiffness, mass], ignore_index=True)


def _triangle_geometry(corners: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Cotangents and sines of the corner angles, and triangle areas."""
    cot = np.empty(corners.shape[:2])
    angles = np.empty(corners.shape[:2])
    for k in range(3):
        a = corners[:, (k + 1) % 3] - corners[:, k]
        b = corners[:, (k + 2) % 3] - corners[:, k]
        dot = np.einsum("td,td->t", a, b)
        if corners.shape[2] == 2:
            cross = np.abs(a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0])
        else:
            cross = np.linalg.norm(np.cross(a, b), axis=1)
        angles[:, k] = np.arctan2(cross, dot)
        with np.errstate(divide="ignore", invalid="ignore"):
            cot[:, k] = dot / cross
        if k == 0:
            areas = 0.5 * cross
    return cot, angles, areas


def _basis_gradients(corners: np.ndarray) -> np.ndarray:
    a = corners[:, 1] - corners[:, 0]
    b = corners[:, 2] - corners[:, 0]
    aa = np.einsum("td,td->t", a, a)
    ab = np.einsum("td,td->t", a, b)
    bb = np.einsum("td,td->t", b, b)
    det = aa * bb - ab * ab
    g1 = (bb[:, None] * a - ab[:, None] * b) / det[:, None]
    g2 = (aa[:, None] * b - ab[:, None] * a) / det[:, None]
    return np.stack([-g1 - g2, g1, g2], axis=1)


def assemble_operators(mesh: SurfaceMesh) -> DiscreteOperators:
    """Assemble lumped mass and cotangent stiffness.

    K_ij = -1/2 (cot alpha_ij + cot beta_ij) for each edge, K_ii = -sum_j K_ij; M_i is a third
    of the area of the incident triangles. Periodic identifications are folded in through the
    shared vertex indexing of flat tori.

    Args:
        mesh: Valid surface mesh

    Returns:
        DiscreteOperators
    """
    corners = mesh.corner_positions()
    cot, angles, areas = _triangle_geometry(corners)

    min_angle = angles.min(axis=1)
    bad = np.flatnonzero(min_angle < MIN_ANGLE)
    if bad.size:
        raise DegenerateTriangleError(int(bad[0]), float(min_angle[bad[0]]))

    tris = mesh.triangles
    n = mesh.n_vertices
    rows, cols, vals = [], [], []
    for k in range(3):
        # The angle at corner k faces edge (k+1, k+2).
        i = tris[:, (k + 1) % 3]
        j = tris[:, (k + 2) % 3]
        w = -0.5 * cot[:, k]
        rows += [i, j]
        cols += [j, i]
        vals += [w, w]
    off = sparse.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)
    ).tocsr()
    off.sum_duplicates()
    diagonal = -np.asarray(off.sum(axis=1)).ravel()
    stiffness = (off + sparse.diags(diagonal)).tocsr()

    mass = np.bincount(tris.ravel(), np.repeat(areas / 3.0, 3), minlength=n)
    dirichlet = np.zeros(n, dtype=bool)
    if mesh.kind == "planar_box":
        dirichlet[mesh.boundary_vertices] = True
    ops = DiscreteOperators(
        mesh_id=mesh.mesh_id,
        mass=mass,
        stiffness=stiffness,
        total_area=float(mass.sum()),
        areas=areas,
        basis_gradients=_basis_gradients(corners),
        triangles=tris,
        dirichlet=dirichlet,
    )
    logger.info(
        f"Assembled operators on {mesh.kind} mesh {mesh.mesh_id}: total area "
        f"{ops.total_area:.6f}, nnz(K)={stiffness.nnz}"
    )
    return ops
