"""Diffuse varifold masses in geodesic balls, density ratios and monotonicity profiles."""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Sequence

import numpy as np
import pandas as pd
from scipy.sparse.csgraph import dijkstra

from ..exceptions import PhaseFieldInputError
from ..mesh.operators import DiscreteOperators
from ..mesh.surface import SurfaceMesh
from ..model.potential import Potential, interface_constants
from ..solver.energy import PhaseField, bind_functional

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DensityReport:
    """Ball masses of eps|grad u|^2 around one vertex and their normalizations.

    ``ratios`` divide by 2 r sigma (one unit-multiplicity line gives 1, a transverse crossing 2);
    ``ratios_h0`` divide by 2 r h0 with h0 = sigma / 2.
    ``core_deficit`` is c in ratio(r) ~ asymptotic_ratio - c / r, the finite mass a junction core
    is missing, in units of length.
    """

    center: int
    radii: np.ndarray
    masses: np.ndarray
    ratios: np.ndarray
    ratios_h0: np.ndarray
    monotonicity_ratios: np.ndarray
    asymptotic_ratio: Optional[float]
    core_deficit: Optional[float]
    sigma: float
    h0: float
    monotonicity_m: float = 0.0
    distances: np.ndarray = field(default=None, repr=False)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "r": self.radii,
                "mass": self.masses,
                "ratio": self.ratios,
                "monotonicity_ratio": self.monotonicity_ratios,
            }
        )

    def to_report(self) -> Dict[str, Any]:
        return {
            "center": self.center,
            "radii": self.radii.tolist(),
            "mass": self.masses.tolist(),
            "ratio": self.ratios.tolist(),
            "ratio_h0": self.ratios_h0.tolist(),
            "monotonicity_ratio": self.monotonicity_ratios.tolist(),
            "asymptotic_ratio": self.asymptotic_ratio,
            "core_deficit": self.core_deficit,
            "normalization": {"sigma": self.sigma, "h0": self.h0},
            "monotonicity_m": self.monotonicity_m,
        }


def nearest_vertex(mesh: SurfaceMesh, point: Sequence[float]) -> int:
    """Index of the vertex closest to ``point`` (minimal image on periodic meshes)."""
    d = mesh.minimal_image(mesh.vertices - np.asarray(point, dtype=float))
    return int(np.argmin(np.einsum("id,id->i", d, d)))


def graph_distances(mesh: SurfaceMesh, center: int) -> np.ndarray:
    """Edge-graph (Dijkstra) distances from a vertex."""
    if not 0 <= center < mesh.n_vertices:
        raise PhaseFieldInputError(f"Center vertex {center} outside mesh")
    return dijkstra(mesh.edge_graph(), directed=False, indices=center)


def diffuse_density(u: PhaseField, ops: DiscreteOperators) -> np.ndarray:
    """Per-vertex eps|grad u|^2, consistent with the assembled stiffness."""
    return u.epsilon * ops.dirichlet_density(u.values)


def _ball_sums(weights: np.ndarray, distances: np.ndarray, radii: np.ndarray) -> np.ndarray:
    order = np.argsort(distances)
    cumulative = np.concatenate([[0.0], np.cumsum(weights[order])])
    counts = np.searchsorted(distances[order], radii, side="right")
    return cumulative[counts]


def _warn_beyond_reach(distances: np.ndarray, radii: np.ndarray, center: int) -> None:
    reach = float(np.max(distances[np.isfinite(distances)]))
    if np.any(radii > reach):
        logger.warning(
            f"Radius {float(np.max(radii)):.4f} exceeds the graph eccentricity {reach:.4f} "
            f"of vertex {center}; the ball covers the whole mesh"
        )


def mass_in_ball(
    u: PhaseField, ops: DiscreteOperators, mesh: SurfaceMesh, center: int, r: float
) -> float:
    """Diffuse varifold mass int_{B_r(center)} eps|grad u|^2.

    Ball membership is decided per vertex by edge-graph distance.

    Args:
        u: Field
        ops: Operators of the mesh
        mesh: Mesh carrying the edge graph
        center: Center vertex
        r: Radius, positive

    Returns:
        Mass in the ball
    """
    if r <= 0:
        raise PhaseFieldInputError(f"Radius must be positive, got {r}")
    if u.mesh_id != ops.mesh_id or ops.mesh_id != mesh.mesh_id:
        raise PhaseFieldInputError("Field, operators and mesh must share one mesh")
    distances = graph_distances(mesh, center)
    radii = np.array([r], dtype=float)
    _warn_beyond_reach(distances, radii, center)
    weights = ops.mass * diffuse_density(u, ops)
    return float(_ball_sums(weights, distances, radii)[0])


def _outer_line(radii: np.ndarray, masses: np.ndarray) -> Optional[np.ndarray]:
    upper = len(radii) // 2
    r, m = radii[upper:], masses[upper:]
    if r.size < 2:
        return None
    return np.polyfit(r, m, 1)


def asymptotic_slope_ratio(radii: np.ndarray, masses: np.ndarray, sigma: float) -> Optional[float]:
    """Slope of mass against r over the upper half of the radii, divided by 2 sigma."""
    line = _outer_line(radii, masses)
    if line is None:
        return None
    return float(line[0] / (2.0 * sigma))


def core_deficit(radii: np.ndarray, masses: np.ndarray, sigma: float) -> Optional[float]:
    """Minus the intercept of the same fit over 2 sigma, so ratio(r) ~ slope ratio - c / r."""
    line = _outer_line(radii, masses)
    if line is None:
        return None
    return float(-line[1] / (2.0 * sigma))


def density_ratio(
    u: PhaseField,
    ops: DiscreteOperators,
    mesh: SurfaceMesh,
    p: Potential,
    center: int,
    radii: Sequence[float],
    monotonicity_m: float = 0.0,
) -> DensityReport:
    """Density ratios and almost-monotonicity ratios at one center.

    Args:
        u: Field
        ops: Operators of the mesh
        mesh: Mesh carrying the edge graph
        p: Potential, for sigma and the energy density
        center: Center vertex
        radii: Positive, sorted radii
        monotonicity_m: Curvature constant m in e^{m r} E(B_r) / r

    Returns:
        DensityReport
    """
    radii = np.asarray(radii, dtype=float)
    if radii.size == 0 or np.any(radii <= 0):
        raise PhaseFieldInputError("Radii must be a non-empty list of positive numbers")
    if np.any(np.diff(radii) < 0):
        raise PhaseFieldInputError("Radii must be sorted")
    functional = bind_functional(u, ops, p)
    if mesh.mesh_id != ops.mesh_id:
        raise PhaseFieldInputError("Operators were not assembled on this mesh")

    distances = graph_distances(mesh, center)
    _warn_beyond_reach(distances, radii, center)

    density = diffuse_density(u, ops)
    masses = _ball_sums(ops.mass * density, distances, radii)
    energy_density = 0.5 * density + p.eval(u.values, 0) / functional.epsilon
    energies = _ball_sums(ops.mass * energy_density, distances, radii)

    constants = interface_constants(p)
    sigma, h0 = constants.sigma, constants.h0
    ratios = masses / (2.0 * radii * sigma)
    report = DensityReport(
        center=int(center),
        radii=radii,
        masses=masses,
        ratios=ratios,
        ratios_h0=masses / (2.0 * radii * h0),
        monotonicity_ratios=np.exp(monotonicity_m * radii) * energies / radii,
        asymptotic_ratio=asymptotic_slope_ratio(radii, masses, sigma),
        core_deficit=core_deficit(radii, masses, sigma),
        sigma=sigma,
        h0=h0,
        monotonicity_m=monotonicity_m,
        distances=distances,
    )
    logger.info(
        f"Density at vertex {center}: ratio {ratios[-1]:.4f} at r={radii[-1]:g}, "
        f"asymptotic {report.asymptotic_ratio}, core deficit {report.core_deficit}"
    )
    return report
