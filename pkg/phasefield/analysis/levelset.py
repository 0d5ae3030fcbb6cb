"""Marching-triangles level sets and their comparison with reference geodesics."""

import logging
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
from scipy.spatial import cKDTree

from ..exceptions import PhaseFieldInputError, UnsupportedKindError
from ..mesh.surface import SurfaceMesh, geodesic_reference

logger = logging.getLogger(__name__)

LEVEL_NUDGE = 1e-12

EdgeKey = Tuple[int, int]


def _curve_lengths(
    polylines: List[np.ndarray], closed: List[bool], periods: Optional[Tuple[float, float]]
) -> List[float]:
    lengths = []
    for line, is_closed in zip(polylines, closed):
        d = np.diff(np.vstack([line, line[:1]]) if is_closed else line, axis=0)
        if periods is not None:
            period = np.asarray(periods, dtype=float)
            d = d - period * np.round(d / period)
        lengths.append(float(np.linalg.norm(d, axis=1).sum()))
    return lengths


@dataclass(frozen=True)
class LevelSetCurves:
    """Polylines of {u = t} with points on mesh edges."""

    polylines: List[np.ndarray] = field(repr=False)
    closed: List[bool]
    total_length: float
    level: float
    level_used: float
    edge_keys: List[List[EdgeKey]] = field(default_factory=list, repr=False)
    periods: Optional[Tuple[float, float]] = None

    @property
    def n_curves(self) -> int:
        return len(self.polylines)

    def curve_lengths(self) -> List[float]:
        return _curve_lengths(self.polylines, self.closed, self.periods)

    def to_frame(self) -> pd.DataFrame:
        """Points as rows (curve_id, x, y, z); planar curves get z = 0."""
        frames = []
        for k, line in enumerate(self.polylines):
            z = line[:, 2] if line.shape[1] == 3 else np.zeros(len(line))
            frames.append(pd.DataFrame({"curve_id": k, "x": line[:, 0], "y": line[:, 1], "z": z}))
        if not frames:
            return pd.DataFrame(columns=["curve_id", "x", "y", "z"])
        return pd.concat(frames, ignore_index=True)


def _crossing_points(
    mesh: SurfaceMesh, values: np.ndarray, t: float, keys: np.ndarray
) -> np.ndarray:
    a, b = keys[:, 0], keys[:, 1]
    lam = (t - values[a]) / (values[b] - values[a])
    d = mesh.minimal_image(mesh.vertices[b] - mesh.vertices[a])
    pts = mesh.vertices[a] + lam[:, None] * d
    if mesh.periods is not None:
        pts = np.mod(pts, np.asarray(mesh.periods, dtype=float))
    return pts


def _chain(links: Dict[EdgeKey, List[EdgeKey]]) -> List[Tuple[List[EdgeKey], bool]]:
    """Walk the crossing-edge graph (degree <= 2) into ordered chains."""
    visited = set()
    chains = []
    starts = sorted(k for k, nbrs in links.items() if len(nbrs) == 1)
    for start in starts + sorted(links):
        if start in visited:
            continue
        chain = [start]
        visited.add(start)
        prev, cur = None, start
        while True:
            nxt = [n for n in sorted(links[cur]) if n != prev and n not in visited]
            if not nxt:
                break
            prev, cur = cur, nxt[0]
            chain.append(cur)
            visited.add(cur)
        closed = len(chain) > 2 and chain[0] in links[chain[-1]]
        chains.append((chain, closed))
    return chains


def extract_level_set(values: np.ndarray, mesh: SurfaceMesh, t: float = 0.0) -> LevelSetCurves:
    """Extract {u = t} by marching triangles with linear edge interpolation.

    If t equals a vertex value it is raised by 1e-12 (repeatedly if needed) so that every
    crossing lies strictly inside an edge.

    Args:
        values: Per-vertex field values
        mesh: Mesh the values live on
        t: Level in (-1, 1)

    Returns:
        LevelSetCurves ordered deterministically by their smallest edge key
    """
    if abs(t) >= 1.0:
        raise PhaseFieldInputError(f"Level must satisfy |t| < 1, got {t}")
    values = np.asarray(values, dtype=float)
    level = t
    while np.any(values == t):
        t += LEVEL_NUDGE
    if t != level:
        logger.debug(f"Level {level} hit a vertex value; using {t}")

    above = values[mesh.triangles] > t
    count = above.sum(axis=1)
    crossing = np.flatnonzero((count == 1) | (count == 2))

    links: Dict[EdgeKey, List[EdgeKey]] = defaultdict(list)
    for tri_idx in crossing:
        tri = mesh.triangles[tri_idx]
        flags = above[tri_idx]
        keys = []
        for k in range(3):
            i, j = int(tri[k]), int(tri[(k + 1) % 3])
            if flags[k] != flags[(k + 1) % 3]:
                keys.append((min(i, j), max(i, j)))
        links[keys[0]].append(keys[1])
        links[keys[1]].append(keys[0])

    chains = _chain(links)
    polylines, closed_flags, edge_keys = [], [], []
    for chain, closed in chains:
        pts = _crossing_points(mesh, values, t, np.array(chain, dtype=np.int64))
        polylines.append(pts)
        closed_flags.append(closed)
        edge_keys.append(chain)

    total = float(sum(_curve_lengths(polylines, closed_flags, mesh.periods)))
    curves = LevelSetCurves(
        polylines=polylines,
        closed=closed_flags,
        total_length=total,
        level=level,
        level_used=t,
        edge_keys=edge_keys,
        periods=mesh.periods,
    )
    logger.info(f"Level set u={level:g}: {len(polylines)} curve(s), total length {total:.6f}")
    return curves


@dataclass(frozen=True)
class GeodesicProximity:
    """Distance between an extracted curve set and great circles."""

    fitted_normal: np.ndarray
    hausdorff_to_fit: float
    nearest_reference: str
    hausdorff_to_reference: float
    curve_length: float
    reference_length: float


def _circle_hausdorff(points: np.ndarray, normal: np.ndarray, radius: float) -> float:
    normal = normal / np.linalg.norm(normal)
    height = points @ normal
    rho = np.linalg.norm(points - np.outer(height, normal), axis=1)
    curve_to_circle = np.sqrt(height**2 + (rho - radius) ** 2).max()

    helper = np.eye(3)[int(np.argmin(np.abs(normal)))]
    e1 = np.cross(normal, helper)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(normal, e1)
    s = 2.0 * np.pi * np.arange(720) / 720
    circle = radius * (np.outer(np.cos(s), e1) + np.outer(np.sin(s), e2))
    circle_to_curve = cKDTree(points).query(circle)[0].max()
    return float(max(curve_to_circle, circle_to_curve))


def geodesic_distance_report(curves: LevelSetCurves, mesh: SurfaceMesh) -> GeodesicProximity:
    """Fit a great circle to the curves and measure Hausdorff distances.

    Args:
        curves: Extracted level set on a sphere mesh
        mesh: Sphere mesh

    Returns:
        GeodesicProximity
    """
    if mesh.kind != "sphere":
        raise UnsupportedKindError(mesh.kind, "geodesic_distance_report")
    if not curves.polylines:
        raise PhaseFieldInputError("No curves to compare")
    points = np.vstack(curves.polylines)
    radius = float(mesh.params.get("radius", 1.0))
    # Plane through the centre: normal is the weakest singular direction.
    normal = np.linalg.svd(points, full_matrices=False)[2][-1]
    fit = _circle_hausdorff(points, normal, radius)

    best_label, best = "", np.inf
    for ref in geodesic_reference(mesh):
        d = _circle_hausdorff(points, ref.normal, radius)
        if d < best:
            best_label, best = ref.label, d
    return GeodesicProximity(
        fitted_normal=normal,
        hausdorff_to_fit=fit,
        nearest_reference=best_label,
        hausdorff_to_reference=float(best),
        curve_length=curves.total_length,
        reference_length=2.0 * np.pi * radius,
    )
