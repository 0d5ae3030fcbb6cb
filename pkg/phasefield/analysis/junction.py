"""Classify a level-set network near a point by the rays it sends through an annulus."""

import itertools
import logging
from typing import List, Literal, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field

from ..exceptions import InsufficientRaysError, PhaseFieldInputError
from .levelset import LevelSetCurves

logger = logging.getLogger(__name__)

PAIRING_THRESHOLD = 0.15
MIN_RADIAL_SPAN = 0.5


class Ray(BaseModel):
    """One strand of the curve network leaving the probe ball."""

    direction: List[float] = Field(..., description="Outward unit tangent")
    heading_deg: Optional[float] = Field(None, description="Heading in [0, 360) for planar rays")
    curve_id: int
    point_count: int


class JunctionVerdict(BaseModel):
    """Outcome of a junction probe."""

    kind: Literal["regular", "transverse_crossing", "other"]
    ray_count: int
    rays: List[Ray] = Field(default_factory=list)
    pairing: List[Tuple[int, int]] = Field(
        default_factory=list, description="Indices into rays of opposite-tangent pairs"
    )
    pair_defects: List[float] = Field(default_factory=list, description="|v_i + v_j| per pair")
    threshold: float = PAIRING_THRESHOLD

    def paired_headings(self) -> List[Tuple[float, float]]:
        return [(self.rays[i].heading_deg, self.rays[j].heading_deg) for i, j in self.pairing]


def _runs(mask: np.ndarray, closed: bool) -> List[np.ndarray]:
    """Index runs where mask holds, joined across the seam of closed polylines."""
    idx = np.flatnonzero(mask)
    if idx.size == 0:
        return []
    if closed and mask.all():
        return [idx]
    breaks = np.flatnonzero(np.diff(idx) > 1) + 1
    runs = np.split(idx, breaks)
    if closed and len(runs) > 1 and runs[0][0] == 0 and runs[-1][-1] == mask.size - 1:
        runs = [np.concatenate([runs[-1], runs[0]])] + runs[1:-1]
    return runs


def _collect_rays(
    curves: LevelSetCurves, center: np.ndarray, r_probe: float
) -> List[Tuple[np.ndarray, int, int]]:
    rays = []
    period = None if curves.periods is None else np.asarray(curves.periods, dtype=float)
    for curve_id, (line, closed) in enumerate(zip(curves.polylines, curves.closed)):
        offsets = line - center
        if period is not None:
            offsets = offsets - period * np.round(offsets / period)
        dist = np.linalg.norm(offsets, axis=1)
        in_annulus = (dist >= r_probe) & (dist <= 2.0 * r_probe)
        for run in _runs(in_annulus, closed):
            if run.size < 2 or np.ptp(dist[run]) < MIN_RADIAL_SPAN * r_probe:
                continue
            pts = offsets[run]
            direction = np.linalg.svd(pts - pts.mean(axis=0), full_matrices=False)[2][0]
            if direction @ pts.mean(axis=0) < 0:
                direction = -direction
            rays.append((direction, curve_id, int(run.size)))
    return rays


def _greedy_pairs(directions: np.ndarray) -> List[Tuple[Tuple[int, int], float]]:
    candidates = sorted(
        (float(np.linalg.norm(directions[i] + directions[j])), (i, j))
        for i, j in itertools.combinations(range(len(directions)), 2)
    )
    used, pairs = set(), []
    for defect, (i, j) in candidates:
        if i in used or j in used:
            continue
        used.update((i, j))
        pairs.append(((i, j), defect))
    return pairs


def classify_junction(
    curves: LevelSetCurves,
    point: Sequence[float],
    r_probe: float,
    threshold: float = PAIRING_THRESHOLD,
) -> JunctionVerdict:
    """Count rays of the curves through the annulus r_probe <= |x - point| <= 2 r_probe.

    A ray is a run of consecutive polyline points in the annulus spanning at least half of
    r_probe radially; its tangent is the principal direction of the run, oriented outward.
    Two rays with |v_1 + v_2| <= threshold make a regular point; four rays that greedily pair
    into two such opposite pairs make a transverse crossing; anything else is ``other``.

    Args:
        curves: Level-set polylines
        point: Probe center
        r_probe: Inner annulus radius
        threshold: Largest accepted |v_i + v_j| of a pair

    Returns:
        JunctionVerdict
    """
    if r_probe <= 0:
        raise PhaseFieldInputError(f"r_probe must be positive, got {r_probe}")
    center = np.asarray(point, dtype=float)
    found = _collect_rays(curves, center, r_probe)
    if len(found) < 2:
        raise InsufficientRaysError(len(found))

    def heading(v: np.ndarray) -> Optional[float]:
        if v.size != 2:
            return None
        return float(np.degrees(np.arctan2(v[1], v[0])) % 360.0)

    found.sort(key=lambda ray: heading(ray[0]) if ray[0].size == 2 else ray[1])
    directions = np.array([d for d, _, _ in found])
    rays = [
        Ray(direction=d.tolist(), heading_deg=heading(d), curve_id=cid, point_count=count)
        for d, cid, count in found
    ]

    kind = "other"
    pairing, defects = [], []
    if len(rays) in (2, 4):
        pairs = _greedy_pairs(directions)
        pairing = [pair for pair, _ in pairs]
        defects = [defect for _, defect in pairs]
        if all(defect <= threshold for defect in defects):
            kind = "regular" if len(rays) == 2 else "transverse_crossing"

    verdict = JunctionVerdict(
        kind=kind,
        ray_count=len(rays),
        rays=rays,
        pairing=pairing if kind != "other" else [],
        pair_defects=defects,
        threshold=threshold,
    )
    logger.info(f"Junction at {center.tolist()}: {kind} with {len(rays)} rays")
    return verdict
