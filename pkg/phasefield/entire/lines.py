"""Ordered configurations of 2k oriented lines and the half-lines they end in."""

import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field, computed_field, field_validator, model_validator
from scipy.optimize import brentq

from ..exceptions import PhaseFieldInputError, SeparationError

logger = logging.getLogger(__name__)

BALANCE_TOL = 1e-8
MIN_SEPARATION = 4.0


class LineConfig(BaseModel):
    """2k oriented affine lines lambda_j = (r_j, f_j) with f_j = (cos theta_j, sin theta_j)."""

    model_config = {"frozen": True}

    angles: List[float] = Field(..., description="theta_1 < ... < theta_2k < theta_1 + 2 pi")
    offsets: List[float] = Field(..., description="Signed offsets r_j along J f_j")

    @field_validator("angles")
    @classmethod
    def ordered_within_period(cls, v: List[float]) -> List[float]:
        if len(v) < 2 or len(v) % 2:
            raise ValueError(f"Need an even number >= 2 of lines, got {len(v)}")
        if any(b <= a for a, b in zip(v, v[1:])) or v[-1] >= v[0] + 2.0 * np.pi:
            raise ValueError("Angles must increase strictly within one period")
        return [float(a) for a in v]

    @model_validator(mode="after")
    def matching_offsets(self) -> "LineConfig":
        if len(self.offsets) != len(self.angles):
            raise ValueError(
                f"{len(self.angles)} angles but {len(self.offsets)} offsets were given"
            )
        return self

    @computed_field
    @property
    def k(self) -> int:
        return len(self.angles) // 2

    @computed_field
    @property
    def theta_lambda(self) -> float:
        """Half the smallest cyclic gap between consecutive angles."""
        a = np.asarray(self.angles)
        gaps = np.append(np.diff(a), 2.0 * np.pi + a[0] - a[-1])
        return float(0.5 * gaps.min())

    @computed_field
    @property
    def balanced(self) -> bool:
        return bool(np.linalg.norm(self.directions.sum(axis=0)) <= BALANCE_TOL)

    @property
    def directions(self) -> np.ndarray:
        a = np.asarray(self.angles)
        return np.column_stack([np.cos(a), np.sin(a)])

    @property
    def normals(self) -> np.ndarray:
        """J f_j, the positive side of each line."""
        f = self.directions
        return np.column_stack([-f[:, 1], f[:, 0]])

    def signed_distances(self, points: np.ndarray) -> np.ndarray:
        """(n_points, 2k) signed distances to the full lines, positive along J f_j."""
        return points @ self.normals.T - np.asarray(self.offsets)


def make_line_config(
    angles: Sequence[float], offsets: Optional[Sequence[float]] = None
) -> LineConfig:
    """Validate and build a line configuration; offsets default to zero.

    Args:
        angles: Strictly increasing angles within one period, even count
        offsets: Offsets r_j, one per angle

    Returns:
        LineConfig
    """
    offsets = [0.0] * len(angles) if offsets is None else list(offsets)
    try:
        cfg = LineConfig(angles=list(angles), offsets=offsets)
    except ValueError as exc:
        raise PhaseFieldInputError(f"Invalid line configuration: {exc}") from exc
    logger.debug(
        f"Line config k={cfg.k}: theta_lambda={cfg.theta_lambda:.6f}, balanced={cfg.balanced}"
    )
    return cfg


def half_line_starts(cfg: LineConfig, R: float) -> np.ndarray:
    """Points r_j J f_j + s_j f_j on the circle of radius R with s_j >= 0."""
    r = np.asarray(cfg.offsets)
    if R <= np.max(np.abs(r)):
        raise PhaseFieldInputError(f"R={R} must exceed every |offset| ({np.max(np.abs(r))})")
    s = np.sqrt(R**2 - r**2)
    return r[:, None] * cfg.normals + s[:, None] * cfg.directions


def half_line_distances(cfg: LineConfig, R: float, points: np.ndarray) -> np.ndarray:
    """(n_points, 2k) unsigned distances to the half-lines lambda_j^+."""
    starts = half_line_starts(cfg, R)
    f = cfg.directions
    rel = points[:, None, :] - starts[None, :, :]
    t = np.maximum(np.einsum("pjd,jd->pj", rel, f), 0.0)
    return np.linalg.norm(rel - t[..., None] * f[None, :, :], axis=2)


def _ray_point_distance(start: np.ndarray, direction: np.ndarray, point: np.ndarray) -> float:
    t = max(float((point - start) @ direction), 0.0)
    return float(np.linalg.norm(point - start - t * direction))


def _ray_distance(p1: np.ndarray, f1: np.ndarray, p2: np.ndarray, f2: np.ndarray) -> float:
    cross = f1[0] * f2[1] - f1[1] * f2[0]
    if abs(cross) > 1e-14:
        d = p2 - p1
        s = (d[0] * f2[1] - d[1] * f2[0]) / cross
        t = (d[0] * f1[1] - d[1] * f1[0]) / cross
        if s >= 0 and t >= 0:
            return 0.0
    return min(_ray_point_distance(p2, f2, p1), _ray_point_distance(p1, f1, p2))


def separation(cfg: LineConfig, R: float) -> Tuple[float, Tuple[int, int]]:
    """Smallest distance between two half-lines and the pair attaining it."""
    starts = half_line_starts(cfg, R)
    f = cfg.directions
    best, pair = np.inf, (0, 1)
    n = len(cfg.angles)
    for i in range(n):
        for j in range(i + 1, n):
            d = _ray_distance(starts[i], f[i], starts[j], f[j])
            if d < best:
                best, pair = d, (i, j)
    return float(best), pair


def minimal_radius(
    cfg: LineConfig, min_separation: float = MIN_SEPARATION, rtol: float = 1e-9
) -> float:
    """Smallest R at which all half-lines are min_separation apart.

    The radius is bracketed by doubling and located with Brent's method; the returned value is
    on the admissible side of the root.

    Args:
        cfg: Line configuration
        min_separation: Required pairwise distance
        rtol: Relative tolerance on R

    Returns:
        Minimal admissible R
    """

    def gap(R: float) -> float:
        return separation(cfg, R)[0] - min_separation

    lo = float(np.max(np.abs(cfg.offsets))) * (1.0 + 1e-12) + 1e-12
    if gap(lo) >= 0:
        return lo
    hi = max(2.0 * lo, 1.0)
    while gap(hi) < 0:
        lo, hi = hi, 2.0 * hi
        if hi > 1e6:
            dist, pair = separation(cfg, hi)
            raise SeparationError(pair, dist, None)
    xtol = rtol * hi
    R = brentq(gap, lo, hi, xtol=xtol)
    if gap(R) < 0:
        R = min(R + 2.0 * xtol, hi)
    logger.debug(f"Minimal gluing radius {R:.6f}")
    return float(R)
