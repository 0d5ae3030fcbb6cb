"""Damped Newton iteration on the discrete Euler-Lagrange equation."""

import logging
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from pydantic import BaseModel, Field
from scipy import sparse
from scipy.sparse.linalg import splu

from ..exceptions import (
    NewtonConvergenceError,
    NewtonDivergenceError,
    SingularSystemError,
)
from ..mesh.operators import DiscreteOperators
from ..mesh.surface import SurfaceMesh
from ..model.potential import Potential
from .energy import AllenCahnEnergy, PhaseField, bind_functional

logger = logging.getLogger(__name__)

DIVERGENCE_FACTOR = 10.0
DIVERGENCE_WINDOW = 5


class NewtonOptions(BaseModel):
    """Newton iteration controls."""

    tol: float = Field(1e-10, gt=0, description="Target M^-1 residual norm")
    max_iters: int = Field(50, ge=0, description="Maximum Newton steps")
    damping: float = Field(1.0, gt=0, le=1.0, description="Initial step length")
    regularization: float = Field(
        0.0, ge=0, description="Shift added as regularization * M to the Newton matrix"
    )
    min_step: float = Field(1.0 / 64, gt=0, description="Smallest backtracking step")


@dataclass(frozen=True)
class NewtonResult:
    """Converged state with its iteration record."""

    solution: PhaseField
    residual: float
    iterations: int
    residuals: List[float] = field(default_factory=list, repr=False)


def dirichlet_mask(mesh: SurfaceMesh) -> np.ndarray:
    """Vertices whose values are frozen: the boundary of planar boxes, nothing otherwise."""
    if mesh.kind == "planar_box":
        return mesh.boundary_mask.copy()
    return np.zeros(mesh.n_vertices, dtype=bool)


def _newton_step(
    functional: AllenCahnEnergy, u: np.ndarray, free: np.ndarray, regularization: float
) -> np.ndarray:
    g = functional.gradient(u)[free]
    H = functional.hessian(u)[free][:, free]
    if regularization > 0:
        H = H + regularization * sparse.diags(functional.ops.mass[free])
    try:
        lu = splu(H.tocsc())
    except RuntimeError as exc:
        raise SingularSystemError(str(exc)) from exc
    du = lu.solve(-g)
    if not np.all(np.isfinite(du)):
        raise SingularSystemError("non-finite Newton update")
    return du


def newton_refine(
    u0: PhaseField,
    ops: DiscreteOperators,
    p: Potential,
    opts: Optional[NewtonOptions] = None,
    fixed: Optional[np.ndarray] = None,
) -> NewtonResult:
    """Solve eps K u + 1/eps M W'(u) = 0 by damped Newton from u0.

    Steps are backtracked (halving from ``damping`` down to ``min_step``) until the residual
    decreases; if no trial step decreases it, the smallest one is taken.

    Args:
        u0: Initial state
        ops: Discrete operators
        p: Potential
        opts: Newton options
        fixed: Boolean mask of vertices held at their initial values (Dirichlet data)

    Returns:
        NewtonResult
    """
    opts = opts or NewtonOptions()
    functional = bind_functional(u0, ops, p)
    free = np.ones(ops.n, dtype=bool) if fixed is None else ~np.asarray(fixed, dtype=bool)

    u = u0.values.copy()
    residual = functional.residual_norm(u, free)
    history = [residual]
    best_u, best_res = u.copy(), residual
    logger.debug(f"Newton start: residual {residual:.3e}")

    for iteration in range(1, opts.max_iters + 1):
        if residual <= opts.tol:
            break
        du = _newton_step(functional, u, free, opts.regularization)

        step = opts.damping
        while True:
            trial = u.copy()
            trial[free] += step * du
            trial_res = functional.residual_norm(trial, free)
            if trial_res <= (1.0 - 1e-4 * step) * residual or step / 2 < opts.min_step:
                break
            step /= 2

        u, residual = trial, trial_res
        history.append(residual)
        logger.debug(f"Newton step {iteration}: length {step:.4f}, residual {residual:.3e}")
        if residual < best_res:
            best_u, best_res = u.copy(), residual
        if not np.isfinite(residual) or (
            len(history) > DIVERGENCE_WINDOW
            and residual > DIVERGENCE_FACTOR * history[-1 - DIVERGENCE_WINDOW]
        ):
            raise NewtonDivergenceError(u, history)

    if residual > opts.tol:
        raise NewtonConvergenceError(best_u, best_res, len(history) - 1)

    logger.info(f"Newton converged in {len(history) - 1} steps, residual {residual:.3e}")
    return NewtonResult(
        solution=u0.with_values(u),
        residual=residual,
        iterations=len(history) - 1,
        residuals=history,
    )
