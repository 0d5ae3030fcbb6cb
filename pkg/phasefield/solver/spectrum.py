"""Morse index and nullity from the generalized eigenproblem H v = lambda M v."""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd
from scipy import linalg, sparse
from scipy.sparse.linalg import ArpackError, ArpackNoConvergence, eigsh

from ..exceptions import EigensolverError, PhaseFieldInputError
from ..mesh.operators import DiscreteOperators
from ..model.potential import Potential
from .energy import PhaseField, bind_functional

logger = logging.getLogger(__name__)

DENSE_LIMIT = 3000
RESIDUAL_TOL = 1e-6


@dataclass(frozen=True)
class SpectralSummary:
    """Lowest generalized eigenpairs of the second variation."""

    index: int
    nullity: int
    lowest_eigenvalues: np.ndarray
    # (n_vertices, q), zero outside the active test-function set, M-orthonormal
    eigenfields: np.ndarray = field(repr=False)
    tol: float
    residuals: np.ndarray = field(repr=False)
    active_count: int
    solver: str

    def to_report(self) -> Dict[str, Any]:
        return {
            "index": self.index,
            "nullity": self.nullity,
            "eigenvalues": [float(v) for v in self.lowest_eigenvalues],
            "tol": self.tol,
            "max_residual": float(np.max(self.residuals)),
            "active_count": self.active_count,
            "solver": self.solver,
        }

    def eigenfield_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame(
            self.eigenfields, columns=[f"mode_{k}" for k in range(self.eigenfields.shape[1])]
        )
        frame.insert(0, "vertex_id", np.arange(self.eigenfields.shape[0]))
        return frame


def _gershgorin_lower(A: sparse.csr_matrix) -> float:
    diag = A.diagonal()
    radius = np.asarray(abs(A).sum(axis=1)).ravel() - np.abs(diag)
    return float(np.min(diag - radius))


def _lowest_pairs(A: sparse.csr_matrix, q: int, dense_limit: int):
    n = A.shape[0]
    if n <= dense_limit:
        values, vectors = linalg.eigh(A.toarray(), subset_by_index=[0, q - 1])
        return values, vectors, "dense"

    sigma = _gershgorin_lower(A) - 1.0
    try:
        values, vectors = eigsh(A, k=q, sigma=sigma, which="LM")
    except ArpackNoConvergence as exc:
        partial = exc.eigenvalues
        residuals = [
            float(np.linalg.norm(A @ exc.eigenvectors[:, k] - partial[k] * exc.eigenvectors[:, k]))
            for k in range(len(partial))
        ]
        raise EigensolverError(
            f"Shift-invert eigensolver did not converge ({len(partial)}/{q} pairs)", residuals
        ) from exc
    except ArpackError as exc:
        raise EigensolverError(f"Eigensolver failed: {exc}") from exc
    order = np.argsort(values)
    return values[order], vectors[:, order], "shift-invert"


def morse_index(
    u: PhaseField,
    ops: DiscreteOperators,
    p: Potential,
    q: int = 6,
    tol: Optional[float] = None,
    fixed: Optional[np.ndarray] = None,
    region: Optional[np.ndarray] = None,
    critical_tol: float = 1e-6,
    dense_limit: int = DENSE_LIMIT,
) -> SpectralSummary:
    """Count negative and near-zero eigenvalues of H v = lambda M v.

    Test functions live on the active vertices: those not fixed and inside ``region`` when
    given, which yields the localized index on a sub-domain. Without ``fixed`` the Dirichlet
    vertices of the operators are used, so planar boxes restrict to their interior.

    Args:
        u: Critical point
        ops: Discrete operators
        p: Potential
        q: Number of lowest eigenvalues to compute (>= 3)
        tol: Zero threshold; default 1e-8 times the largest |H_ii / M_i|
        fixed: Boolean mask of Dirichlet vertices (default ``ops.dirichlet``)
        region: Boolean mask of the sub-domain
        critical_tol: Largest accepted M^-1 residual of u
        dense_limit: Largest active size solved densely

    Returns:
        SpectralSummary
    """
    if q < 3:
        raise PhaseFieldInputError(f"q must be >= 3, got {q}")
    functional = bind_functional(u, ops, p)

    if fixed is None:
        fixed = ops.dirichlet
    active = ~np.asarray(fixed, dtype=bool)
    residual = functional.residual_norm(u.values, active)
    if residual > critical_tol:
        raise PhaseFieldInputError(
            f"State is not a critical point (residual {residual:.3e} > {critical_tol:.1e})"
        )
    if region is not None:
        active &= np.asarray(region, dtype=bool)
    n_active = int(active.sum())
    if q >= n_active:
        raise PhaseFieldInputError(f"q={q} must be smaller than the {n_active} active vertices")

    H = functional.hessian(u.values)[active][:, active]
    mass = ops.mass[active]
    d = sparse.diags(1.0 / np.sqrt(mass))
    A = (d @ H @ d).tocsr()
    A = 0.5 * (A + A.T)

    if tol is None:
        tol = 1e-8 * float(np.max(np.abs(A.diagonal())))

    values, vectors, solver = _lowest_pairs(A, q, dense_limit)
    fields = vectors / np.sqrt(mass)[:, None]

    residuals = np.array(
        [
            np.linalg.norm(H @ fields[:, k] - values[k] * mass * fields[:, k])
            / np.linalg.norm(fields[:, k])
            for k in range(q)
        ]
    )
    if np.any(residuals > RESIDUAL_TOL):
        raise EigensolverError(
            f"Eigenpair residuals up to {residuals.max():.3e} exceed {RESIDUAL_TOL:.0e}",
            residuals.tolist(),
        )

    index = int(np.sum(values <= -tol))
    nullity = int(np.sum(np.abs(values) < tol))
    if index == q:
        logger.warning(f"All {q} computed eigenvalues are negative; index is at least {q}")

    embedded = np.zeros((ops.n, q))
    embedded[active] = fields
    logger.info(
        f"Spectrum ({solver}, {n_active} active): index {index}, nullity {nullity}, "
        f"lowest {values[: min(q, 4)].round(6).tolist()}"
    )
    return SpectralSummary(
        index=index,
        nullity=nullity,
        lowest_eigenvalues=values,
        eigenfields=embedded,
        tol=float(tol),
        residuals=residuals,
        active_count=n_active,
        solver=solver,
    )


def nested_indices(
    u: PhaseField,
    ops: DiscreteOperators,
    p: Potential,
    regions: List[np.ndarray],
    fixed: Optional[np.ndarray] = None,
    q: int = 6,
    tol: Optional[float] = None,
) -> List[int]:
    """Localized indices of one critical point over a list of regions."""
    return [morse_index(u, ops, p, q=q, tol=tol, fixed=fixed, region=r).index for r in regions]
