"""Allen-Cahn energy E(u) = eps/2 u^T K u + 1/eps sum_i M_i W(u_i), its variations and xi."""

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import sparse

from ..exceptions import MeshMismatchError, PhaseFieldInputError
from ..mesh.operators import DiscreteOperators
from ..model.potential import Potential

logger = logging.getLogger(__name__)

OVERSHOOT_TOL = 1e-6


@dataclass(frozen=True)
class PhaseField:
    """Per-vertex state u at interface width epsilon."""

    values: np.ndarray = field(repr=False)
    epsilon: float
    mesh_id: str

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        if values.ndim != 1:
            raise PhaseFieldInputError("Field values must be a 1-d array")
        if not np.all(np.isfinite(values)):
            raise PhaseFieldInputError("Field values must be finite")
        if self.epsilon <= 0:
            raise PhaseFieldInputError(f"epsilon must be positive, got {self.epsilon}")
        overshoot = float(np.max(np.abs(values), initial=0.0))
        if overshoot > 1.0 + OVERSHOOT_TOL:
            logger.warning(
                f"Field on mesh {self.mesh_id} exceeds |u| <= 1 (max |u| = {overshoot:.6f})"
            )

    def with_values(self, values: np.ndarray) -> "PhaseField":
        return PhaseField(values=values, epsilon=self.epsilon, mesh_id=self.mesh_id)

    def with_epsilon(self, epsilon: float) -> "PhaseField":
        return PhaseField(values=self.values, epsilon=epsilon, mesh_id=self.mesh_id)


@dataclass(frozen=True)
class DiscrepancyField:
    """Discrepancy xi = eps/2 |grad u|^2 - W(u)/eps."""

    xi_values: np.ndarray = field(repr=False)
    l1_norm: float
    integral: float
    recovery: str


class AllenCahnEnergy:
    """Energy functional for fixed operators, potential and epsilon; acts on raw arrays."""

    def __init__(self, ops: DiscreteOperators, potential: Potential, epsilon: float):
        """Initialize functional.

        Args:
            ops: Discrete operators of the mesh
            potential: Double-well potential
            epsilon: Interface width
        """
        if epsilon <= 0:
            raise PhaseFieldInputError(f"epsilon must be positive, got {epsilon}")
        self.ops = ops
        self.potential = potential
        self.epsilon = float(epsilon)

    def energy(self, u: np.ndarray) -> float:
        eps = self.epsilon
        dirichlet = float(u @ (self.ops.stiffness @ u))
        bulk = float(self.ops.mass @ self.potential.eval(u, 0))
        return 0.5 * eps * dirichlet + bulk / eps

    def gradient(self, u: np.ndarray) -> np.ndarray:
        eps = self.epsilon
        return eps * (self.ops.stiffness @ u) + self.ops.mass * self.potential.eval(u, 1) / eps

    def hessian(self, u: np.ndarray) -> sparse.csr_matrix:
        eps = self.epsilon
        reaction = sparse.diags(self.ops.mass * self.potential.eval(u, 2) / eps)
        return (eps * self.ops.stiffness + reaction).tocsr()

    def residual_norm(self, u: np.ndarray, free: Optional[np.ndarray] = None) -> float:
        """M^{-1}-norm of the gradient, over free vertices when a mask is given."""
        g = self.gradient(u)
        m = self.ops.mass
        if free is not None:
            g, m = g[free], m[free]
        return float(np.sqrt(np.sum(g * g / m)))

    def node_energies(self, nodes: np.ndarray) -> np.ndarray:
        """Energies of a stack of states (n_nodes, n_vertices)."""
        eps = self.epsilon
        dirichlet = np.einsum("ij,ij->i", nodes, (self.ops.stiffness @ nodes.T).T)
        bulk = self.potential.eval(nodes, 0) @ self.ops.mass
        return 0.5 * eps * dirichlet + bulk / eps

    def discrepancy(self, u: np.ndarray, recovery: str = "recovered") -> DiscrepancyField:
        eps = self.epsilon
        if recovery == "recovered":
            grad = self.ops.vertex_gradients(u)
            sq = np.einsum("id,id->i", grad, grad)
        elif recovery == "consistent":
            sq = self.ops.dirichlet_density(u)
        else:
            raise PhaseFieldInputError(f"Unknown gradient recovery '{recovery}'")
        xi = 0.5 * eps * sq - self.potential.eval(u, 0) / eps
        return DiscrepancyField(
            xi_values=xi,
            l1_norm=float(self.ops.mass @ np.abs(xi)),
            integral=float(self.ops.mass @ xi),
            recovery=recovery,
        )


def bind_functional(u: PhaseField, ops: DiscreteOperators, p: Potential) -> AllenCahnEnergy:
    if u.mesh_id != ops.mesh_id:
        raise MeshMismatchError(ops.mesh_id, u.mesh_id)
    if u.values.size != ops.n:
        raise MeshMismatchError(ops.mesh_id, f"{u.mesh_id} ({u.values.size} values)")
    return AllenCahnEnergy(ops, p, u.epsilon)


def energy(u: PhaseField, ops: DiscreteOperators, p: Potential) -> float:
    """E_eps(u) = eps/2 u^T K u + 1/eps sum_i M_i W(u_i)."""
    return bind_functional(u, ops, p).energy(u.values)


def gradient(u: PhaseField, ops: DiscreteOperators, p: Potential) -> np.ndarray:
    """First variation eps K u + 1/eps M W'(u)."""
    return bind_functional(u, ops, p).gradient(u.values)


def hessian(u: PhaseField, ops: DiscreteOperators, p: Potential) -> sparse.csr_matrix:
    """Second variation eps K + 1/eps M diag(W''(u))."""
    return bind_functional(u, ops, p).hessian(u.values)


def residual_norm(u: PhaseField, ops: DiscreteOperators, p: Potential) -> float:
    return bind_functional(u, ops, p).residual_norm(u.values)


def discrepancy_xi(
    u: PhaseField, ops: DiscreteOperators, p: Potential, recovery: str = "recovered"
) -> DiscrepancyField:
    """Per-vertex discrepancy and its L1 norm.

    Args:
        u: Field
        ops: Discrete operators
        p: Potential
        recovery: "recovered" uses area-weighted vertex gradients; "consistent" uses the
            per-vertex Dirichlet density, for which int eps|grad u|^2 = E + int xi exactly

    Returns:
        DiscrepancyField
    """
    return bind_functional(u, ops, p).discrepancy(u.values, recovery)
