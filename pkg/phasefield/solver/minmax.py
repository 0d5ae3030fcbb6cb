"""Mountain-pass min-max over paths from u = -1 to u = +1, with epsilon-continuation."""

import logging
from dataclasses import dataclass, field
from typing import Iterator, List, Optional, Sequence

import numpy as np
from pydantic import BaseModel, Field
from scipy import sparse
from scipy.sparse.linalg import splu

from ..exceptions import (
    DegenerateResultError,
    MeshMismatchError,
    NewtonConvergenceError,
    NewtonDivergenceError,
    PhaseFieldInputError,
    SingularSystemError,
)
from ..mesh.operators import DiscreteOperators
from ..mesh.surface import SurfaceMesh
from ..model.heteroclinic import HeteroclinicProfile, eval_profile, periodic_band_values
from ..model.potential import Potential
from .energy import AllenCahnEnergy, PhaseField
from .newton import NewtonOptions, dirichlet_mask, newton_refine

logger = logging.getLogger(__name__)

MIN_NODES = 9
TIE_TOL = 1e-12
COLLAPSE_LEVEL = 1e-8


class MinMaxOptions(BaseModel):
    """Path relaxation controls."""

    nodes: int = Field(17, ge=MIN_NODES, description="Path nodes including both endpoints")
    max_iters: int = Field(200, ge=1, description="Maximum descent sweeps")
    step: float = Field(0.5, gt=0, description="Descent time step in units of epsilon")
    reparam_every: int = Field(10, ge=1, description="Sweeps between reparametrizations")
    concentration: float = Field(
        1.0, ge=0, description="Weight of node energy in the reparametrization arclength"
    )
    backtracks: int = Field(6, ge=0, description="Step halvings allowed per node and sweep")
    stall_tol: float = Field(
        1e-9, ge=0, description="Relative path-max change that stops descent"
    )
    residual_tol: float = Field(1e-8, gt=0, description="Newton tolerance on the max node")
    newton: NewtonOptions = Field(default_factory=NewtonOptions)
    perturbation: float = Field(1e-3, ge=0, description="Amplitude of the initial noise")


@dataclass
class Path:
    """Ordered states from u = -1 to u = +1 sharing epsilon and mesh."""

    nodes: np.ndarray = field(repr=False)
    epsilon: float
    mesh_id: str

    def __post_init__(self):
        self.nodes = np.asarray(self.nodes, dtype=float)
        if self.nodes.ndim != 2 or self.nodes.shape[0] < MIN_NODES:
            raise PhaseFieldInputError(f"A path needs at least {MIN_NODES} nodes")
        if not (np.all(self.nodes[0] == -1.0) and np.all(self.nodes[-1] == 1.0)):
            raise PhaseFieldInputError("Path endpoints must be the constants -1 and +1")

    @property
    def n_nodes(self) -> int:
        return int(self.nodes.shape[0])

    def node(self, k: int) -> PhaseField:
        values = self.nodes[k].copy()
        return PhaseField(values=values, epsilon=self.epsilon, mesh_id=self.mesh_id)


@dataclass(frozen=True)
class MinMaxResult:
    """Critical point found by the mountain pass."""

    critical_point: PhaseField
    level: float
    residual: float
    iterations: int
    history: List[float] = field(repr=False)
    max_node: int = -1
    newton_iterations: int = 0
    path: Optional[Path] = field(default=None, repr=False)


def front_distance(mesh: SurfaceMesh, center: int) -> np.ndarray:
    """Distance from a vertex: geodesic on spheres, periodic on flat tori, chordal otherwise."""
    x = mesh.vertices
    c = x[center]
    if mesh.kind == "sphere":
        radius = float(mesh.params.get("radius", 1.0))
        cosine = np.clip(x @ c / radius**2, -1.0, 1.0)
        return radius * np.arccos(cosine)
    return np.linalg.norm(mesh.minimal_image(x - c), axis=1)


def initial_path(
    mesh: SurfaceMesh,
    epsilon: float,
    m: int,
    seed: int,
    profile: HeteroclinicProfile,
    amplitude: float = 1e-3,
) -> Path:
    """Sweep a diffuse front outward from a seed-chosen vertex.

    Node k is H((c_k - d)/epsilon) with d the distance to the chosen vertex and c_k = k/m of the
    largest distance, plus uniform noise of the given amplitude, clipped to [-1, 1].

    Args:
        mesh: Surface mesh
        epsilon: Interface width
        m: Number of path segments (>= 8)
        seed: Random seed for the front centre and the perturbation
        profile: Heteroclinic profile
        amplitude: Perturbation amplitude

    Returns:
        Path with m + 1 nodes
    """
    if m < MIN_NODES - 1:
        raise PhaseFieldInputError(f"m must be >= {MIN_NODES - 1}, got {m}")
    rng = np.random.default_rng(seed)
    center = int(rng.integers(mesh.n_vertices))
    d = front_distance(mesh, center)
    radii = d.max() * np.arange(1, m) / m

    nodes = np.empty((m + 1, mesh.n_vertices))
    nodes[0] = -1.0
    nodes[-1] = 1.0
    noise = amplitude * rng.uniform(-1.0, 1.0, size=(m - 1, mesh.n_vertices))
    fronts = eval_profile(profile, (radii[:, None] - d[None, :]) / epsilon)
    nodes[1:-1] = np.clip(fronts + noise, -1.0, 1.0)
    logger.info(f"Initial path: {m + 1} nodes, front centred at vertex {center}")
    return Path(nodes=nodes, epsilon=epsilon, mesh_id=mesh.mesh_id)


def _max_node(energies: np.ndarray) -> int:
    return int(np.flatnonzero(energies >= energies.max() - TIE_TOL)[0])


def _reparametrize(
    nodes: np.ndarray, energies: np.ndarray, mass: np.ndarray, concentration: float
) -> np.ndarray:
    """Redistribute interior nodes uniformly in energy-weighted M-arclength."""
    diffs = np.diff(nodes, axis=0)
    lengths = np.sqrt(np.einsum("kv,kv,v->k", diffs, diffs, mass))
    top = max(float(energies.max()), 1e-300)
    weights = 1.0 + concentration * 0.5 * (energies[:-1] + energies[1:]) / top
    s = np.concatenate([[0.0], np.cumsum(lengths * weights)])
    if s[-1] <= 0.0:
        return nodes
    targets = s[-1] * np.arange(nodes.shape[0]) / (nodes.shape[0] - 1)
    new = nodes.copy()
    for k in range(1, nodes.shape[0] - 1):
        j = np.searchsorted(s, targets[k], side="right") - 1
        j = int(np.clip(j, 0, nodes.shape[0] - 2))
        span = s[j + 1] - s[j]
        t = 0.0 if span <= 0 else (targets[k] - s[j]) / span
        new[k] = (1.0 - t) * nodes[j] + t * nodes[j + 1]
    return new


def _descent_sweep(
    functional: AllenCahnEnergy,
    preconditioner,
    tau: float,
    nodes: np.ndarray,
    energies: np.ndarray,
    backtracks: int,
) -> None:
    """One semi-implicit descent step on every interior node, never raising a node energy."""
    interior = nodes[1:-1]
    grads = np.stack([functional.gradient(u) for u in interior], axis=1)
    directions = -tau * preconditioner.solve(grads).T
    for k in range(interior.shape[0]):
        scale = 1.0
        for _ in range(backtracks + 1):
            trial = interior[k] + scale * directions[k]
            e = functional.energy(trial)
            if e <= energies[k + 1]:
                nodes[k + 1] = trial
                energies[k + 1] = e
                break
            scale *= 0.5


def mountain_pass(
    path: Path,
    ops: DiscreteOperators,
    p: Potential,
    opts: Optional[MinMaxOptions] = None,
    fixed: Optional[np.ndarray] = None,
) -> MinMaxResult:
    """Relax the path, then Newton-refine its highest node.

    Each sweep applies (M + tau eps K)^{-1}-preconditioned gradient descent to the interior
    nodes with per-node backtracking; every ``reparam_every`` sweeps the nodes are redistributed
    in energy-weighted arclength, unless that would raise the path maximum.

    Args:
        path: Initial path
        ops: Discrete operators of the path's mesh
        p: Potential
        opts: Min-max options
        fixed: Optional Dirichlet mask forwarded to Newton

    Returns:
        MinMaxResult
    """
    opts = opts or MinMaxOptions()
    if path.mesh_id != ops.mesh_id:
        raise MeshMismatchError(ops.mesh_id, path.mesh_id)
    eps = path.epsilon
    functional = AllenCahnEnergy(ops, p, eps)
    tau = opts.step * eps
    preconditioner = splu((sparse.diags(ops.mass) + tau * eps * ops.stiffness).tocsc())

    nodes = path.nodes.copy()
    energies = functional.node_energies(nodes)
    history = [float(energies.max())]
    sweeps = 0

    for sweeps in range(1, opts.max_iters + 1):
        _descent_sweep(functional, preconditioner, tau, nodes, energies, opts.backtracks)
        if sweeps % opts.reparam_every == 0:
            candidate = _reparametrize(nodes, energies, ops.mass, opts.concentration)
            cand_energies = functional.node_energies(candidate)
            if cand_energies.max() <= energies.max():
                nodes, energies = candidate, cand_energies
            else:
                logger.debug(f"Sweep {sweeps}: reparametrization rejected")
        history.append(float(energies.max()))
        logger.debug(f"Sweep {sweeps}: path max {history[-1]:.8f}")
        change = history[-2] - history[-1]
        if sweeps > opts.reparam_every and change <= opts.stall_tol * abs(history[-1]):
            break

    k = _max_node(energies)
    logger.info(
        f"Path relaxed in {sweeps} sweeps at eps={eps:g}: max node {k}, "
        f"energy {energies[k]:.6f}"
    )
    final_path = Path(nodes=nodes, epsilon=eps, mesh_id=path.mesh_id)

    newton_opts = opts.newton.model_copy(update={"tol": opts.residual_tol})
    start = PhaseField(values=nodes[k].copy(), epsilon=eps, mesh_id=path.mesh_id)
    try:
        refined = newton_refine(start, ops, p, newton_opts, fixed=fixed)
    except (NewtonConvergenceError, NewtonDivergenceError) as exc:
        logger.error(f"Newton refinement of max node {k} failed: {exc}")
        raise

    level = functional.energy(refined.solution.values)
    if abs(level) < COLLAPSE_LEVEL:
        raise DegenerateResultError(level)
    return MinMaxResult(
        critical_point=refined.solution,
        level=level,
        residual=refined.residual,
        iterations=sweeps,
        history=history,
        max_node=k,
        newton_iterations=refined.iterations,
        path=final_path,
    )


def geometric_schedule(epsilon0: float, count: int) -> List[float]:
    """epsilon0 / sqrt(2)^i for i = 0..count-1."""
    return [epsilon0 / np.sqrt(2.0) ** i for i in range(count)]


def sharpen(u: PhaseField, epsilon: float, profile: HeteroclinicProfile) -> PhaseField:
    """Rescale interfaces of u from u.epsilon to epsilon: H(eps_prev H^-1(u) / eps)."""
    s = profile.inverse(u.values)
    values = eval_profile(profile, s * u.epsilon / epsilon)
    return PhaseField(values=values, epsilon=epsilon, mesh_id=u.mesh_id)


def iter_continuation(
    mesh: SurfaceMesh,
    ops: DiscreteOperators,
    p: Potential,
    profile: HeteroclinicProfile,
    schedule: Sequence[float],
    opts: Optional[MinMaxOptions] = None,
    seed: int = 0,
) -> Iterator[MinMaxResult]:
    """Run the mountain pass at schedule[0], then follow the critical point down the schedule.

    Each later epsilon starts Newton from the sharpened previous critical point; if Newton
    fails there, a fresh mountain pass is run at that epsilon.

    Args:
        mesh: Surface mesh
        ops: Operators on the mesh
        p: Potential
        profile: Heteroclinic profile of p
        schedule: Strictly decreasing epsilons
        opts: Min-max options
        seed: Seed of the initial path

    Yields:
        One MinMaxResult per epsilon, as soon as it is found
    """
    opts = opts or MinMaxOptions()
    schedule = [float(e) for e in schedule]
    if not schedule:
        raise PhaseFieldInputError("Empty epsilon schedule")
    if any(b >= a for a, b in zip(schedule, schedule[1:])) or schedule[-1] <= 0:
        raise PhaseFieldInputError("Epsilon schedule must be positive and strictly decreasing")

    fixed = dirichlet_mask(mesh)
    fixed = fixed if fixed.any() else None
    previous: Optional[MinMaxResult] = None
    for eps in schedule:
        if mesh.h_max > eps / 2:
            logger.warning(f"h_max={mesh.h_max:.4f} exceeds eps/2={eps / 2:.4f}")

        continued = None
        if previous is not None:
            start = sharpen(previous.critical_point, eps, profile)
            newton_opts = opts.newton.model_copy(update={"tol": opts.residual_tol})
            try:
                refined = newton_refine(start, ops, p, newton_opts, fixed=fixed)
                level = AllenCahnEnergy(ops, p, eps).energy(refined.solution.values)
                if abs(level) < COLLAPSE_LEVEL:
                    raise DegenerateResultError(level)
                continued = MinMaxResult(
                    critical_point=refined.solution,
                    level=level,
                    residual=refined.residual,
                    iterations=0,
                    history=[level],
                    newton_iterations=refined.iterations,
                )
                logger.info(f"Continued to eps={eps:g}: level {level:.6f}")
            except (
                NewtonConvergenceError,
                NewtonDivergenceError,
                SingularSystemError,
                DegenerateResultError,
            ) as exc:
                logger.warning(f"Continuation to eps={eps:g} failed ({exc}); restarting min-max")

        if continued is None:
            path = initial_path(mesh, eps, opts.nodes - 1, seed, profile, opts.perturbation)
            continued = mountain_pass(path, ops, p, opts, fixed=fixed)
            logger.info(f"Mountain pass at eps={eps:g}: level {continued.level:.6f}")
        previous = continued
        yield continued


def continuation(
    mesh: SurfaceMesh,
    ops: DiscreteOperators,
    p: Potential,
    profile: HeteroclinicProfile,
    schedule: Sequence[float],
    opts: Optional[MinMaxOptions] = None,
    seed: int = 0,
) -> List[MinMaxResult]:
    """All results of iter_continuation, one per epsilon."""
    return list(iter_continuation(mesh, ops, p, profile, schedule, opts, seed))


def periodic_band(mesh: SurfaceMesh, epsilon: float, profile: HeteroclinicProfile) -> PhaseField:
    """Two-interface band on a flat torus: interfaces at x = +-side/4, positive in between."""
    if mesh.kind != "flat_torus":
        raise PhaseFieldInputError(f"periodic_band needs a flat_torus mesh, got {mesh.kind}")
    side = float(mesh.params.get("side", 1.0))
    values = periodic_band_values(mesh.vertices[:, 0], side, epsilon, profile)
    return PhaseField(values=values, epsilon=epsilon, mesh_id=mesh.mesh_id)
