"""End-to-end experiments: solve, diagnose, write artifacts and the run report."""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

import numpy as np
import scipy

from phasefield import __version__
from phasefield.analysis.density import (
    density_ratio,
    diffuse_density,
    nearest_vertex,
)
from phasefield.analysis.junction import classify_junction
from phasefield.analysis.levelset import extract_level_set, geodesic_distance_report
from phasefield.entire.construction import approximate_solution, refine_entire, symmetry_defect
from phasefield.entire.index_bound import index_lower_bound_check
from phasefield.entire.lines import make_line_config, minimal_radius
from phasefield.entire.nodal import nodal_analysis
from phasefield.exceptions import (
    ArtifactError,
    InsufficientRaysError,
    MeshMismatchError,
    PhaseFieldError,
)
from phasefield.io.artifacts import ArtifactStore
from phasefield.mesh.operators import DiscreteOperators, assemble_operators
from phasefield.mesh.surface import SurfaceMesh, build_surface
from phasefield.model.heteroclinic import HeteroclinicProfile, solve_heteroclinic
from phasefield.model.potential import (
    InterfaceConstants,
    Potential,
    get_potential,
    interface_constants,
)
from phasefield.solver.energy import PhaseField, discrepancy_xi
from phasefield.solver.minmax import MinMaxResult, iter_continuation
from phasefield.solver.newton import NewtonOptions, dirichlet_mask
from phasefield.solver.spectrum import morse_index

from .config import RunConfig, config_hash, stored_config
from .logging_config import attach_json_log, detach_log
from .models import EntireRecord, EpsilonRecord, Provenance, RunReport

logger = logging.getLogger(__name__)


@dataclass
class Model:
    """Potential, its interface constants and heteroclinic profile."""

    potential: Potential
    constants: InterfaceConstants
    profile: HeteroclinicProfile


def build_model(config: RunConfig) -> Model:
    p = get_potential(**config.potential.model_dump())
    constants = interface_constants(p)
    profile = solve_heteroclinic(p, config.heteroclinic.half_width, config.heteroclinic.step)
    return Model(potential=p, constants=constants, profile=profile)


def epsilon_tag(epsilon: float) -> str:
    return f"eps_{epsilon:g}"


def _density_center(u: PhaseField, ops: DiscreteOperators, mesh: SurfaceMesh, config) -> int:
    if config.varifold.probe_center is not None:
        return nearest_vertex(mesh, config.varifold.probe_center)
    return int(np.argmax(diffuse_density(u, ops)))


def diagnose_critical_point(
    result: MinMaxResult,
    mesh: SurfaceMesh,
    ops: DiscreteOperators,
    model: Model,
    config: RunConfig,
    store: ArtifactStore,
) -> EpsilonRecord:
    """Spectral and varifold diagnostics of one continuation step, written to the store."""
    u = result.critical_point
    tag = epsilon_tag(u.epsilon)
    p = model.potential

    field_name = f"field_{tag}"
    store.write_field(field_name, u)
    store.write_history(f"history_{tag}", result.history)

    fixed = dirichlet_mask(mesh)
    spectrum = morse_index(
        u,
        ops,
        p,
        q=config.spectrum.q,
        tol=config.spectrum.tol,
        fixed=fixed if fixed.any() else None,
        critical_tol=config.spectrum.critical_tol,
        dense_limit=config.spectrum.dense_limit,
    )
    store.write_spectrum(f"spectrum_{tag}", spectrum, eigenfields=config.spectrum.eigenfields)

    curves = extract_level_set(u.values, mesh, config.varifold.level)
    store.write_curves(f"levelset_{tag}", curves)
    hausdorff = None
    if mesh.kind == "sphere" and curves.n_curves:
        hausdorff = geodesic_distance_report(curves, mesh).hausdorff_to_fit

    xi = discrepancy_xi(u, ops, p)
    center = _density_center(u, ops, mesh, config)
    density = density_ratio(
        u, ops, mesh, p, center, config.varifold.probe_radii, config.varifold.monotonicity_m
    )
    store.write_density(f"density_{tag}", density)

    return EpsilonRecord(
        epsilon=u.epsilon,
        field_artifact=field_name,
        energy=result.level,
        residual=result.residual,
        index=spectrum.index,
        nullity=spectrum.nullity,
        lowest_eigenvalues=[float(v) for v in spectrum.lowest_eigenvalues],
        newton_iterations=result.newton_iterations,
        minmax_iterations=result.iterations,
        level_set_length=curves.total_length,
        level_set_curves=curves.n_curves,
        hausdorff_to_great_circle=hausdorff,
        h_max=mesh.h_max,
        xi_l1=xi.l1_norm,
        xi_l1_relative=xi.l1_norm / result.level if result.level > 0 else None,
        density_ratios={f"{r:g}": float(v) for r, v in zip(density.radii, density.ratios)},
    )


def _run_minmax(config: RunConfig, model: Model, store: ArtifactStore, report: RunReport) -> None:
    surface = config.surface
    mesh = build_surface(surface.kind, surface.resolution, surface.params)
    ops = assemble_operators(mesh)
    store.write_mesh("mesh", mesh)
    logger.info(
        f"Min-max on {mesh.kind} ({mesh.n_vertices} vertices, h_max={mesh.h_max:.4f}) "
        f"over eps {config.epsilon_schedule}"
    )

    steps = iter_continuation(
        mesh,
        ops,
        model.potential,
        model.profile,
        config.epsilon_schedule,
        config.minmax.to_options(),
        seed=config.seed,
    )
    for result in steps:
        record = diagnose_critical_point(result, mesh, ops, model, config, store)
        report.records.append(record)
        store.write_json("report", report)
        logger.info(
            f"eps={record.epsilon:g}: energy {record.energy:.6f}, index {record.index}, "
            f"level-set length {record.level_set_length:.4f}"
        )


def _run_entire(config: RunConfig, model: Model, store: ArtifactStore, report: RunReport) -> None:
    settings = config.entire
    lines = make_line_config(settings.angles, settings.offsets)
    if not lines.balanced:
        logger.warning(f"Line configuration {settings.angles} is unbalanced; refining anyway")
    R = settings.R if settings.R is not None else minimal_radius(lines)
    mesh = build_surface("planar_box", settings.resolution, {"half_width": settings.box})
    ops = assemble_operators(mesh)
    store.write_mesh("mesh", mesh)
    logger.info(
        f"Entire solution k={lines.k} on [-{settings.box:g}, {settings.box:g}]^2 "
        f"({mesh.n_vertices} vertices), R={R:.4f}"
    )

    u0 = approximate_solution(lines, model.profile, mesh, R)
    store.write_field("approximate_field", u0)
    newton = NewtonOptions(
        max_iters=config.minmax.newton_max_iters, damping=config.minmax.damping
    )
    refined = refine_entire(u0, ops, mesh, model.potential, config.minmax.residual_tol, newton)
    u = refined.solution
    store.write_field("entire_field", u)

    angle = settings.direction_angle
    verdict = index_lower_bound_check(
        u,
        ops,
        mesh,
        model.potential,
        lines.k,
        q=config.spectrum.q,
        tol=config.spectrum.tol,
        direction=(np.cos(angle), np.sin(angle)),
        nested=settings.nested or None,
    )
    store.write_json("index", verdict, kind="index")
    store.write_json("nodal", nodal_analysis(u.values, mesh), kind="nodal")

    center = nearest_vertex(mesh, (0.0, 0.0))
    density = density_ratio(
        u,
        ops,
        mesh,
        model.potential,
        center,
        settings.density_radii,
        config.varifold.monotonicity_m,
    )
    store.write_density("density_entire", density)

    curves = extract_level_set(u.values, mesh, 0.0)
    store.write_curves("levelset_entire", curves)
    try:
        junction = classify_junction(
            curves, (0.0, 0.0), settings.junction_probe, config.varifold.junction_threshold
        )
        store.write_json("junction", junction, kind="junction")
        junction_kind: Optional[str] = junction.kind
    except InsufficientRaysError as exc:
        logger.warning(f"Junction at the origin not classified: {exc}")
        junction_kind = None

    defect = None
    if settings.symmetry is not None:
        transform, parity = settings.symmetry
        defect = symmetry_defect(u, mesh, transform, parity)

    report.entire = EntireRecord(
        field_artifact="entire_field",
        k=lines.k,
        balanced=lines.balanced,
        R=R,
        box=settings.box,
        h_max=mesh.h_max,
        residual=refined.residual,
        newton_iterations=refined.iterations,
        index=verdict.index_computed,
        index_bound=verdict.bound,
        index_passed=verdict.passed,
        nullity=verdict.nullity,
        nested_half_widths=verdict.nested_half_widths,
        nested_indices=verdict.nested_indices,
        nodal_domains=verdict.nodal_domains,
        euler_consistent=verdict.euler_consistent,
        jacobi_sign_pattern=verdict.jacobi_sign_pattern,
        jacobi_changes_sign=bool(
            verdict.jacobi_positive_domains and verdict.jacobi_negative_domains
        ),
        density_ratio=float(density.ratios[-1]),
        density_radius=float(density.radii[-1]),
        density_core_deficit=density.core_deficit,
        asymptotic_density_ratio=density.asymptotic_ratio,
        junction=junction_kind,
        symmetry_defect=defect,
    )


def run_experiment(config: RunConfig) -> RunReport:
    """Run the configured experiment and write every artifact to config.output_dir.

    The report is rewritten after each completed step. On a library error it is saved with
    ``complete = false`` and the error message, and the error is re-raised.

    Args:
        config: Validated run configuration

    Returns:
        RunReport
    """
    digest = config_hash(config)
    store = ArtifactStore(config.output_dir, config_hash=digest)
    handler = attach_json_log(config.output_dir)
    store.write_json("config", config.model_dump(mode="json"), kind="config")

    report = RunReport(
        experiment=config.experiment,
        provenance=Provenance(
            config_hash=digest,
            package_version=__version__,
            numpy_version=np.__version__,
            scipy_version=scipy.__version__,
            potential=config.potential.name,
        ),
    )

    try:
        model = build_model(config)
        report.provenance.potential = model.potential.name
        report.provenance.sigma = model.constants.sigma
        report.provenance.h0 = model.constants.h0
        if config.experiment == "minmax":
            _run_minmax(config, model, store, report)
        else:
            _run_entire(config, model, store, report)
        report.complete = True
        logger.info(f"Run complete; artifacts in {config.output_dir}")
    except PhaseFieldError as exc:
        report.error = f"{type(exc).__name__}: {exc}"
        logger.error(f"Run aborted: {report.error}", exc_info=True)
        raise
    finally:
        store.write_json("report", report)
        store.save_manifest({"experiment": config.experiment, "complete": report.complete})
        detach_log(handler)
    return report


@dataclass
class StoredRun:
    """A finished run directory reopened for further diagnostics."""

    store: ArtifactStore
    config: RunConfig
    mesh: SurfaceMesh
    ops: DiscreteOperators
    model: Model

    def field(self, name: Optional[str] = None) -> PhaseField:
        """Named field, or the last one written (the finest epsilon or the entire solution)."""
        if name is None:
            fields = [n for n, e in self.store.entries.items() if e["kind"] == "field"]
            if not fields:
                raise ArtifactError(str(self.store.output_dir), "holds no field artifacts")
            name = fields[-1]
        u = self.store.read_field(name)
        if u.mesh_id != self.mesh.mesh_id:
            raise MeshMismatchError(self.mesh.mesh_id, u.mesh_id)
        return u


def load_run(run_dir: Union[str, Path]) -> StoredRun:
    """Reopen a run directory: stored config, rebuilt mesh and operators, model."""
    store = ArtifactStore(run_dir)
    config = stored_config(store)
    mesh = store.read_mesh("mesh")
    return StoredRun(
        store=store,
        config=config,
        mesh=mesh,
        ops=assemble_operators(mesh),
        model=build_model(config),
    )
