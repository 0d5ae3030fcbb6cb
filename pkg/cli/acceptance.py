"""Acceptance checks on a finished run directory."""

import logging
import math
from pathlib import Path
from typing import List, Optional, Union

from phasefield.io.artifacts import ArtifactStore

from .config import AcceptanceSettings, RunConfig, stored_config
from .models import AcceptanceCheck, AcceptanceReport, EntireRecord, EpsilonRecord, RunReport

logger = logging.getLogger(__name__)


def _within(name: str, value: Optional[float], low: float, high: float) -> AcceptanceCheck:
    passed = value is not None and low <= value <= high
    return AcceptanceCheck(name=name, passed=passed, value=value, expected=f"[{low:g}, {high:g}]")


def _at_most(name: str, value: Optional[float], limit: float) -> AcceptanceCheck:
    passed = value is not None and value <= limit
    return AcceptanceCheck(name=name, passed=passed, value=value, expected=f"<= {limit:g}")


def _raw_density(
    record: EntireRecord, low: float, high: float, deficit_max: float
) -> AcceptanceCheck:
    """Raw ratio at the largest radius, allowing a bounded core deficit c / r."""
    ratio, r, c = record.density_ratio, record.density_radius, record.density_core_deficit
    passed = False
    if None not in (ratio, r, c):
        passed = 0.0 <= c <= deficit_max and low <= ratio + c / r <= high
    return AcceptanceCheck(
        name="raw_density",
        passed=passed,
        value=ratio,
        expected=f"ratio + c / r in [{low:g}, {high:g}] with 0 <= c <= {deficit_max:g}",
        detail=f"r={r}, c={c}",
    )


def minmax_checks(
    records: List[EpsilonRecord], config: RunConfig, sigma: float, limits: AcceptanceSettings
) -> List[AcceptanceCheck]:
    if not records:
        return [AcceptanceCheck(name="records", passed=False, detail="no epsilon records")]
    final = records[-1]
    checks = [
        _at_most("residual", final.residual, limits.residual_max),
        AcceptanceCheck(
            name="index",
            passed=final.index in limits.index_allowed,
            value=final.index,
            expected=f"in {limits.index_allowed}",
        ),
    ]

    if config.surface.kind == "sphere":
        radius = float(config.surface.params.get("radius", 1.0))
        target = sigma * 2.0 * math.pi * radius
        checks.append(
            _within(
                "energy_vs_great_circle",
                final.energy,
                target * (1.0 - limits.energy_rel_tol),
                target * (1.0 + limits.energy_rel_tol),
            )
        )
        checks.append(
            _at_most(
                "great_circle_hausdorff",
                final.hausdorff_to_great_circle,
                limits.hausdorff_factor * final.h_max,
            )
        )

    relative = [r.xi_l1_relative for r in records]
    if len(records) > 1 and None not in relative:
        decreasing = all(b < a for a, b in zip(relative, relative[1:]))
        checks.append(
            AcceptanceCheck(
                name="discrepancy_decreasing",
                passed=decreasing,
                value=relative[-1],
                expected="strictly decreasing over the schedule",
                detail=", ".join(f"{v:.4g}" for v in relative),
            )
        )
    return checks


def entire_checks(record: EntireRecord, limits: AcceptanceSettings) -> List[AcceptanceCheck]:
    checks = [
        _at_most("residual", record.residual, limits.residual_max),
        AcceptanceCheck(
            name="index_lower_bound",
            passed=record.index_passed,
            value=record.index,
            expected=f">= {record.index_bound}",
        ),
        AcceptanceCheck(
            name="euler_consistent",
            passed=bool(record.euler_consistent),
            value=record.nodal_domains,
            expected="q = 1 + C - |S|",
        ),
        AcceptanceCheck(
            name="jacobi_nodal_domains",
            passed=record.nodal_domains is not None and record.nodal_domains >= 2,
            value=record.nodal_domains,
            expected=">= 2",
            detail=f"k={record.k}",
        ),
        AcceptanceCheck(
            name="jacobi_changes_sign",
            passed=bool(record.jacobi_changes_sign),
            expected="positive and negative nodal domains",
            detail=record.jacobi_sign_pattern or "",
        ),
    ]
    if record.nested_indices:
        nested = record.nested_indices
        checks.append(
            AcceptanceCheck(
                name="nested_index_monotone",
                passed=all(b >= a for a, b in zip(nested, nested[1:])),
                expected="nondecreasing in the box size",
                detail=str(nested),
            )
        )
    if record.k == 2:
        low, high = limits.density_range
        checks.append(_within("asymptotic_density", record.asymptotic_density_ratio, low, high))
        checks.append(_raw_density(record, low, high, limits.core_deficit_max))
        checks.append(
            AcceptanceCheck(
                name="junction",
                passed=record.junction == "transverse_crossing",
                expected="transverse_crossing",
                detail=str(record.junction),
            )
        )
    return checks


def evaluate_acceptance(
    run_dir: Union[str, Path], limits: Optional[AcceptanceSettings] = None
) -> AcceptanceReport:
    """Evaluate acceptance thresholds on the report and config stored in a run directory.

    Args:
        run_dir: Output directory of a finished run
        limits: Thresholds; default the acceptance block of the stored config

    Returns:
        AcceptanceReport
    """
    store = ArtifactStore(run_dir)
    config = stored_config(store)
    report_doc = store.read_json("report")
    report = RunReport.model_validate({k: v for k, v in report_doc.items() if k != "config_hash"})
    limits = limits or config.acceptance

    checks = [
        AcceptanceCheck(
            name="complete", passed=report.complete, expected="true", detail=report.error or ""
        )
    ]
    if report.experiment == "minmax":
        checks += minmax_checks(report.records, config, report.provenance.sigma or 0.0, limits)
    elif report.entire is not None:
        checks += entire_checks(report.entire, limits)
    else:
        checks.append(AcceptanceCheck(name="entire", passed=False, detail="no entire record"))

    result = AcceptanceReport(run_dir=str(run_dir), checks=checks)
    store.write_json("acceptance", result.model_dump(mode="json"), kind="acceptance")
    previous = store.load_manifest()
    store.save_manifest({k: previous[k] for k in ("experiment", "complete") if k in previous})
    log = logger.info if result.passed else logger.warning
    log(f"Acceptance: {len(checks) - len(result.failed())}/{len(checks)} passed {result.failed()}")
    return result
