"""Report models written by the pipeline and the report command."""

from typing import Dict, List, Optional

from pydantic import BaseModel, Field

from phasefield import SCHEMA_VERSION


class EpsilonRecord(BaseModel):
    """Diagnostics of the critical point found at one epsilon."""

    epsilon: float
    field_artifact: str = Field(..., description="Name of the field artifact in the manifest")
    energy: float = Field(..., description="Energy level of the critical point")
    residual: float = Field(..., description="M^-1 norm of the first variation")
    index: Optional[int] = None
    nullity: Optional[int] = None
    lowest_eigenvalues: List[float] = Field(default_factory=list)
    newton_iterations: int = 0
    minmax_iterations: int = 0
    level_set_length: Optional[float] = None
    level_set_curves: Optional[int] = None
    hausdorff_to_great_circle: Optional[float] = Field(
        None, description="Symmetric Hausdorff distance to the fitted great circle (sphere only)"
    )
    h_max: float
    xi_l1: Optional[float] = Field(None, description="L1 norm of the discrepancy")
    xi_l1_relative: Optional[float] = Field(None, description="xi L1 norm over the energy")
    density_ratios: Dict[str, float] = Field(
        default_factory=dict, description="Density ratio (normalized by 2 r sigma) per radius"
    )


class EntireRecord(BaseModel):
    """Diagnostics of the refined 2k-ended solution."""

    field_artifact: str
    k: int
    balanced: bool = Field(True, description="Whether the end directions sum to zero")
    R: float
    box: float
    h_max: float
    residual: float
    newton_iterations: int
    index: int
    index_bound: int
    index_passed: bool
    nullity: int
    nested_half_widths: Optional[List[float]] = None
    nested_indices: Optional[List[int]] = None
    nodal_domains: Optional[int] = None
    euler_consistent: Optional[bool] = None
    jacobi_sign_pattern: Optional[str] = None
    jacobi_changes_sign: Optional[bool] = Field(
        None, description="Whether the Jacobi field has positive and negative nodal domains"
    )
    density_ratio: Optional[float] = Field(None, description="Raw ratio at the largest radius")
    density_radius: Optional[float] = None
    density_core_deficit: Optional[float] = Field(
        None, description="c in ratio(r) ~ asymptotic ratio - c / r"
    )
    asymptotic_density_ratio: Optional[float] = None
    junction: Optional[str] = None
    symmetry_defect: Optional[float] = None


class Provenance(BaseModel):
    """Where a report came from."""

    config_hash: str
    package_version: str
    numpy_version: str
    scipy_version: str
    potential: str
    sigma: Optional[float] = None
    h0: Optional[float] = None
    normalization: str = Field(
        "sigma", description="Density ratios divide by 2 r sigma; h0 = sigma / 2 also reported"
    )


class RunReport(BaseModel):
    """Top-level report of one run."""

    schema_version: str = SCHEMA_VERSION
    experiment: str
    complete: bool = False
    error: Optional[str] = None
    provenance: Provenance
    records: List[EpsilonRecord] = Field(default_factory=list)
    entire: Optional[EntireRecord] = None


class AcceptanceCheck(BaseModel):
    """One threshold comparison."""

    name: str
    passed: bool
    value: Optional[float] = None
    expected: str = ""
    detail: str = ""


class AcceptanceReport(BaseModel):
    """All checks evaluated on a finished run."""

    run_dir: str
    checks: List[AcceptanceCheck] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    def failed(self) -> List[str]:
        return [check.name for check in self.checks if not check.passed]
