"""Double-well potentials: evaluation, hypothesis checks and interface constants."""

import logging
from typing import Dict, List, Optional, Union

import numpy as np
from numpy.polynomial import Polynomial
from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, field_validator
from scipy import integrate

from ..exceptions import (
    PhaseFieldInputError,
    PotentialEvaluationError,
    PotentialHypothesisError,
    QuadratureError,
)

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]

HYPOTHESES = ("H1", "H2", "H3", "H4")


class Potential(BaseModel):
    """Polynomial double-well potential W(t) = sum_k c_k t^k."""

    model_config = ConfigDict(frozen=True)

    name: str = Field(..., description="Identifier")
    coefficients: List[float] = Field(..., description="Coefficients in ascending powers of t")
    alpha: float = Field(0.2, gt=0.0, lt=1.0, description="Convexity radius")
    kappa: float = Field(0.9, gt=0.0, description="Convexity constant on |t| > 1 - alpha")

    _derivatives: List[Polynomial] = PrivateAttr(default_factory=list)

    @field_validator("coefficients")
    @classmethod
    def non_empty(cls, v):
        """Reject an empty coefficient list."""
        if not v:
            raise ValueError("coefficients must not be empty")
        return v

    def model_post_init(self, __context) -> None:
        poly = Polynomial(self.coefficients)
        self._derivatives = [poly, poly.deriv(1), poly.deriv(2)]

    def eval(self, t: ArrayLike, order: int = 0) -> ArrayLike:
        """Evaluate W, W' or W''.

        Args:
            t: Scalar or array of arguments
            order: Derivative order (0, 1 or 2)

        Returns:
            Value(s) with the shape of ``t``
        """
        if order not in (0, 1, 2):
            raise PhaseFieldInputError(f"Derivative order must be 0, 1 or 2, got {order}")
        with np.errstate(over="ignore", invalid="ignore"):
            values = self._derivatives[order](np.asarray(t, dtype=float))
        if not np.all(np.isfinite(values)):
            bad = np.asarray(t, dtype=float).ravel()[~np.isfinite(np.ravel(values))][0]
            raise PotentialEvaluationError(bad, order)
        if np.ndim(values) == 0:
            return float(values)
        return values

    def W(self, t: ArrayLike) -> ArrayLike:
        return self.eval(t, 0)

    def dW(self, t: ArrayLike) -> ArrayLike:
        return self.eval(t, 1)

    def d2W(self, t: ArrayLike) -> ArrayLike:
        return self.eval(t, 2)

    def scaled(self, c: float) -> "Potential":
        """Return the potential c^2 W."""
        factor = float(c) ** 2
        return Potential(
            name=f"{self.name}*{c:g}^2",
            coefficients=[factor * a for a in self.coefficients],
            alpha=self.alpha,
            kappa=factor * self.kappa,
        )


class HypothesisCheck(BaseModel):
    """Outcome of one sampled hypothesis."""

    hypothesis: str
    passed: bool
    worst_violation: float = Field(..., description="Largest sampled violation (<= tol passes)")
    at: Optional[float] = Field(None, description="Sample point of the worst violation")


class ValidationReport(BaseModel):
    """Per-hypothesis result of validate_potential."""

    potential: str
    grid_resolution: int
    tol: float
    checks: Dict[str, HypothesisCheck]

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks.values())

    def failed(self) -> List[str]:
        return [name for name, check in self.checks.items() if not check.passed]


class InterfaceConstants(BaseModel):
    """Surface tension of a potential."""

    sigma: float = Field(..., description="Integral of sqrt(2W) over [-1, 1]")
    h0: float = Field(..., description="Half of sigma")
    quadrature_error: float = Field(..., description="Estimated absolute quadrature error")


BUILTIN_POTENTIALS: Dict[str, Dict] = {
    "quartic": {
        "coefficients": [0.25, 0.0, -0.5, 0.0, 0.25],
        "alpha": 0.2,
        "kappa": 0.9,
    },
    # 1/4 (1 - t^2)^2 (1 + t^2)
    "sextic": {
        "coefficients": [0.25, 0.0, -0.25, 0.0, -0.25, 0.0, 0.25],
        "alpha": 0.2,
        "kappa": 0.6,
    },
}


def get_potential(
    name: str = "quartic",
    coefficients: Optional[List[float]] = None,
    alpha: Optional[float] = None,
    kappa: Optional[float] = None,
) -> Potential:
    """Build a built-in or coefficient-defined potential.

    Args:
        name: Built-in name, or a free label when coefficients are given
        coefficients: Polynomial coefficients in ascending powers
        alpha: Override of the convexity radius
        kappa: Override of the convexity constant

    Returns:
        Potential instance
    """
    if coefficients is None:
        if name not in BUILTIN_POTENTIALS:
            raise PhaseFieldInputError(
                f"Unknown potential '{name}'; choose one of {sorted(BUILTIN_POTENTIALS)} "
                "or supply coefficients"
            )
        params = dict(BUILTIN_POTENTIALS[name])
    else:
        params = {"coefficients": list(coefficients), "alpha": 0.2, "kappa": 0.9}

    if alpha is not None:
        params["alpha"] = alpha
    if kappa is not None:
        params["kappa"] = kappa
    return Potential(name=name, **params)


def _sample_grid(grid_resolution: int, sample_radius: float) -> np.ndarray:
    grid = np.linspace(-sample_radius, sample_radius, grid_resolution)
    return np.unique(np.concatenate([grid, -grid, [-1.0, 0.0, 1.0]]))


def _check(name: str, violations: np.ndarray, points: np.ndarray, tol: float) -> HypothesisCheck:
    if violations.size == 0:
        return HypothesisCheck(hypothesis=name, passed=True, worst_violation=0.0)
    i = int(np.argmax(violations))
    worst = float(violations[i])
    return HypothesisCheck(
        hypothesis=name, passed=worst <= tol, worst_violation=worst, at=float(points[i])
    )


def validate_potential(
    p: Potential,
    grid_resolution: int = 401,
    sample_radius: float = 2.0,
    tol: float = 1e-12,
) -> ValidationReport:
    """Check the double-well hypotheses on a symmetric sample grid.

    H1: W >= 0 and W(+-1) = 0. H2: t W'(t) < 0 on 0 < |t| < 1 and W''(0) != 0.
    H3: W'' >= kappa on |t| > 1 - alpha. H4: W even.

    Args:
        p: Potential to check
        grid_resolution: Number of uniform samples on [-sample_radius, sample_radius]
        sample_radius: Half-width of the sample interval (must exceed 1)
        tol: Absolute tolerance of every sampled inequality

    Returns:
        ValidationReport with one entry per hypothesis
    """
    if grid_resolution < 16:
        raise PhaseFieldInputError(f"grid_resolution must be >= 16, got {grid_resolution}")
    if sample_radius <= 1.0:
        raise PhaseFieldInputError("sample_radius must exceed 1")

    t = _sample_grid(grid_resolution, sample_radius)
    w = p.eval(t, 0)
    dw = p.eval(t, 1)
    d2w = p.eval(t, 2)

    wells = np.array([-1.0, 1.0])
    h1_points = np.concatenate([t, wells])
    h1_viol = np.concatenate([-w, np.abs(p.eval(wells, 0))])

    inner = (np.abs(t) > 0) & (np.abs(t) < 1)
    h2_points = np.concatenate([t[inner], [0.0]])
    h2_viol = np.concatenate([t[inner] * dw[inner], [tol + 1.0 if p.eval(0.0, 2) == 0 else 0.0]])

    outer = np.abs(t) > 1.0 - p.alpha
    h3_viol = p.kappa - d2w[outer]

    h4_viol = np.abs(w - p.eval(-t, 0))

    checks = {
        "H1": _check("H1", h1_viol, h1_points, tol),
        "H2": _check("H2", h2_viol, h2_points, tol),
        "H3": _check("H3", h3_viol, t[outer], tol),
        "H4": _check("H4", h4_viol, t, tol),
    }
    report = ValidationReport(
        potential=p.name, grid_resolution=grid_resolution, tol=tol, checks=checks
    )
    if report.passed:
        logger.info(f"Potential '{p.name}' satisfies H1-H4 on {t.size} samples")
    else:
        logger.warning(f"Potential '{p.name}' fails {report.failed()}")
    return report


def interface_constants(p: Potential, tol: float = 1e-12) -> InterfaceConstants:
    """Compute sigma = int_{-1}^{1} sqrt(2W) by adaptive quadrature, and h0 = sigma/2.

    Args:
        p: Potential; it is validated first
        tol: Absolute error target

    Returns:
        InterfaceConstants

    Raises:
        PotentialHypothesisError: p fails a hypothesis
    """
    report = validate_potential(p)
    if not report.passed:
        raise PotentialHypothesisError(p.name, report.failed())

    def integrand(t: float) -> float:
        return float(np.sqrt(2.0 * max(p.eval(t, 0), 0.0)))

    sigma, err, info = integrate.quad(
        integrand, -1.0, 1.0, epsabs=tol, epsrel=0.0, limit=200, full_output=1
    )[:3]
    if err > tol:
        raise QuadratureError(err, tol)
    logger.debug(f"sigma={sigma:.15f} (error {err:.2e}, {info['neval']} evaluations)")
    return InterfaceConstants(sigma=sigma, h0=sigma / 2.0, quadrature_error=err)
