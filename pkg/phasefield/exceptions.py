"""Error hierarchy.

Every error derives from ``PhaseFieldError`` and from the builtin that matches its nature:
``ValueError`` for bad input, ``RuntimeError`` for solver failures. The CLI maps the two
families onto exit codes 2 and 3.
"""

from typing import Any, List, Optional, Sequence

import numpy as np


class PhaseFieldError(Exception):
    """Base class for library errors."""


class PhaseFieldInputError(PhaseFieldError, ValueError):
    """Invalid input or configuration."""


class PhaseFieldSolverError(PhaseFieldError, RuntimeError):
    """A numerical procedure failed."""


class PotentialEvaluationError(PhaseFieldInputError):
    """Potential returned a non-finite value."""

    def __init__(self, t: float, order: int = 0):
        self.t = float(t)
        self.order = order
        super().__init__(f"Potential derivative of order {order} is not finite at t={t!r}")


class QuadratureError(PhaseFieldSolverError):
    """Adaptive quadrature did not reach the requested tolerance."""

    def __init__(self, achieved: float, tol: float):
        self.achieved = float(achieved)
        self.tol = float(tol)
        super().__init__(f"Quadrature error estimate {achieved:.3e} exceeds tolerance {tol:.3e}")


class PotentialHypothesisError(PhaseFieldInputError):
    """Potential fails one of the double-well hypotheses."""

    def __init__(self, name: str, failed: Sequence[str]):
        self.name = name
        self.failed = list(failed)
        super().__init__(f"Potential '{name}' fails {self.failed}")


class HeteroclinicError(PhaseFieldInputError):
    """The heteroclinic profile is undefined for this potential."""


class UnknownSurfaceKind(PhaseFieldInputError):
    """Requested surface kind is not supported."""


class DegenerateGeometry(PhaseFieldInputError):
    """Geometry parameters describe a degenerate surface."""


class DegenerateTriangleError(PhaseFieldInputError):
    """A mesh triangle has a near-zero angle."""

    def __init__(self, triangle: int, angle: float):
        self.triangle = int(triangle)
        self.angle = float(angle)
        super().__init__(f"Triangle {triangle} is degenerate (min angle {angle:.3e} rad)")


class UnsupportedKindError(PhaseFieldInputError):
    """Operation is not available for this surface kind."""

    def __init__(self, kind: str, operation: str):
        self.kind = kind
        super().__init__(f"{operation} is not supported for surface kind '{kind}'")


class MeshMismatchError(PhaseFieldInputError):
    """Field and operators live on different meshes."""

    def __init__(self, expected: str, actual: str):
        self.expected = expected
        self.actual = actual
        super().__init__(f"Field is defined on mesh {actual}, operators on mesh {expected}")


class NewtonConvergenceError(PhaseFieldSolverError):
    """Newton iteration stopped before reaching the tolerance."""

    def __init__(self, best_iterate: np.ndarray, residual: float, iterations: int):
        self.best_iterate = best_iterate
        self.residual = float(residual)
        self.iterations = iterations
        super().__init__(
            f"Newton did not converge after {iterations} iterations "
            f"(best residual {residual:.3e})"
        )


class NewtonDivergenceError(PhaseFieldSolverError):
    """Newton residual grew by more than an order of magnitude."""

    def __init__(self, iterate: np.ndarray, residuals: Sequence[float]):
        self.iterate = iterate
        self.residuals: List[float] = list(residuals)
        super().__init__(
            f"Newton diverged: residual {self.residuals[-1]:.3e} after "
            f"{len(self.residuals) - 1} iterations"
        )


class SingularSystemError(PhaseFieldSolverError):
    """Newton linear system could not be factorized."""

    def __init__(self, detail: str):
        super().__init__(
            f"Singular Newton system ({detail}); increase damping or the regularization shift"
        )


class DegenerateResultError(PhaseFieldSolverError):
    """Min-max collapsed to a constant state."""

    def __init__(self, level: float):
        self.level = float(level)
        super().__init__(f"Mountain pass collapsed to a constant state (level {level:.3e})")


class EigensolverError(PhaseFieldSolverError):
    """Eigensolver failed or returned inaccurate pairs."""

    def __init__(self, message: str, residuals: Optional[Sequence[float]] = None):
        self.residuals = list(residuals) if residuals is not None else []
        super().__init__(message)


class InsufficientRaysError(PhaseFieldInputError):
    """Too few curve rays leave the probe ball."""

    def __init__(self, count: int):
        self.count = count
        super().__init__(f"Only {count} ray(s) found near the probe point; need at least 2")


class SeparationError(PhaseFieldInputError):
    """Half-lines of a line configuration are too close."""

    def __init__(self, pair: tuple, distance: float, minimal_radius: Optional[float]):
        self.pair = pair
        self.distance = float(distance)
        self.minimal_radius = minimal_radius
        super().__init__(
            f"Half-lines {pair[0]} and {pair[1]} are {distance:.3f} apart (need 4); "
            f"minimal radius is {minimal_radius}"
        )


class DegenerateFieldError(PhaseFieldInputError):
    """Field vanishes identically."""

    def __init__(self, max_abs: float):
        self.max_abs = float(max_abs)
        super().__init__(f"Field is identically zero within tolerance (max |v| = {max_abs:.3e})")


class ConfigValidationError(PhaseFieldInputError):
    """Run configuration failed validation."""

    def __init__(self, errors: Any):
        self.errors = errors
        super().__init__(f"Invalid run configuration: {errors}")


class ArtifactError(PhaseFieldInputError):
    """Artifact missing, unreadable or written under another schema version."""

    def __init__(self, path: str, detail: str):
        self.path = path
        super().__init__(f"Artifact {path}: {detail}")
