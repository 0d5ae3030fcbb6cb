"""One-dimensional heteroclinic profile H' = sqrt(2 W(H)), H(0) = 0.

The profile is integrated outward from s = 0 with classical RK4. Near a well the ODE is
singular in H, so once |H| > 1 - alpha the integration switches to psi = log(1 - |H|). With
W(1 - d) = d^2 R(d) the tail equation is psi' = -sqrt(2 R(exp(psi))), which is smooth and tends
to the linearized decay rate sqrt(W''(1)).
"""

import logging
from dataclasses import dataclass, field
from typing import Tuple, Union

import numpy as np
import pandas as pd
from numpy.polynomial import Polynomial
from scipy.integrate import trapezoid
from scipy.interpolate import CubicHermiteSpline

from ..exceptions import HeteroclinicError, PhaseFieldInputError
from .potential import Potential

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]

INVERSE_CLIP = 1.0 - 1e-15


def _as_1d(x: ArrayLike) -> Tuple[np.ndarray, bool]:
    arr = np.asarray(x, dtype=float)
    return np.atleast_1d(arr).astype(float, copy=True), arr.ndim == 0


def _restore(out: np.ndarray, scalar: bool) -> ArrayLike:
    return float(out[0]) if scalar else out


@dataclass(frozen=True)
class HeteroclinicProfile:
    """Tabulated heteroclinic profile with exponential tails."""

    potential_name: str
    grid: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    derivative: np.ndarray = field(repr=False)
    tail_rate: float
    # 1 - |H| at the right and left grid ends
    tail_gap: Tuple[float, float]
    _spline: CubicHermiteSpline = field(repr=False, compare=False)

    @property
    def half_width(self) -> float:
        return float(self.grid[-1])

    def __call__(self, s: ArrayLike) -> ArrayLike:
        return eval_profile(self, s)

    def slope(self, s: ArrayLike) -> ArrayLike:
        """H'(s), including the exponential tails."""
        s_arr, scalar = _as_1d(s)
        S = self.half_width
        out = np.empty_like(s_arr)
        inside = np.abs(s_arr) <= S
        out[inside] = self._spline(s_arr[inside], nu=1)
        right = s_arr > S
        left = s_arr < -S
        rate = self.tail_rate
        out[right] = rate * self.tail_gap[0] * np.exp(-rate * (s_arr[right] - S))
        out[left] = rate * self.tail_gap[1] * np.exp(-rate * (-S - s_arr[left]))
        return _restore(out, scalar)

    def inverse(self, y: ArrayLike) -> ArrayLike:
        """Return s with H(s) = y; values with |y| >= 1 are clipped just inside (-1, 1)."""
        y_arr, scalar = _as_1d(y)
        y_arr = np.clip(y_arr, -INVERSE_CLIP, INVERSE_CLIP)
        S = self.half_width
        s = np.interp(y_arr, self.values, self.grid)

        right = y_arr > self.values[-1]
        left = y_arr < self.values[0]
        s[right] = S + np.log(self.tail_gap[0] / (1.0 - y_arr[right])) / self.tail_rate
        s[left] = -S - np.log(self.tail_gap[1] / (1.0 + y_arr[left])) / self.tail_rate

        inside = ~(right | left)
        for _ in range(3):
            slope = self._spline(s[inside], nu=1)
            s[inside] -= (self._spline(s[inside]) - y_arr[inside]) / slope
            s[inside] = np.clip(s[inside], -S, S)
        return _restore(s, scalar)


def _well_remainder(p: Potential, sign: float) -> Polynomial:
    """R with W(sign * (1 - d)) = d^2 R(d)."""
    shifted = Polynomial(p.coefficients)(Polynomial([sign, -sign]))
    coef = shifted.coef
    if coef.size < 3:
        raise HeteroclinicError("Potential has no quadratic well at t = +-1")
    if abs(coef[0]) > 1e-12 or abs(coef[1]) > 1e-12:
        raise HeteroclinicError(f"Potential does not vanish to second order at t = {sign:+.0f}")
    return Polynomial(coef[2:])


def _rk4(f, y0: float, h: float, n: int, stop=None) -> np.ndarray:
    ys = np.empty(n + 1)
    ys[0] = y0
    y = y0
    for i in range(n):
        k1 = f(y)
        k2 = f(y + 0.5 * h * k1)
        k3 = f(y + 0.5 * h * k2)
        k4 = f(y + h * k3)
        y = y + h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
        ys[i + 1] = y
        if stop is not None and stop(y):
            return ys[: i + 2]
    return ys


def _half_profile(p: Potential, sign: float, h: float, n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Integrate y = sign * H(sign * tau) for tau = 0..n*h; returns (gap 1 - y, slope)."""
    switch = 1.0 - p.alpha

    def core(y: float) -> float:
        return np.sqrt(2.0 * max(p.eval(sign * y, 0), 0.0))

    remainder = _well_remainder(p, sign)
    ys = _rk4(core, 0.0, h, n, stop=lambda y: y > switch)
    if ys.size == n + 1 and ys[-1] <= switch:
        gap = 1.0 - ys
    else:

        def tail(psi: float) -> float:
            return -np.sqrt(2.0 * max(remainder(np.exp(psi)), 0.0))

        m = ys.size - 1
        psis = _rk4(tail, np.log(1.0 - ys[-1]), h, n - m)
        gap = np.concatenate([1.0 - ys[:-1], np.exp(psis)])

    near = gap < p.alpha
    slope = np.empty_like(gap)
    slope[near] = gap[near] * np.sqrt(2.0 * np.maximum(remainder(gap[near]), 0.0))
    slope[~near] = np.sqrt(2.0 * np.maximum(p.eval(sign * (1.0 - gap[~near]), 0), 0.0))
    return gap, slope


def solve_heteroclinic(
    p: Potential, half_width: float = 12.0, step: float = 0.005
) -> HeteroclinicProfile:
    """Tabulate the heteroclinic profile on [-half_width, half_width].

    Args:
        p: Validated double-well potential
        half_width: Grid half-width S (>= 5)
        step: Integration step (<= 0.01); adjusted down so S is a whole number of steps

    Returns:
        HeteroclinicProfile
    """
    if half_width < 5.0:
        raise PhaseFieldInputError(f"half_width must be >= 5, got {half_width}")
    if step > 0.01 or step <= 0.0:
        raise PhaseFieldInputError(f"step must lie in (0, 0.01], got {step}")

    interior = np.linspace(-1.0, 1.0, 4001)[1:-1]
    w = p.eval(interior, 0)
    if np.any(w <= 0.0):
        zeros = interior[w <= 0.0]
        raise HeteroclinicError(
            f"W vanishes inside (-1, 1) near t={zeros[0]:.4f}; no heteroclinic connection"
        )

    n = int(np.ceil(half_width / step))
    h = half_width / n
    tau = np.arange(n + 1) * h

    gap_pos, slope_pos = _half_profile(p, 1.0, h, n)
    gap_neg, slope_neg = _half_profile(p, -1.0, h, n)

    grid = np.concatenate([-tau[:0:-1], tau])
    values = np.concatenate([-(1.0 - gap_neg[:0:-1]), 1.0 - gap_pos])
    derivative = np.concatenate([slope_neg[:0:-1], slope_pos])
    values[n] = 0.0

    fit = tau >= 0.75 * half_width
    rates = [-np.polyfit(tau[fit], np.log(g[fit]), 1)[0] for g in (gap_pos, gap_neg)]
    tail_rate = float(np.mean(rates))

    spline = CubicHermiteSpline(grid, values, derivative)
    profile = HeteroclinicProfile(
        potential_name=p.name,
        grid=grid,
        values=values,
        derivative=derivative,
        tail_rate=tail_rate,
        tail_gap=(float(gap_pos[-1]), float(gap_neg[-1])),
        _spline=spline,
    )
    logger.info(
        f"Heteroclinic profile for '{p.name}': {grid.size} samples on [-{half_width}, "
        f"{half_width}], tail rate {tail_rate:.6f}, end gap {gap_pos[-1]:.2e}"
    )
    return profile


def eval_profile(h: HeteroclinicProfile, s: ArrayLike) -> ArrayLike:
    """Evaluate H(s): Hermite cubic inside the grid, exponential tails outside.

    Args:
        h: Heteroclinic profile
        s: Scalar or array of arguments

    Returns:
        H(s) with the shape of ``s``
    """
    s_arr, scalar = _as_1d(s)
    S = h.half_width
    out = np.empty_like(s_arr)
    inside = np.abs(s_arr) <= S
    out[inside] = h._spline(s_arr[inside])
    right = s_arr > S
    left = s_arr < -S
    out[right] = 1.0 - h.tail_gap[0] * np.exp(-h.tail_rate * (s_arr[right] - S))
    out[left] = -1.0 + h.tail_gap[1] * np.exp(-h.tail_rate * (-S - s_arr[left]))
    return _restore(out, scalar)


def profile_energy(h: HeteroclinicProfile) -> float:
    """Integral of H'^2 over the real line: trapezoid on the grid plus both exponential tails."""
    core = trapezoid(h.derivative**2, h.grid)
    tails = 0.5 * h.tail_rate * (h.tail_gap[0] ** 2 + h.tail_gap[1] ** 2)
    return float(core + tails)


def profile_table(h: HeteroclinicProfile) -> pd.DataFrame:
    """Profile samples as a table with columns s, H, Hprime."""
    return pd.DataFrame({"s": h.grid, "H": h.values, "Hprime": h.derivative})


def periodic_band_values(
    x: np.ndarray, period: float, epsilon: float, h: HeteroclinicProfile
) -> np.ndarray:
    """Two-interface periodic band: positive for |x| < period/4 (x taken modulo period)."""
    wrapped = (np.asarray(x, dtype=float) + 0.5 * period) % period - 0.5 * period
    return eval_profile(h, (0.25 * period - np.abs(wrapped)) / epsilon)
