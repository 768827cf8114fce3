"""Shared numerical kernels: extrapolation, Laurent sampling, band quadrature."""

from __future__ import annotations

import logging
import math
from typing import Any, Callable, Sequence

import numpy as np
from numpy.typing import ArrayLike
from scipy import integrate

from refless.core.config import get_settings

logger = logging.getLogger(__name__)


def neville_extrapolate(steps: Sequence[float], values: Sequence[ArrayLike]) -> Any:
    """Value at step 0 of the interpolating polynomial through (steps, values).

    ``values`` may hold arrays of equal shape; extrapolation is then elementwise.
    """

    xs = [float(x) for x in steps]
    table = [np.asarray(v, dtype=complex) for v in values]
    if len(xs) != len(table) or not xs:
        raise ValueError("steps and values must be non-empty and of equal length")
    for level in range(1, len(xs)):
        for i in range(len(xs) - level):
            x_lo, x_hi = xs[i], xs[i + level]
            table[i] = (x_hi * table[i] - x_lo * table[i + 1]) / (x_hi - x_lo)
    result = table[0]
    return complex(result) if result.ndim == 0 else result


def richardson_limit(steps: Sequence[float], values: Sequence[ArrayLike], order: int = 1) -> Any:
    """Richardson extrapolation to zero from the finest ``order + 1`` rungs."""

    if len(steps) < order + 1:
        raise ValueError(f"Need at least {order + 1} rungs, got {len(steps)}")
    return neville_extrapolate(list(steps)[-(order + 1) :], list(values)[-(order + 1) :])


def boundary_value(
    func: Callable[[np.ndarray], np.ndarray],
    t: float,
    ladder: Sequence[float] | None = None,
) -> complex:
    """Extrapolated F(t + i0) along the epsilon ladder."""

    ladder = tuple(ladder or get_settings().eps_ladder)
    z = t + 1j * np.asarray(ladder, dtype=float)
    samples = np.asarray(func(z), dtype=complex)
    limit = richardson_limit(ladder, samples)
    logger.debug(f"boundary value at t={t}: ladder tail {samples[-1]}, limit {limit}")
    return limit


def boundary_values(
    func: Callable[[np.ndarray], np.ndarray],
    ts: np.ndarray,
    ladder: Sequence[float] | None = None,
) -> np.ndarray:
    """Vectorised :func:`boundary_value` over an array of real points."""

    ladder = tuple(ladder or get_settings().eps_ladder)[-2:]
    ts = np.asarray(ts, dtype=float)
    rungs = [np.asarray(func(ts + 1j * eps), dtype=complex) for eps in ladder]
    return np.asarray(richardson_limit(ladder, rungs), dtype=complex)


# Laurent sampling -----------------------------------------------------------


def circle_nodes(radius: float, samples: int) -> tuple[np.ndarray, np.ndarray]:
    """Half-step offset nodes on |z| = radius, avoiding the real axis."""

    theta = 2.0 * np.pi * (np.arange(samples) + 0.5) / samples
    return theta, radius * np.exp(1j * theta)


def laurent_coefficients(
    func: Callable[[np.ndarray], np.ndarray],
    radius: float,
    orders: Sequence[int],
    samples: int | None = None,
) -> dict[int, complex]:
    """Coefficients f_j of F(z) = sum_j f_j z^j on the annulus through |z| = radius.

    Trapezoidal sampling on the circle followed by an FFT; aliasing decays like
    (rho / radius)^samples when F is holomorphic on rho < |z| < infinity.
    """

    samples = samples or get_settings().laurent_samples
    theta, nodes = circle_nodes(radius, samples)
    values = np.asarray(func(nodes), dtype=complex)
    if not np.all(np.isfinite(values)):
        raise FloatingPointError("non-finite samples on the Laurent circle")
    spectrum = np.fft.fft(values) / samples
    coefficients: dict[int, complex] = {}
    for order in orders:
        shift = np.exp(-1j * np.pi * order / samples)
        coefficients[order] = complex(spectrum[order % samples] * shift) / radius**order
    return coefficients


# Quadrature -----------------------------------------------------------------


def _quad(func: Callable[[float], float], lo: float, hi: float, limit: int) -> float:
    value, error = integrate.quad(func, lo, hi, limit=limit, epsabs=1e-13, epsrel=1e-11)
    logger.debug(f"quad on [{lo}, {hi}] -> {value} (error estimate {error:.2e})")
    return value


def integrate_band(
    density: Callable[[float], float],
    lo: float,
    hi: float,
    limit: int | None = None,
) -> float:
    """Integrate a band density with inverse-square-root endpoint behaviour.

    Finite bands use t = lo + (hi - lo)(1 - cos theta)/2, which absorbs the
    singularities at both ends. Half-lines use t = edge +/- u^2 on the unit
    stretch next to the edge and scipy's infinite-range rule beyond it.
    """

    limit = limit or get_settings().quad_limit
    if math.isinf(lo) and math.isinf(hi):
        return _quad(density, -np.inf, np.inf, limit)
    if math.isinf(hi):
        near = _quad(lambda u: density(lo + u * u) * 2.0 * u, 0.0, 1.0, limit)
        return near + _quad(density, lo + 1.0, np.inf, limit)
    if math.isinf(lo):
        near = _quad(lambda u: density(hi - u * u) * 2.0 * u, 0.0, 1.0, limit)
        return near + _quad(density, -np.inf, hi - 1.0, limit)
    half_width = 0.5 * (hi - lo)
    return _quad(
        lambda theta: density(lo + half_width * (1.0 - math.cos(theta)))
        * half_width
        * math.sin(theta),
        0.0,
        math.pi,
        limit,
    )


def compactify(x: float) -> float:
    """Map the extended real line onto [-1, 1]."""

    if math.isinf(x):
        return math.copysign(1.0, x)
    return x / (1.0 + abs(x))


def decompactify(u: float) -> float:
    if abs(u) >= 1.0:
        return math.copysign(math.inf, u)
    return u / (1.0 - abs(u))
