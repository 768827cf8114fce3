"""Half-line Jacobi coefficients from m-functions.

Moments are read off the Laurent expansion -m(z) = sum_k m_k z^(-k-1) and
turned into recurrence coefficients with the Chebyshev algorithm on the
mixed moments sigma(k, l).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from refless.core.config import get_settings
from refless.services.analysis import laurent_coefficients
from refless.services.moebius import HerglotzMap

logger = logging.getLogger(__name__)


class JacobiError(Exception):
    """Base error class for coefficient recovery."""

    exit_code: int = 3

    def __init__(self, message: str) -> None:
        super().__init__(message)
        self.message = message


class AliasingError(JacobiError):
    pass


class MomentBreakdownError(JacobiError):
    """The Hankel data stops being positive definite at working precision."""

    def __init__(self, message: str, safe_k: int, partial_b: Sequence[float] = ()) -> None:
        super().__init__(message)
        self.safe_k = safe_k
        self.partial_b = tuple(partial_b)


@dataclass(frozen=True)
class JacobiWindow:
    a: tuple[float, ...]
    b: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.a) != len(self.b):
            raise JacobiError(f"Window lengths differ: {len(self.a)} vs {len(self.b)}")
        if any(not value > 0 for value in self.a):
            raise JacobiError(f"Off-diagonal coefficients must be positive: {self.a}")

    def __len__(self) -> int:
        return len(self.a)

    def truncated(self, count: int) -> JacobiWindow:
        return JacobiWindow(a=self.a[:count], b=self.b[:count])


@dataclass(frozen=True)
class MomentSequence:
    m: tuple[float, ...]

    def __post_init__(self) -> None:
        if not self.m or not self.m[0] > 0:
            raise JacobiError(f"The zeroth moment must be positive, got {self.m[:1]}")

    @property
    def order(self) -> int:
        """Largest K with moments up to 2K."""
        return (len(self.m) - 1) // 2

    def hankel(self, size: int) -> np.ndarray:
        index = np.arange(size)
        return np.asarray(self.m, dtype=float)[index[:, None] + index[None, :]]


def hankel_condition(mom: MomentSequence, size: int) -> float:
    return float(np.linalg.cond(mom.hankel(size)))


def laurent_moments(
    F: HerglotzMap, radius: float, count: int, samples: int | None = None
) -> MomentSequence:
    """Moments m_0..m_2K of the measure behind F(z) = -1/z + O(1/z^2)."""

    max_k = get_settings().max_jacobi_k
    if count > max_k:
        raise JacobiError(f"K={count} exceeds the double precision cap {max_k}")
    orders = list(range(-2 * count - 1, 3))
    coeffs = laurent_coefficients(F.continuation, radius, orders, samples)
    size = abs(coeffs[-1]) / radius
    leak = max(abs(coeffs[k]) * radius**k for k in (0, 1, 2))
    if leak > 1e-8 * size:
        raise AliasingError(
            f"Non-decaying Laurent data on |z|={radius} (leak {leak:.2e}); enlarge the radius"
        )
    moments = tuple(-coeffs[-k - 1].real for k in range(2 * count + 1))
    logger.debug(f"moments on |z|={radius}: {moments}")
    return MomentSequence(moments)


def moments_to_jacobi(mom: MomentSequence, count: int) -> JacobiWindow:
    """Recurrence coefficients b_1..b_K, a_1..a_K from moments m_0..m_2K."""

    if mom.order < count:
        raise JacobiError(f"K={count} needs {2 * count + 1} moments, got {len(mom.m)}")
    cond_max = get_settings().hankel_cond_max
    for size in range(1, count + 2):
        condition = hankel_condition(mom, size)
        if not condition <= cond_max:
            raise MomentBreakdownError(
                f"Hankel matrix of size {size} has condition {condition:.2e}",
                safe_k=size - 2,
                partial_b=_alphas(mom, size - 1),
            )

    alpha, beta = _recurrence(mom, count)
    for k in range(1, count + 1):
        if not beta[k] > 0:
            raise MomentBreakdownError(
                f"Recurrence breaks down at n={k} (beta={beta[k]:.3e})",
                safe_k=k - 1,
                partial_b=alpha[:k],
            )
    return JacobiWindow(
        a=tuple(math.sqrt(value) for value in beta[1 : count + 1]),
        b=tuple(alpha[:count]),
    )


def _recurrence(mom: MomentSequence, count: int) -> tuple[list[float], list[float]]:
    """alpha_0..alpha_(K-1) and beta_0..beta_K by the Chebyshev algorithm."""

    m = [float(value) for value in mom.m[: 2 * count + 1]]
    top = 2 * count
    previous = [0.0] * (top + 1)
    current = list(m)
    alpha = [m[1] / m[0]] if count >= 1 else []
    beta = [m[0]]
    for k in range(1, count + 1):
        following = [0.0] * (top + 1)
        for l in range(k, top - k + 1):
            following[l] = (
                current[l + 1] - alpha[k - 1] * current[l] - beta[k - 1] * previous[l]
            )
        beta.append(following[k] / current[k - 1])
        if k < count:
            if following[k] == 0.0:
                alpha.append(math.nan)
            else:
                alpha.append(following[k + 1] / following[k] - current[k] / current[k - 1])
        previous, current = current, following
    return alpha, beta


def _alphas(mom: MomentSequence, count: int) -> tuple[float, ...]:
    if count <= 0:
        return ()
    alpha, _ = _recurrence(mom, count)
    return tuple(value for value in alpha[:count] if math.isfinite(value))


# Stripping ------------------------------------------------------------------


def strip_once(F: HerglotzMap, b1: float, a1: float) -> HerglotzMap:
    """m1(z) = (b1 - z - 1/F(z)) / a1^2."""

    if not a1 > 0:
        raise JacobiError(f"a1 must be positive to strip, got {a1}")

    def stripped(values: np.ndarray, z: np.ndarray) -> np.ndarray:
        return (b1 - z - 1.0 / values) / (a1 * a1)

    return HerglotzMap(
        lambda z: stripped(F.values(z), np.asarray(z, dtype=complex)),
        continued=lambda z: stripped(F.continuation(z), np.asarray(z, dtype=complex)),
        label=f"strip({F.label})",
    )


def prepend_coefficients(F: HerglotzMap, a0: float, b0: float) -> HerglotzMap:
    """Inverse of stripping: the m-function after adding (a0, b0) in front."""

    def prepended(values: np.ndarray, z: np.ndarray) -> np.ndarray:
        return 1.0 / (b0 - z - a0 * a0 * values)

    return HerglotzMap(
        lambda z: prepended(F.values(z), np.asarray(z, dtype=complex)),
        continued=lambda z: prepended(F.continuation(z), np.asarray(z, dtype=complex)),
        label=f"prepend({F.label})",
    )


def _direct_window(F: HerglotzMap, count: int, radius: float) -> JacobiWindow:
    a, b = [], []
    current = F
    for _ in range(count):
        mom = laurent_moments(current, radius, 1)
        m0, m1, m2 = mom.m
        b_n = m1 / m0
        variance = m2 / m0 - b_n * b_n
        if not variance > 0:
            break
        a_n = math.sqrt(variance)
        a.append(a_n)
        b.append(b_n)
        current = strip_once(current, b_n, a_n)
    return JacobiWindow(a=tuple(a), b=tuple(b))


def strip_coefficients(
    F: HerglotzMap, count: int, radius: float, cross_check: bool = True
) -> JacobiWindow:
    """Moments then recurrence; optionally compared against direct stripping."""

    window = moments_to_jacobi(laurent_moments(F, radius, count), count)
    if cross_check:
        try:
            direct = _direct_window(F, count, radius)
        except JacobiError as exc:
            logger.warning(f"Direct stripping failed: {exc.message}")
        else:
            deviation = max(
                (
                    max(abs(x - y), abs(u - v))
                    for x, y, u, v in zip(window.a, direct.a, window.b, direct.b)
                ),
                default=0.0,
            )
            if deviation > 1e-6:
                logger.warning(f"Moment and direct stripping differ by {deviation:.2e}")
    logger.info(f"Recovered Jacobi window a={window.a} b={window.b}")
    return window


# Reference functions --------------------------------------------------------


def free_m_values(z: np.ndarray) -> np.ndarray:
    """(-z + sqrt(z - 2) sqrt(z + 2)) / 2, holomorphic off [-2, 2]."""

    z = np.asarray(z, dtype=complex)
    return 0.5 * (-z + np.sqrt(z - 2.0) * np.sqrt(z + 2.0))


def free_m_function() -> HerglotzMap:
    return HerglotzMap(free_m_values, label="free")


def jacobi_resolvent(window: JacobiWindow, z: np.ndarray) -> np.ndarray:
    """m-function of the window continued by the free tail a_n = 1, b_n = 0."""

    z = np.asarray(z, dtype=complex)
    m = free_m_values(z)
    for a_n, b_n in zip(reversed(window.a), reversed(window.b)):
        m = 1.0 / (b_n - z - a_n * a_n * m)
    return m


def resolvent_map(window: JacobiWindow) -> HerglotzMap:
    return HerglotzMap(lambda z: jacobi_resolvent(window, z), label="resolvent")
