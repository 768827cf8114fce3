"""Riemann sphere geometry, PSL(2, R) elements and (generalized) Herglotz maps.

Sphere points are plain Python complex numbers plus the :data:`INFINITY` marker.
Vectorised code paths use complex numpy arrays in which any non-finite entry
stands for the point at infinity; :func:`to_sphere_point` converts back.
"""

from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from refless.core.config import get_settings

logger = logging.getLogger(__name__)


class MoebiusError(Exception):
    """Base error class for sphere and group operations."""

    exit_code: int = 3

    def __init__(self, message: str) -> None:
        super().__init__(message)
        self.message = message


class DegenerateMatrix(MoebiusError):
    pass


class _PointAtInfinity:
    __slots__ = ()

    def __repr__(self) -> str:
        return "INFINITY"

    def __reduce__(self) -> str:
        return "INFINITY"


INFINITY = _PointAtInfinity()
"""The point at infinity of the Riemann sphere."""

SpherePoint = Union[complex, _PointAtInfinity]
ArrayFunction = Callable[[np.ndarray], np.ndarray]


def is_infinite(point: object) -> bool:
    if point is INFINITY:
        return True
    if isinstance(point, (int, float, complex)):
        value = complex(point)
        return math.isinf(value.real) or math.isinf(value.imag)
    return False


def to_sphere_point(value: object) -> SpherePoint:
    """Normalise a number (or the marker) into a sphere point."""

    if value is INFINITY:
        return INFINITY
    number = complex(value)  # type: ignore[arg-type]
    if math.isinf(number.real) or math.isinf(number.imag):
        return INFINITY
    if math.isnan(number.real) or math.isnan(number.imag):
        raise MoebiusError(f"Not a point of the sphere: {value!r}")
    return number


def to_array_value(point: SpherePoint) -> complex:
    return complex(np.inf, 0.0) if point is INFINITY else complex(point)


# Chordal metric -------------------------------------------------------------


def chordal_distance(p: SpherePoint, q: SpherePoint) -> float:
    """Chordal distance on the sphere of diameter 2."""

    p = to_sphere_point(p)
    q = to_sphere_point(q)
    if p is INFINITY and q is INFINITY:
        return 0.0
    if p is INFINITY:
        return 2.0 / math.sqrt(1.0 + abs(q) ** 2)
    if q is INFINITY:
        return 2.0 / math.sqrt(1.0 + abs(p) ** 2)
    return 2.0 * abs(p - q) / math.sqrt((1.0 + abs(p) ** 2) * (1.0 + abs(q) ** 2))


def chordal_distance_array(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    p = np.asarray(p, dtype=complex)
    q = np.asarray(q, dtype=complex)
    p, q = np.broadcast_arrays(p, q)
    p_inf = ~np.isfinite(p)
    q_inf = ~np.isfinite(q)
    p_fin = np.where(p_inf, 0.0, p)
    q_fin = np.where(q_inf, 0.0, q)
    norm_p = np.sqrt(1.0 + np.abs(p_fin) ** 2)
    norm_q = np.sqrt(1.0 + np.abs(q_fin) ** 2)
    result = 2.0 * np.abs(p_fin - q_fin) / (norm_p * norm_q)
    result = np.where(p_inf & ~q_inf, 2.0 / norm_q, result)
    result = np.where(q_inf & ~p_inf, 2.0 / norm_p, result)
    result = np.where(p_inf & q_inf, 0.0, result)
    return result


# PSL(2, R) ------------------------------------------------------------------


@dataclass(frozen=True)
class MoebiusElement:
    """Real 2x2 matrix of determinant one, modulo sign.

    Construction rescales any matrix with positive determinant and flips the
    sign so that the first nonzero entry in row-major order is positive.
    """

    m11: float
    m12: float
    m21: float
    m22: float

    def __post_init__(self) -> None:
        entries = [float(self.m11), float(self.m12), float(self.m21), float(self.m22)]
        if not all(math.isfinite(entry) for entry in entries):
            raise DegenerateMatrix(f"Matrix entries must be finite: {entries}")
        det = entries[0] * entries[3] - entries[1] * entries[2]
        if det <= 0.0:
            raise DegenerateMatrix(
                f"PSL(2,R) needs a positive determinant, got {det:.3g}"
            )
        scale = 1.0 / math.sqrt(det)
        entries = [entry * scale for entry in entries]
        leading = next(entry for entry in entries if entry != 0.0)
        if leading < 0.0:
            entries = [-entry for entry in entries]
        for name, entry in zip(("m11", "m12", "m21", "m22"), entries):
            object.__setattr__(self, name, entry)

    @classmethod
    def identity(cls) -> MoebiusElement:
        return cls(1.0, 0.0, 0.0, 1.0)

    @classmethod
    def from_matrix(cls, matrix: np.ndarray) -> MoebiusElement:
        matrix = np.asarray(matrix, dtype=float)
        return cls(matrix[0, 0], matrix[0, 1], matrix[1, 0], matrix[1, 1])

    @classmethod
    def rotation(cls, alpha: float) -> MoebiusElement:
        return cls(math.cos(alpha), -math.sin(alpha), math.sin(alpha), math.cos(alpha))

    @classmethod
    def translation(cls, shift: float) -> MoebiusElement:
        """w -> w + shift."""
        return cls(1.0, shift, 0.0, 1.0)

    @classmethod
    def inversion(cls) -> MoebiusElement:
        """w -> -1/w."""
        return cls(0.0, -1.0, 1.0, 0.0)

    @classmethod
    def dilation(cls, factor: float) -> MoebiusElement:
        """w -> factor * w for factor > 0."""
        if factor <= 0:
            raise DegenerateMatrix(f"Dilation factor must be positive, got {factor}")
        root = math.sqrt(factor)
        return cls(root, 0.0, 0.0, 1.0 / root)

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.m11, self.m12], [self.m21, self.m22]])

    @property
    def det(self) -> float:
        return self.m11 * self.m22 - self.m12 * self.m21

    @property
    def fixes_infinity(self) -> bool:
        return self.m21 == 0.0

    def isclose(self, other: MoebiusElement, tol: float = 1e-12) -> bool:
        mine = self.matrix
        theirs = other.matrix
        return bool(
            np.max(np.abs(mine - theirs)) <= tol or np.max(np.abs(mine + theirs)) <= tol
        )

    def __matmul__(self, other: MoebiusElement) -> MoebiusElement:
        return mobius_compose(self, other)

    def __call__(self, point: SpherePoint) -> SpherePoint:
        return mobius_apply(self, point)

    def apply_array(self, values: np.ndarray) -> np.ndarray:
        """Vectorised action; non-finite entries are the point at infinity."""

        values = np.asarray(values, dtype=complex)
        infinite = ~np.isfinite(values)
        finite = np.where(infinite, 0.0, values)
        numerator = self.m11 * finite + self.m12
        denominator = self.m21 * finite + self.m22
        with np.errstate(divide="ignore", invalid="ignore"):
            result = numerator / denominator
        result = np.where(denominator == 0, complex(np.inf, 0.0), result)
        image_of_infinity = (
            complex(np.inf, 0.0) if self.m21 == 0.0 else complex(self.m11 / self.m21)
        )
        return np.where(infinite, image_of_infinity, result)

    def entries(self) -> tuple[float, float, float, float]:
        return (self.m11, self.m12, self.m21, self.m22)


def mobius_apply(A: MoebiusElement, point: SpherePoint) -> SpherePoint:
    """Act projectively on the vector (p, 1), or (1, 0) for infinity."""

    point = to_sphere_point(point)
    if point is INFINITY:
        upper, lower = complex(A.m11), complex(A.m21)
    else:
        upper = A.m11 * point + A.m12
        lower = A.m21 * point + A.m22
    if lower == 0:
        return INFINITY
    return upper / lower


def mobius_compose(A: MoebiusElement, B: MoebiusElement) -> MoebiusElement:
    return MoebiusElement.from_matrix(A.matrix @ B.matrix)


def mobius_invert(A: MoebiusElement) -> MoebiusElement:
    return MoebiusElement(A.m22, -A.m12, -A.m21, A.m11)


# KAN coordinates ------------------------------------------------------------


@dataclass(frozen=True)
class KanCoordinates:
    """(a + i c^2, e^{2 i alpha}) for A = [[c, a/c], [0, 1/c]] . rotation(alpha).

    ``point`` is the image of i under A, so its imaginary part is c^2.
    """

    point: complex
    angle: complex

    def __post_init__(self) -> None:
        if not self.point.imag > 0:
            raise MoebiusError(f"KAN point must lie in the upper half plane: {self.point}")
        if abs(abs(self.angle) - 1.0) > 1e-12:
            raise MoebiusError(f"KAN angle must be unimodular: {self.angle}")

    @property
    def c(self) -> float:
        return math.sqrt(self.point.imag)

    @property
    def a(self) -> float:
        return self.point.real

    @property
    def alpha(self) -> float:
        return cmath.phase(self.angle) / 2.0


def kan_decompose(A: MoebiusElement) -> KanCoordinates:
    point = mobius_apply(A, 1j)
    assert point is not INFINITY
    c = math.sqrt(point.imag)
    a = point.real
    upper = np.array([[c, a / c], [0.0, 1.0 / c]])
    rotation = np.linalg.solve(upper, A.matrix)
    alpha = math.atan2(rotation[1, 0], rotation[0, 0])
    angle = cmath.exp(2j * alpha)
    return KanCoordinates(point=complex(point), angle=angle / abs(angle))


def kan_compose(k: KanCoordinates) -> MoebiusElement:
    c, a = k.c, k.a
    upper = np.array([[c, a / c], [0.0, 1.0 / c]])
    return MoebiusElement.from_matrix(upper @ MoebiusElement.rotation(k.alpha).matrix)


# Herglotz maps --------------------------------------------------------------


class HerglotzMap:
    """Evaluable map from the upper half plane into its closure on the sphere.

    ``func`` works on complex numpy arrays. ``continued`` optionally evaluates the
    analytic continuation used for Laurent sampling around infinity; it defaults
    to ``func``. Constant (generalized) maps carry their value in ``constant``.
    """

    def __init__(
        self,
        func: ArrayFunction,
        *,
        continued: ArrayFunction | None = None,
        constant: SpherePoint | None = None,
        label: str = "",
    ) -> None:
        self._func = func
        self._continued = continued or func
        self.constant = None if constant is None else to_sphere_point(constant)
        self.label = label

    @classmethod
    def constant_map(cls, value: SpherePoint) -> HerglotzMap:
        point = to_sphere_point(value)
        if point is not INFINITY and point.imag != 0.0:
            raise MoebiusError(f"Constant Herglotz maps take real values, got {value}")
        fill = to_array_value(point)

        def _constant(z: np.ndarray) -> np.ndarray:
            return np.full(np.shape(z), fill, dtype=complex)

        return cls(_constant, constant=point, label=f"const:{point}")

    @classmethod
    def from_function(cls, func: Callable[[complex], complex], label: str = "") -> HerglotzMap:
        """Wrap a scalar callable (vectorised with numpy.vectorize)."""

        vectorised = np.vectorize(lambda z: complex(func(z)), otypes=[complex])
        return cls(vectorised, label=label)

    @property
    def is_constant(self) -> bool:
        return self.constant is not None

    def values(self, z: np.ndarray) -> np.ndarray:
        return np.asarray(self._func(np.asarray(z, dtype=complex)), dtype=complex)

    def continuation(self, z: np.ndarray) -> np.ndarray:
        return np.asarray(self._continued(np.asarray(z, dtype=complex)), dtype=complex)

    def __call__(self, z: complex) -> SpherePoint:
        value = self.values(np.array([z], dtype=complex))[0]
        return to_sphere_point(value)

    def transformed(self, A: MoebiusElement) -> HerglotzMap:
        """The pointwise image z -> A(F(z))."""

        if self.constant is not None:
            return HerglotzMap.constant_map(mobius_apply(A, self.constant))
        return HerglotzMap(
            lambda z: A.apply_array(self.values(z)),
            continued=lambda z: A.apply_array(self.continuation(z)),
            label=f"A*{self.label}",
        )


def metric_grid(grid_n: int) -> np.ndarray:
    """Centre plus grid_n radii times grid_n angles covering |z - 2i| <= 1.

    Doubling grid_n yields a superset of points, so the sampled maximum only
    grows under that refinement.
    """

    radii = np.arange(1, grid_n + 1) / grid_n
    angles = 2.0 * np.pi * np.arange(grid_n) / grid_n
    ring = (radii[:, None] * np.exp(1j * angles)[None, :]).ravel()
    return 2j + np.concatenate([[0.0], ring])


def herglotz_metric(F: HerglotzMap, G: HerglotzMap, grid_n: int | None = None) -> float:
    grid_n = grid_n or get_settings().metric_grid_n
    if grid_n < 8:
        raise MoebiusError(f"grid_n must be at least 8, got {grid_n}")
    if F.is_constant and G.is_constant:
        return chordal_distance(F.constant, G.constant)
    grid = metric_grid(grid_n)
    distances = chordal_distance_array(F.values(grid), G.values(grid))
    return float(np.max(distances))
