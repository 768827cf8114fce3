"""PSL(2, R) action on systems and the orbit normal forms.

The action is pointwise on m-functions: m_plus goes to A(m_plus) and -m_minus
to A(-m_minus). Elements fixing infinity act affinely on Z = A_plus + iD and
leave the divisor alone; every other element goes through the inverse map.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Sequence

import numpy as np

from refless.core.config import get_settings
from refless.services.analysis import neville_extrapolate
from refless.services.gapset import Divisor, SetCase, has_mass_at_infinity
from refless.services.jacobi import JacobiWindow, prepend_coefficients, strip_coefficients
from refless.services.moebius import (
    INFINITY,
    HerglotzMap,
    MoebiusElement,
    SpherePoint,
    herglotz_metric,
    mobius_apply,
    to_sphere_point,
)
from refless.services.systems import (
    Normalization,
    ReflectionlessSystem,
    Side,
    SingularSystem,
    System,
    build_system,
    extract_parameters,
    system_asymptotics,
    system_distance,
)

logger = logging.getLogger(__name__)


class OrbitError(Exception):
    """Base error class for group actions and normal forms."""

    exit_code: int = 3

    def __init__(self, message: str) -> None:
        super().__init__(message)
        self.message = message


class CaseMismatchError(OrbitError):
    exit_code = 5


class NormalFormError(OrbitError):
    exit_code = 6


class TwistedShiftError(OrbitError):
    pass


class OrbitKind(str, Enum):
    DIRAC = "dirac"
    SCHROEDINGER = "schroedinger"
    JACOBI = "jacobi"


_CASE_OF_KIND = {
    OrbitKind.DIRAC: SetCase.TWO_UNBOUNDED,
    OrbitKind.SCHROEDINGER: SetCase.ONE_UNBOUNDED,
    OrbitKind.JACOBI: SetCase.COMPACT,
}


@dataclass(frozen=True)
class GElement:
    """[[c, a/c], [0, 1/c]], acting by w -> c^2 w + a."""

    c: float
    a: float

    def __post_init__(self) -> None:
        if not self.c > 0:
            raise OrbitError(f"G elements need c > 0, got {self.c}")

    @classmethod
    def from_affine(cls, scale: float, shift: float) -> GElement:
        """The element w -> scale * w + shift."""
        return cls(c=math.sqrt(scale), a=shift)

    @classmethod
    def from_moebius(cls, A: MoebiusElement) -> GElement:
        if not A.fixes_infinity:
            raise OrbitError(f"{A.entries()} does not fix infinity")
        return cls.from_affine(A.m11 / A.m22, A.m12 / A.m22)

    def to_moebius(self) -> MoebiusElement:
        return MoebiusElement(self.c, self.a / self.c, 0.0, 1.0 / self.c)

    def apply(self, w: complex) -> complex:
        return self.c * self.c * w + self.a


@dataclass(frozen=True)
class OrbitRepresentative:
    transform: MoebiusElement
    system: ReflectionlessSystem
    kind: OrbitKind


@dataclass(frozen=True)
class JacobiOrbitData:
    t: float
    coefficients: JacobiWindow
    transform: MoebiusElement
    a0: float
    b: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.t < 1.0:
            raise NormalFormError(f"t={self.t} outside [0, 1)")


# Action ---------------------------------------------------------------------


def act(A: MoebiusElement, system: System) -> System:
    if isinstance(system, SingularSystem):
        return SingularSystem(mobius_apply(A, system.a))
    if A.fixes_infinity:
        g = GElement.from_moebius(A)
        scale = g.c * g.c
        norm = Normalization(scale * system.norm.A_plus + g.a, scale * system.norm.D)
        return replace(system, norm=norm)
    result = extract_parameters(system.m_plus.transformed(A), system.gap_set)
    if isinstance(result, SingularSystem):
        raise OrbitError("A non-constant m-function was mapped to a constant")
    div, norm = result
    return build_system(system.gap_set, div, norm)


def _require_case(system: System, kind: OrbitKind) -> ReflectionlessSystem:
    if isinstance(system, SingularSystem):
        raise CaseMismatchError(f"Singular systems have no {kind.value} normal form")
    expected = _CASE_OF_KIND[kind]
    if system.gap_set.case != expected:
        raise CaseMismatchError(
            f"{kind.value} normal form needs a {expected.value} set, got {system.gap_set.case.value}"
        )
    return system


def _verify_transform(
    source: ReflectionlessSystem, transform: MoebiusElement, target: ReflectionlessSystem
) -> None:
    tolerance = get_settings().tolerances["representative"]
    distance = herglotz_metric(source.m_plus.transformed(transform), target.m_plus)
    if distance > tolerance:
        raise NormalFormError(f"Transform does not reproduce the normal form ({distance:.2e})")


# Dirac ----------------------------------------------------------------------


def dirac_representative(system: System) -> OrbitRepresentative:
    """The G element with m_plus(infinity) = i."""

    system = _require_case(system, OrbitKind.DIRAC)
    at_infinity = system_asymptotics(system, Side.PLUS).limit
    if not at_infinity.imag > 0:
        raise NormalFormError(f"m_plus(infinity)={at_infinity} is not in the upper half plane")
    scale = 1.0 / at_infinity.imag
    transform = GElement.from_affine(scale, -scale * at_infinity.real).to_moebius()
    normal = act(transform, system)

    tolerance = get_settings().tolerances["normal_form"]
    plus = system_asymptotics(normal, Side.PLUS).limit
    minus = system_asymptotics(normal, Side.MINUS).limit
    if abs(plus - 1j) > tolerance or abs(minus - 1j) > tolerance:
        raise NormalFormError(f"Dirac normal form failed: m_plus={plus}, m_minus={minus}")
    logger.info(f"Dirac representative found with transform {transform.entries()}")
    return OrbitRepresentative(transform=transform, system=normal, kind=OrbitKind.DIRAC)


# Schroedinger ---------------------------------------------------------------


def left_gap_limit(system: ReflectionlessSystem) -> float:
    """m_plus(-infinity) along the unbounded gap, extrapolated in 1/sqrt|t|."""

    eps = get_settings().eps_ladder[-1]
    sigmas = 1e-3 * 2.0 ** -np.arange(5)
    ts = -1.0 / sigmas**2
    values = system.values(Side.PLUS, ts + 1j * eps)
    limit = neville_extrapolate(sigmas, values)
    if abs(limit.imag) > 1e-7 * (1.0 + abs(limit.real)):
        raise NormalFormError(f"m_plus(-infinity)={limit} is not real")
    logger.debug(f"m_plus(-infinity) = {limit.real}")
    return limit.real


def schrodinger_representative(system: System) -> OrbitRepresentative:
    """Normal form mu_0 = -infinity, A_plus = 0, D = 1."""

    system = _require_case(system, OrbitKind.SCHROEDINGER)
    transform = MoebiusElement.identity()
    current: System = system
    if math.isfinite(system.div.points[0].mu):
        r = left_gap_limit(system)
        transform = MoebiusElement(0.0, -1.0, 1.0, -r)
        current = act(transform, current)
    if isinstance(current, SingularSystem):
        raise NormalFormError("Normalisation produced a singular system")

    scale = 1.0 / current.norm.D
    step = GElement.from_affine(scale, -scale * current.norm.A_plus).to_moebius()
    current = act(step, current)
    transform = step @ transform

    tolerance = get_settings().tolerances["normal_form"]
    if current.div.points[0].mu != -math.inf:
        raise NormalFormError(f"mu_0={current.div.points[0].mu} was not moved to -infinity")
    if abs(current.norm.A_plus) > tolerance or abs(current.norm.D - 1.0) > tolerance:
        raise NormalFormError(f"Normalisation left Z={current.norm.Z}")
    _verify_transform(system, transform, current)
    logger.info(f"Schroedinger representative found with transform {transform.entries()}")
    return OrbitRepresentative(transform=transform, system=current, kind=OrbitKind.SCHROEDINGER)


# Jacobi ---------------------------------------------------------------------


def _is_jacobi_normal(system: ReflectionlessSystem, tolerance: float) -> bool:
    data = system_asymptotics(system, Side.PLUS)
    return (
        data.b0 <= tolerance
        and abs(data.a) <= tolerance
        and abs(data.c + 1.0) <= tolerance
        and abs(data.d2) <= tolerance
    )


def jacobi_representative(system: System) -> OrbitRepresentative:
    """Normal form m_plus(z) = -1/z + O(1/z^3)."""

    system = _require_case(system, OrbitKind.JACOBI)
    tolerance = get_settings().tolerances["normal_form"]
    if _is_jacobi_normal(system, tolerance):
        return OrbitRepresentative(
            transform=MoebiusElement.identity(), system=system, kind=OrbitKind.JACOBI
        )

    transform = MoebiusElement.identity()
    current: System = system
    data = system_asymptotics(current, Side.PLUS)
    if data.b0 < 1e-10:
        step = MoebiusElement.inversion() @ MoebiusElement.translation(-data.a)
        current = act(step, current)
        transform = step @ transform
        data = system_asymptotics(current, Side.PLUS)
    if not data.b0 > 0:
        raise NormalFormError(f"Expected a pole at infinity, got b0={data.b0}")
    step = (
        MoebiusElement.dilation(data.b0)
        @ MoebiusElement.inversion()
        @ MoebiusElement.translation(-data.a)
    )
    current = act(step, current)
    transform = step @ transform
    if isinstance(current, SingularSystem) or not _is_jacobi_normal(current, tolerance):
        raise NormalFormError("Jacobi normal form conditions not met after normalisation")
    logger.info(f"Jacobi representative found with transform {transform.entries()}")
    return OrbitRepresentative(transform=transform, system=current, kind=OrbitKind.JACOBI)


def _support_radius(system: ReflectionlessSystem) -> float:
    rho = max(
        [abs(e) for e in system.gap_set.endpoints]
        + [abs(mu) for mu in system.div.mus if math.isfinite(mu)]
    )
    return 1.1 * rho + 0.05


def jacobi_orbit_data(system: System, count: int = 5) -> JacobiOrbitData:
    """t in [0, 1) and the right half-line coefficients of the orbit's Jacobi matrix.

    The orbit is moved to m_plus = bz - 1/z + O(1/z^2) with -m_minus having a
    pole at infinity; with l the slope of m_minus, a0^2 = 1/(l + b) and
    t = b a0^2.
    """

    system = _require_case(system, OrbitKind.JACOBI)
    tolerance = get_settings().tolerances["normal_form"]
    transform = MoebiusElement.identity()
    current: System = system

    minus = system_asymptotics(current, Side.MINUS)
    if minus.b0 <= 1e-10:
        step = MoebiusElement.inversion() @ MoebiusElement.translation(minus.a)
        current = act(step, current)
        transform = step

    plus = system_asymptotics(current, Side.PLUS)
    if not plus.c < 0:
        raise NormalFormError(f"1/z coefficient {plus.c} is not negative")
    scale = -1.0 / plus.c
    step = GElement.from_affine(scale, -scale * plus.a).to_moebius()
    current = act(step, current)
    transform = step @ transform
    if isinstance(current, SingularSystem):
        raise NormalFormError("Normalisation produced a singular system")

    plus = system_asymptotics(current, Side.PLUS)
    minus = system_asymptotics(current, Side.MINUS)
    if abs(plus.a) > tolerance or abs(plus.c + 1.0) > tolerance:
        raise NormalFormError(f"Expected bz - 1/z + O(1/z^2), got a={plus.a}, c={plus.c}")
    b = plus.b0 if plus.b0 > 1e-10 else 0.0
    slope = minus.b0
    if not slope > 0:
        raise NormalFormError(f"m_minus has no pole at infinity (slope {slope})")
    a0_squared = 1.0 / (slope + b)
    t = b * a0_squared
    if t < 1e-9:
        t = 0.0
    elif t >= 1.0 - 1e-9:
        raise NormalFormError(f"t={t} reached the excluded endpoint 1")

    normal = current
    remainder = HerglotzMap(
        lambda z: normal.values(Side.PLUS, z) - b * np.asarray(z, dtype=complex),
        continued=lambda z: normal.values(Side.PLUS, z, continued=True)
        - b * np.asarray(z, dtype=complex),
        label="m0",
    )
    window = strip_coefficients(remainder, count, _support_radius(normal))
    logger.info(f"Jacobi orbit data: t={t}, a0={math.sqrt(a0_squared)}")
    return JacobiOrbitData(
        t=t, coefficients=window, transform=transform, a0=math.sqrt(a0_squared), b=b
    )


# Twisted shift --------------------------------------------------------------


def twisted_shift_matrix(a0: float, b0: float) -> MoebiusElement:
    if not a0 > 0:
        raise TwistedShiftError(f"a0 must be positive, got {a0}")
    return MoebiusElement(0.0, -1.0 / a0, a0, -b0 / a0)


def a_t_family(t: float, a: float, c: float) -> MoebiusElement:
    """diag(s, 1/s) [[1, 0], [ta, 1]] rotation(pi t / 2) with s = 1 + t(c - 1)."""

    if not 0.0 <= t <= 1.0:
        raise OrbitError(f"t must lie in [0, 1], got {t}")
    s = 1.0 + t * (c - 1.0)
    if not s > 0:
        raise OrbitError(f"Degenerate scale 1 + t(c - 1) = {s}")
    diagonal = np.diag([s, 1.0 / s])
    lower = np.array([[1.0, 0.0], [t * a, 1.0]])
    rotation = MoebiusElement.rotation(0.5 * math.pi * t).matrix
    return MoebiusElement.from_matrix(diagonal @ lower @ rotation)


def twisted_shift_check(
    m: HerglotzMap, a0: float, b0: float, length: float, grid_n: int | None = None
) -> float:
    """Deviation between A(a0, b0)(length z + m) and m with (a0, b0) prepended."""

    A = twisted_shift_matrix(a0, b0)
    shifted = HerglotzMap(
        lambda z: length * np.asarray(z, dtype=complex) + m.values(z), label="shifted"
    )
    return herglotz_metric(shifted.transformed(A), prepend_coefficients(m, a0, b0), grid_n)


# Chart moves ----------------------------------------------------------------


def insert_singular_interval(system: ReflectionlessSystem, length: float) -> ReflectionlessSystem:
    """(m_plus, m_minus) -> (m_plus + length z, m_minus - length z)."""

    if length < 0:
        raise OrbitError(f"Interval length must be non-negative, got {length}")
    if not has_mass_at_infinity(system.gap_set, system.div):
        raise OrbitError("Insertion needs a compact set with both outer points at infinity")
    g = system.g + length / system.norm.D
    if g > 0.5 + 1e-12:
        raise OrbitError(f"Insertion would push g to {g} > 1/2")
    div = Divisor(points=system.div.points, g=min(g, 0.5))
    return replace(system, div=div)


def degeneration_profile(
    system: ReflectionlessSystem, a: SpherePoint | float, ns: Sequence[int]
) -> list[float]:
    """Distances to K_a along Z_n = a + i/n (or Z_n = n + i for a = infinity)."""

    target = SingularSystem(to_sphere_point(a))
    distances = []
    for n in ns:
        if target.a is INFINITY:
            norm = Normalization(float(n), 1.0)
        else:
            norm = Normalization(target.a.real, 1.0 / n)
        distances.append(system_distance(replace(system, norm=norm), target))
    logger.debug(f"degeneration towards {target.a}: {distances}")
    return distances
