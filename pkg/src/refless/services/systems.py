"""Reflectionless systems at the level of their half-line m-functions.

A system over a finite-gap set is fixed by a divisor and a normalisation
Z = A_plus + iD. ``build_system`` synthesises m_plus from the representation
data of h0; ``extract_parameters`` recovers the parameters from m_plus alone.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Sequence, Union

import numpy as np
from numpy.polynomial import Chebyshev

from refless.core.config import get_settings
from refless.services.analysis import (
    boundary_value,
    boundary_values,
    compactify,
    decompactify,
    laurent_coefficients,
)
from refless.services.gapset import (
    Divisor,
    DomainError,
    FiniteGapSet,
    Gap,
    GapKind,
    GapPoint,
    RepresentationData,
    SetCase,
    absolutely_continuous_mass,
    circle_coordinate,
    gap_point_from_circle,
    h0_continued,
    h0_values,
    has_mass_at_infinity,
    make_divisor,
    representation_data,
)
from refless.services.moebius import (
    INFINITY,
    HerglotzMap,
    SpherePoint,
    herglotz_metric,
    to_sphere_point,
)

logger = logging.getLogger(__name__)


class SystemsError(Exception):
    """Base error class for system synthesis and inversion."""

    exit_code: int = 3

    def __init__(self, message: str) -> None:
        super().__init__(message)
        self.message = message


class NormalizationError(SystemsError):
    pass


class AsymptoticsError(SystemsError):
    pass


class InconsistentDataError(SystemsError):
    pass


class Side(str, Enum):
    PLUS = "plus"
    MINUS = "minus"


@dataclass(frozen=True)
class Normalization:
    """Z = A_plus + iD in the upper half plane."""

    A_plus: float
    D: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.A_plus) and math.isfinite(self.D)):
            raise NormalizationError(f"A_plus and D must be finite, got {self.Z}")
        if not self.D > 0:
            raise NormalizationError(f"D must be positive, got {self.D}")

    @classmethod
    def from_point(cls, Z: complex) -> Normalization:
        return cls(A_plus=Z.real, D=Z.imag)

    @property
    def Z(self) -> complex:
        return complex(self.A_plus, self.D)


@dataclass(frozen=True)
class ReflectionlessSystem:
    gap_set: FiniteGapSet
    div: Divisor
    norm: Normalization
    rep: RepresentationData = field(compare=False)

    @property
    def g(self) -> float:
        return self.div.g or 0.0

    def values(self, side: Side, z: np.ndarray, continued: bool = False) -> np.ndarray:
        """m_plus or m_minus on an array; ``continued`` skips the half-plane check."""

        z = np.asarray(z, dtype=complex)
        if continued:
            h0 = h0_continued(self.gap_set, self.div, z)
        else:
            h0 = h0_values(self.gap_set, self.div, z)
        total = 0.5 * (h0 - self.rep.A) + self.g * z
        for point, weight in zip(self.div.points, self.rep.w):
            if weight > 0.0:
                total = total + (point.s - 0.5) * weight * (1.0 + point.mu * z) / (point.mu - z)
        m_plus = self.norm.A_plus + self.norm.D * total
        if Side(side) == Side.PLUS:
            return m_plus
        return self.norm.D * h0 - m_plus

    def m_map(self, side: Side) -> HerglotzMap:
        side = Side(side)
        return HerglotzMap(
            lambda z: self.values(side, z),
            continued=lambda z: self.values(side, z, continued=True),
            label=f"m_{side.value}",
        )

    @property
    def m_plus(self) -> HerglotzMap:
        return self.m_map(Side.PLUS)

    @property
    def m_minus(self) -> HerglotzMap:
        return self.m_map(Side.MINUS)


@dataclass(frozen=True)
class SingularSystem:
    """K_a: m_plus identically a and -m_minus identically a."""

    a: SpherePoint

    def __post_init__(self) -> None:
        point = to_sphere_point(self.a)
        if point is not INFINITY and abs(point.imag) > 0.0:
            raise NormalizationError(f"Singular systems need a real or infinite a, got {self.a}")
        object.__setattr__(self, "a", point if point is INFINITY else complex(point.real))

    def constant(self, side: Side) -> SpherePoint:
        if self.a is INFINITY or Side(side) == Side.PLUS:
            return self.a
        return -self.a

    def m_map(self, side: Side) -> HerglotzMap:
        return HerglotzMap.constant_map(self.constant(side))

    @property
    def m_plus(self) -> HerglotzMap:
        return self.m_map(Side.PLUS)

    @property
    def m_minus(self) -> HerglotzMap:
        return self.m_map(Side.MINUS)


System = Union[ReflectionlessSystem, SingularSystem]


@dataclass(frozen=True)
class AsymptoticData:
    """F(z) = b0 z + a + c/z + d2/z^2 + ... near infinity.

    Over compact sets the coefficients are real. Over sets unbounded on both
    sides F tends to the non-real value ``limit`` and only ``limit`` is used.
    """

    b0: float
    a: float
    c: float
    d2: float
    limit: complex
    radius: float = field(default=0.0, compare=False)


@dataclass(frozen=True)
class ParameterChart:
    """Disk point (Z - i)/(Z + i) plus one circle coordinate per gap."""

    zeta: complex
    circle: tuple[float, ...]
    g: float | None = None


# Synthesis ------------------------------------------------------------------


def build_system(gap_set: FiniteGapSet, div: Divisor, norm: Normalization) -> ReflectionlessSystem:
    div = make_divisor(gap_set, div.points, div.g)
    rep = representation_data(gap_set, div)
    logger.info(
        f"Built {gap_set.case.value} system: {len(div.points)} gap point(s), Z={norm.Z}"
    )
    return ReflectionlessSystem(gap_set=gap_set, div=div, norm=norm, rep=rep)


def singular_system(a: SpherePoint) -> SingularSystem:
    return SingularSystem(a)


def eval_m(system: System, side: Side | str, z: complex) -> SpherePoint:
    side = Side(side)
    if not complex(z).imag > 0:
        raise DomainError(f"m-functions are evaluated on the upper half plane, got z={z}")
    if isinstance(system, SingularSystem):
        return system.constant(side)
    return complex(system.values(side, np.array([z], dtype=complex))[0])


def absolutely_continuous_part(rep: RepresentationData) -> float:
    """a.c. mass of nu recovered from nu_total minus the discrete masses."""
    return rep.nu_total - sum(rep.w) - rep.nu_infinity


def nu_plus_total(system: ReflectionlessSystem, ac_mass: float | None = None) -> float:
    """nu_plus of the extended line; the a.c. part is integrated unless supplied."""

    if ac_mass is None:
        ac_mass = absolutely_continuous_mass(system.gap_set, system.div)
    carried = sum(
        weight for point, weight in zip(system.div.points, system.rep.w) if point.s == 1
    )
    return 0.5 * ac_mass + carried + (0.5 + system.g) * system.rep.nu_infinity


# Asymptotics ----------------------------------------------------------------


def laurent_radius(gap_set: FiniteGapSet, poles: Sequence[float] = ()) -> float:
    radius = 3.0 * (1.0 + gap_set.scale)
    for mu in poles:
        if math.isfinite(mu):
            radius = max(radius, 2.0 * (1.0 + abs(mu)))
    return radius


def asymptotics(
    F: HerglotzMap,
    gap_set: FiniteGapSet,
    poles: Sequence[float] = (),
    radius: float | None = None,
    samples: int | None = None,
) -> AsymptoticData:
    """Leading Laurent coefficients of F at infinity from samples on |z| = R."""

    if gap_set.case == SetCase.ONE_UNBOUNDED:
        raise AsymptoticsError("Infinity is a branch point for sets unbounded on one side")
    if F.is_constant:
        if F.constant is INFINITY:
            raise AsymptoticsError("The constant infinity has no Laurent expansion")
        value = complex(F.constant)
        return AsymptoticData(b0=0.0, a=value.real, c=0.0, d2=0.0, limit=value)

    radius = radius or laurent_radius(gap_set, poles)
    try:
        coeffs = laurent_coefficients(F.continuation, radius, range(-2, 5), samples)
    except FloatingPointError as exc:
        raise AsymptoticsError(f"Laurent sampling failed on |z|={radius}: {exc}") from exc

    scale = max(abs(coeffs[j]) * radius**j for j in (-2, -1, 0, 1)) or 1.0
    leak = max(abs(coeffs[k]) * radius**k for k in (2, 3, 4))
    logger.debug(f"Laurent radius {radius}: scale {scale:.3e}, positive-power leak {leak:.3e}")
    if leak > 1e-8 * scale:
        raise AsymptoticsError(
            f"Radius {radius} does not enclose all singularities (leak {leak / scale:.2e})"
        )

    b0 = coeffs[1].real
    if b0 < 0.0:
        if b0 < -1e-9 * scale / radius:
            raise AsymptoticsError(f"Negative leading coefficient {b0}: not a Herglotz function")
        b0 = 0.0
    if gap_set.case == SetCase.COMPACT:
        drift = max(abs(coeffs[j].imag) * radius**j for j in (-2, -1, 0))
        if drift > 1e-8 * scale:
            raise AsymptoticsError(
                f"Laurent coefficients are not real (relative drift {drift / scale:.2e})"
            )
    return AsymptoticData(
        b0=b0,
        a=coeffs[0].real,
        c=coeffs[-1].real,
        d2=coeffs[-2].real,
        limit=coeffs[0],
        radius=radius,
    )


def system_asymptotics(system: System, side: Side | str = Side.PLUS) -> AsymptoticData:
    if isinstance(system, SingularSystem):
        if system.a is INFINITY:
            raise AsymptoticsError("The constant infinity has no Laurent expansion")
        value = complex(system.constant(side))
        return AsymptoticData(b0=0.0, a=value.real, c=0.0, d2=0.0, limit=value)
    return asymptotics(system.m_map(Side(side)), system.gap_set, poles=system.div.mus)


# Boundary behaviour ---------------------------------------------------------


def reflectionless_defect(
    system: ReflectionlessSystem, t: float, ladder: Sequence[float] | None = None
) -> float:
    """|Re h(t + i0)| extrapolated along the epsilon ladder."""

    if system.gap_set.band_of(t) is None:
        raise DomainError(f"t={t} is not inside a band")

    def h(z: np.ndarray) -> np.ndarray:
        return system.values(Side.PLUS, z) + system.values(Side.MINUS, z)

    return abs(boundary_value(h, t, ladder).real)


def system_distance(first: System, second: System, grid_n: int | None = None) -> float:
    return herglotz_metric(first.m_plus, second.m_plus, grid_n)


# Parameter chart ------------------------------------------------------------


def parameter_chart(system: System) -> ParameterChart:
    if isinstance(system, SingularSystem):
        if system.a is INFINITY:
            return ParameterChart(zeta=1 + 0j, circle=())
        a = complex(system.a)
        return ParameterChart(zeta=(a - 1j) / (a + 1j), circle=())
    Z = system.norm.Z
    circle = tuple(
        circle_coordinate(system.gap_set, index, point)
        for index, point in enumerate(system.div.points)
    )
    return ParameterChart(zeta=(Z - 1j) / (Z + 1j), circle=circle, g=system.div.g)


def system_from_chart(
    gap_set: FiniteGapSet,
    zeta: complex,
    circle: Sequence[float] = (),
    g: float | None = None,
) -> System:
    """Inverse chart; the unit circle |zeta| = 1 is the circle of singular systems."""

    zeta = complex(zeta)
    modulus = abs(zeta)
    if modulus > 1.0 + 1e-12:
        raise NormalizationError(f"Chart point {zeta} lies outside the closed unit disk")
    if modulus >= 1.0 - 1e-12:
        if abs(zeta - 1.0) <= 1e-12:
            return SingularSystem(INFINITY)
        return SingularSystem((1j * (1.0 + zeta) / (1.0 - zeta)).real)
    points = [gap_point_from_circle(gap_set, index, t) for index, t in enumerate(circle)]
    div = make_divisor(gap_set, points, g)
    norm = Normalization.from_point(1j * (1.0 + zeta) / (1.0 - zeta))
    return build_system(gap_set, div, norm)


# Inverse map ----------------------------------------------------------------

_PROBE = np.array([1j, 2j, 0.5 + 1j, -1.0 + 3j])


def _constant_value(F: HerglotzMap) -> SpherePoint | None:
    if F.is_constant:
        return F.constant
    probe = F.values(_PROBE)
    finite = np.isfinite(probe)
    if not np.any(finite):
        return INFINITY
    if not np.all(finite):
        return None
    reference = probe[0]
    tolerance = 1e-12 * (1.0 + abs(reference))
    if np.max(np.abs(probe - reference)) <= tolerance and abs(reference.imag) <= tolerance:
        return complex(reference.real)
    return None


def _band_nodes(gap_set: FiniteGapSet, count: int) -> tuple[np.ndarray, np.ndarray]:
    """Sample points inside each band, kept away from the edges, with band indices."""

    span = 4.0 * (1.0 + gap_set.scale)
    unit = 0.5 * (1.0 - np.cos(np.pi * (np.arange(count) + 0.5) / count))
    inner = 0.05 + 0.9 * unit
    points, index = [], []
    for k, (lo, hi) in enumerate(gap_set.bands):
        if math.isinf(lo) and math.isinf(hi):
            ts = -span + 2.0 * span * inner
        elif math.isinf(hi):
            ts = lo + span * inner
        elif math.isinf(lo):
            ts = hi - span * inner
        else:
            ts = lo + (hi - lo) * inner
        points.append(ts)
        index.append(np.full(count, k))
    return np.concatenate(points), np.concatenate(index)


def _band_polynomial_values(
    F: HerglotzMap,
    gap_set: FiniteGapSet,
    ts: np.ndarray,
    band_index: np.ndarray,
    ladder: Sequence[float] | None,
) -> np.ndarray:
    """(-1)^k prod |e - t|^(1/2) / (2 Im F(t + i0)) on band k.

    For an m_plus this equals the polynomial prod(mu_j - t) over finite divisor
    points (outer factors normalised as in h0) divided by D |P|.
    """

    im = boundary_values(F.values, ts, ladder).imag
    if np.any(im <= 0.0):
        raise InconsistentDataError("Boundary values on the bands are not in the upper half plane")
    edges = np.asarray(gap_set.endpoints, dtype=float)
    if edges.size:
        root_product = np.prod(np.sqrt(np.abs(edges[:, None] - ts[None, :])), axis=0)
    else:
        root_product = np.ones_like(ts)
    return (-1.0) ** band_index * root_product / (2.0 * im)


def _fit_band_polynomial(
    ts: np.ndarray, values: np.ndarray, low: int, high: int, tolerance: float
) -> tuple[Chebyshev, int]:
    scale = float(np.max(np.abs(values)))
    residual = math.inf
    for degree in range(low, high + 1):
        fit = Chebyshev.fit(ts, values, degree)
        residual = float(np.max(np.abs(fit(ts) - values))) / scale
        logger.debug(f"band polynomial degree {degree}: relative residual {residual:.2e}")
        if residual <= tolerance:
            return fit, degree
    raise InconsistentDataError(
        f"Band data is not of finite-gap form (best relative residual {residual:.2e})"
    )


def _bisect(func: Callable[[float], float], lo: float, hi: float, max_iter: int = 200) -> float:
    f_lo = func(lo)
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        f_mid = func(mid)
        if f_mid == 0.0:
            return mid
        if (f_mid > 0.0) == (f_lo > 0.0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _bracket(gap: Gap, threshold: float) -> tuple[float, float]:
    return max(gap.left, -threshold), min(gap.right, threshold)


def _has_sign_change(fit: Chebyshev, gap: Gap, threshold: float) -> bool:
    lo, hi = _bracket(gap, threshold)
    return float(fit(lo)) * float(fit(hi)) < 0.0


def _locate_mu(fit: Chebyshev, gap: Gap, finite: bool, threshold: float) -> float:
    """Zero of the band polynomial on the closed gap, by bisection in u = t/(1+|t|)."""

    if not finite:
        return gap.left if gap.kind == GapKind.LEFT else gap.right
    lo, hi = _bracket(gap, threshold)
    f_lo, f_hi = float(fit(lo)), float(fit(hi))
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if f_lo * f_hi > 0.0:
        if gap.kind != GapKind.BOUNDED:
            return gap.finite_edge
        return lo if abs(f_lo) <= abs(f_hi) else hi
    u = _bisect(lambda v: float(fit(decompactify(v))), compactify(lo), compactify(hi))
    return decompactify(u)


def _polynomial_D(
    gap_set: FiniteGapSet, mus: Sequence[float], ts: np.ndarray, values: np.ndarray
) -> float:
    """D implied by the band polynomial once the zeros are known."""

    product = np.ones_like(ts)
    for gap, mu in zip(gap_set.gaps, mus):
        if not math.isfinite(mu):
            continue
        if gap.kind == GapKind.BOUNDED:
            product = product * (mu - ts)
        elif gap.kind == GapKind.LEFT:
            product = product * (ts - mu) / (1.0 + gap.right - mu)
        else:
            product = product * (mu - ts) / (1.0 + mu - gap.left)
    prefactor = 2.0 if gap_set.case == SetCase.TWO_UNBOUNDED else 1.0
    return float(np.median(product / (values * prefactor)))


def _pole_side(F: HerglotzMap, gap: Gap, mu: float, weight: float, D: float) -> int:
    eps = min(get_settings().pole_probe_eps, 1e-2 * gap.distance_to_edge(mu))
    value = complex(F.values(np.array([mu + 1j * eps]))[0])
    ratio = eps * value.imag / (D * weight * (1.0 + mu * mu))
    logger.debug(f"pole test at mu={mu}: ratio {ratio:.3e}")
    if ratio > 0.5:
        return 1
    if ratio < 1e-3:
        return 0
    raise InconsistentDataError(f"Point mass at mu={mu} appears split (ratio {ratio:.3e})")


def extract_parameters(
    F: HerglotzMap,
    gap_set: FiniteGapSet,
    ladder: Sequence[float] | None = None,
) -> tuple[Divisor, Normalization] | SingularSystem:
    """Recover (divisor, normalisation) from m_plus, or the singular system if constant."""

    constant = _constant_value(F)
    if constant is not None:
        logger.info(f"Constant m-function recognised as singular system a={constant}")
        return SingularSystem(constant)

    settings = get_settings()
    ts, band_index = _band_nodes(gap_set, settings.band_samples)
    values = _band_polynomial_values(F, gap_set, ts, band_index, ladder)

    bounded = gap_set.bounded_gap_count
    outer = [j for j, gap in enumerate(gap_set.gaps) if gap.kind != GapKind.BOUNDED]
    fit, degree = _fit_band_polynomial(
        ts, values, bounded, bounded + len(outer), settings.fit_tolerance
    )
    threshold = settings.infinite_mu_threshold
    finite_outer = degree - bounded
    if finite_outer == len(outer):
        finite = set(outer)
    elif finite_outer == 0:
        finite = set()
    else:
        changes = [j for j in outer if _has_sign_change(fit, gap_set.gaps[j], threshold)]
        if changes:
            finite = {changes[0]}
        else:
            finite = {min(outer, key=lambda j: abs(float(fit(gap_set.gaps[j].finite_edge))))}

    mus = []
    for j, gap in enumerate(gap_set.gaps):
        mu = _locate_mu(fit, gap, gap.kind == GapKind.BOUNDED or j in finite, threshold)
        if math.isfinite(mu) and abs(mu) >= threshold:
            mu = gap.left if gap.kind == GapKind.LEFT else gap.right
        mu = min(max(mu, gap.left), gap.right)
        mus.append(mu)

    outer_infinite = (
        gap_set.case == SetCase.COMPACT and mus[0] == -math.inf and mus[-1] == math.inf
    )
    trial = make_divisor(
        gap_set, [GapPoint(mu, 0) for mu in mus], 0.0 if outer_infinite else None
    )
    rep = representation_data(gap_set, trial)
    D_poly = _polynomial_D(gap_set, trial.mus, ts, values)

    points = []
    for gap, point, weight in zip(gap_set.gaps, trial.points, rep.w):
        s = _pole_side(F, gap, point.mu, weight, D_poly) if weight > 0.0 else 0
        points.append(GapPoint(point.mu, s))

    at_i = complex(F.values(np.array([1j]))[0])
    A_plus = at_i.real
    b0 = 0.0
    if has_mass_at_infinity(gap_set, trial):
        b0 = asymptotics(F, gap_set, poles=trial.mus).b0
    carried = sum(weight for point, weight in zip(points, rep.w) if point.s == 1)
    D = (at_i.imag - b0) / (0.5 * absolutely_continuous_part(rep) + carried)
    if not D > 0:
        raise InconsistentDataError(f"Recovered D={D} is not positive")
    if abs(D - D_poly) > 1e-6 * D:
        raise InconsistentDataError(
            f"Normalisation mismatch: D={D} from z=i, {D_poly} from the band polynomial"
        )

    g = None
    if has_mass_at_infinity(gap_set, trial):
        g = min(0.5, max(-0.5, b0 / D - 0.5))
    div = make_divisor(gap_set, points, g)
    norm = Normalization(A_plus=A_plus, D=D)
    logger.info(f"Extracted divisor {div.mus} and Z={norm.Z}")
    return div, norm


def system_from_map(F: HerglotzMap, gap_set: FiniteGapSet) -> System:
    """extract_parameters followed by build_system."""

    result = extract_parameters(F, gap_set)
    if isinstance(result, SingularSystem):
        return result
    div, norm = result
    return build_system(gap_set, div, norm)
