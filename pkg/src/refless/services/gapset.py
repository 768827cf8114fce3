"""Finite-gap spectral sets, divisors and the normalised Herglotz function h0.

h0 is evaluated through its logarithm: a sum of principal logarithms of the
linear factors (e - z) for band edges e and (mu - z) for finite divisor points,
plus the case constant. The same expression continued to real z (from above)
gives boundary values, residues and the band density.
"""

from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from refless.core.config import get_settings
from refless.services.analysis import compactify, decompactify, integrate_band, richardson_limit
from refless.services.moebius import HerglotzMap

logger = logging.getLogger(__name__)


class GapSetError(Exception):
    """Base error class for set and divisor handling."""

    exit_code: int = 3

    def __init__(self, message: str) -> None:
        super().__init__(message)
        self.message = message


class GapSetValidationError(GapSetError):
    pass


class DivisorValidationError(GapSetError):
    pass


class DomainError(GapSetError):
    pass


class SetCase(str, Enum):
    """Number of unbounded components of the set."""

    TWO_UNBOUNDED = "two_unbounded"
    ONE_UNBOUNDED = "one_unbounded"
    COMPACT = "compact"


class GapKind(str, Enum):
    BOUNDED = "bounded"
    LEFT = "left"
    RIGHT = "right"


@dataclass(frozen=True)
class Gap:
    """Open gap (left, right); unbounded gaps carry an infinite edge."""

    left: float
    right: float
    kind: GapKind

    def contains(self, t: float, closed: bool = False) -> bool:
        if closed:
            return self.left <= t <= self.right
        return self.left < t < self.right

    @property
    def finite_edge(self) -> float:
        """The edge adjacent to the set for unbounded gaps."""
        return self.right if self.kind == GapKind.LEFT else self.left

    def distance_to_edge(self, mu: float) -> float:
        return min(abs(mu - self.left), abs(self.right - mu))


@dataclass(frozen=True)
class FiniteGapSet:
    bands: tuple[tuple[float, float], ...]
    case: SetCase
    gaps: tuple[Gap, ...]

    @property
    def endpoints(self) -> tuple[float, ...]:
        """Finite band endpoints, increasing."""
        return tuple(x for band in self.bands for x in band if math.isfinite(x))

    @property
    def bounded_gap_count(self) -> int:
        return sum(1 for gap in self.gaps if gap.kind == GapKind.BOUNDED)

    @property
    def scale(self) -> float:
        return max((abs(e) for e in self.endpoints), default=0.0)

    def band_of(self, t: float) -> int | None:
        """Index of the band whose interior contains t."""
        for index, (lo, hi) in enumerate(self.bands):
            if lo < t < hi:
                return index
        return None

    def gap_of(self, t: float) -> int | None:
        for index, gap in enumerate(self.gaps):
            if gap.contains(t):
                return index
        return None


@dataclass(frozen=True)
class GapPoint:
    mu: float
    s: int = 0


@dataclass(frozen=True)
class Divisor:
    points: tuple[GapPoint, ...]
    g: float | None = None

    @property
    def mus(self) -> tuple[float, ...]:
        return tuple(point.mu for point in self.points)


@dataclass(frozen=True)
class RepresentationData:
    A: float
    nu_total: float
    w: tuple[float, ...]
    nu_infinity: float


# Sets -----------------------------------------------------------------------


def classify_set(bands: Iterable[Sequence[float]]) -> FiniteGapSet:
    """Validate bands and derive the case tag and the ordered gap list."""

    parsed: list[tuple[float, float]] = []
    for band in bands:
        if len(band) != 2:
            raise GapSetValidationError(f"Band {band!r} must have exactly two endpoints")
        lo, hi = float(band[0]), float(band[1])
        if math.isnan(lo) or math.isnan(hi):
            raise GapSetValidationError(f"Band {band!r} has a NaN endpoint")
        if not lo < hi:
            raise GapSetValidationError(f"Band [{lo}, {hi}] is empty or degenerate")
        if lo == math.inf or hi == -math.inf:
            raise GapSetValidationError(f"Band [{lo}, {hi}] is not a real interval")
        parsed.append((lo, hi))
    if not parsed:
        raise GapSetValidationError("At least one band is required")
    parsed.sort()
    for (lo1, hi1), (lo2, hi2) in zip(parsed, parsed[1:]):
        if hi1 >= lo2:
            raise GapSetValidationError(
                f"Bands [{lo1}, {hi1}] and [{lo2}, {hi2}] overlap or touch"
            )

    left_open = math.isinf(parsed[0][0])
    right_open = math.isinf(parsed[-1][1])
    if left_open and not right_open:
        raise GapSetValidationError(
            "Sets unbounded only to the left are not supported; reflect t -> -t"
        )

    gaps: list[Gap] = []
    if not left_open:
        gaps.append(Gap(-math.inf, parsed[0][0], GapKind.LEFT))
    for (_, hi), (lo, _) in zip(parsed, parsed[1:]):
        gaps.append(Gap(hi, lo, GapKind.BOUNDED))
    if not right_open:
        gaps.append(Gap(parsed[-1][1], math.inf, GapKind.RIGHT))

    if left_open:
        case = SetCase.TWO_UNBOUNDED
    elif right_open:
        case = SetCase.ONE_UNBOUNDED
    else:
        case = SetCase.COMPACT
    logger.debug(f"classified {len(parsed)} band(s) as {case.value}")
    return FiniteGapSet(bands=tuple(parsed), case=case, gaps=tuple(gaps))


# Divisors -------------------------------------------------------------------


def make_divisor(
    gap_set: FiniteGapSet,
    points: Sequence[GapPoint | tuple[float, int]],
    g: float | None = None,
    snap: float | None = None,
) -> Divisor:
    """Validate one point per gap, snapping near-edge points onto the edge."""

    snap = get_settings().endpoint_snap if snap is None else snap
    if len(points) != len(gap_set.gaps):
        raise DivisorValidationError(
            f"Expected {len(gap_set.gaps)} divisor point(s), got {len(points)}"
        )
    normalised: list[GapPoint] = []
    for index, (gap, raw) in enumerate(zip(gap_set.gaps, points)):
        mu, s = (raw.mu, raw.s) if isinstance(raw, GapPoint) else (raw[0], raw[1])
        mu = float(mu)
        if s not in (0, 1):
            raise DivisorValidationError(f"divisor[{index}].s must be 0 or 1, got {s}")
        if math.isnan(mu):
            raise DivisorValidationError(f"divisor[{index}].mu is NaN")
        if not gap.contains(mu, closed=True):
            raise DivisorValidationError(
                f"divisor[{index}].mu={mu} lies outside the gap [{gap.left}, {gap.right}]"
            )
        for edge in (gap.left, gap.right):
            if math.isfinite(edge) and math.isfinite(mu) and mu != edge:
                if abs(mu - edge) <= snap * max(1.0, abs(edge)):
                    logger.warning(f"divisor[{index}].mu={mu} snapped to gap edge {edge}")
                    mu = edge
        if mu in (gap.left, gap.right):
            s = 0
        normalised.append(GapPoint(mu=mu, s=int(s)))

    needs_g = (
        gap_set.case == SetCase.COMPACT
        and normalised[0].mu == -math.inf
        and normalised[-1].mu == math.inf
    )
    if needs_g and g is None:
        raise DivisorValidationError("g is required when both outer points are infinite")
    if not needs_g and g is not None:
        raise DivisorValidationError(
            "g is only allowed for compact sets with both outer points infinite"
        )
    if g is not None:
        g = float(g)
        if not -0.5 <= g <= 0.5:
            raise DivisorValidationError(f"g={g} must lie in [-1/2, 1/2]")
    return Divisor(points=tuple(normalised), g=g)


def gap_point_from_circle(gap_set: FiniteGapSet, gap_index: int, t: float) -> GapPoint:
    """Circle coordinate t in [-1, 1) to a gap point (two glued copies of the gap).

    t in (0, 1) runs over the s=1 copy from the left edge, t in (-1, 0) over the
    s=0 copy; t=0 is the left edge and t=-1 the right edge. Unbounded gaps are
    parametrised in the compactified coordinate, so infinity is an edge.
    """

    if not -1.0 <= t < 1.0:
        raise DivisorValidationError(f"circle coordinate {t} outside [-1, 1)")
    gap = gap_set.gaps[gap_index]
    lo, hi = compactify(gap.left), compactify(gap.right)
    if t == 0.0:
        return GapPoint(gap.left, 0)
    if t == -1.0:
        return GapPoint(gap.right, 0)
    s = 1 if t > 0 else 0
    return GapPoint(decompactify(lo + abs(t) * (hi - lo)), s)


def circle_coordinate(gap_set: FiniteGapSet, gap_index: int, point: GapPoint) -> float:
    gap = gap_set.gaps[gap_index]
    if point.mu == gap.left:
        return 0.0
    if point.mu == gap.right:
        return -1.0
    lo, hi = compactify(gap.left), compactify(gap.right)
    fraction = (compactify(point.mu) - lo) / (hi - lo)
    return fraction if point.s == 1 else -fraction


# Krein function -------------------------------------------------------------


def krein_xi(gap_set: FiniteGapSet, div: Divisor, t: float) -> float:
    """1/2 on the bands; on each gap 1 to the right of mu and 0 to its left."""

    if t in gap_set.endpoints or t in div.mus:
        raise DomainError(f"xi is not defined at the exceptional point t={t}")
    if gap_set.band_of(t) is not None:
        return 0.5
    index = gap_set.gap_of(t)
    if index is None:
        raise DomainError(f"t={t} is neither in a band nor in a gap")
    return 1.0 if t > div.points[index].mu else 0.0


# h0 -------------------------------------------------------------------------


def _boundary_log(w: np.ndarray) -> np.ndarray:
    """Principal log of (w - i0) for real w, i.e. the limit from z in C+."""

    w = np.asarray(w, dtype=float)
    with np.errstate(divide="ignore"):
        return np.log(np.abs(w)) - 1j * np.pi * (w < 0)


def _log_h0_terms(
    gap_set: FiniteGapSet,
    div: Divisor,
    z: np.ndarray,
    boundary: bool = False,
    skip_pole: int | None = None,
) -> np.ndarray:
    """log h0 as a sum of principal logs; ``skip_pole`` drops one (mu - z) factor."""

    log = _boundary_log if boundary else np.log
    z = np.asarray(z, dtype=float if boundary else complex)
    total = np.zeros(np.shape(z), dtype=complex)
    if gap_set.case == SetCase.TWO_UNBOUNDED:
        total += math.log(2.0) + 0.5j * math.pi
    for edge in gap_set.endpoints:
        total += 0.5 * log(edge - z)
    for index, (gap, point) in enumerate(zip(gap_set.gaps, div.points)):
        mu = point.mu
        pole = index != skip_pole
        if gap.kind == GapKind.BOUNDED:
            if pole:
                total -= log(mu - z)
        elif gap.kind == GapKind.LEFT:
            if mu == -math.inf:
                total += 1j * math.pi
            else:
                total += math.log(1.0 + gap.right - mu)
                if pole:
                    total -= log(mu - z)
        else:
            if mu != math.inf:
                total += math.log(1.0 + mu - gap.left)
                if pole:
                    total -= log(mu - z)
    return total


def h0_values(gap_set: FiniteGapSet, div: Divisor, z: np.ndarray) -> np.ndarray:
    """Vectorised h0 on the upper half plane."""

    z = np.asarray(z, dtype=complex)
    if np.any(z.imag <= 0):
        raise DomainError("h0 is evaluated on the upper half plane only")
    return np.exp(_log_h0_terms(gap_set, div, z))


def h0_continued(gap_set: FiniteGapSet, div: Divisor, z: np.ndarray) -> np.ndarray:
    """The same product formula off the real axis, without the half-plane check.

    Below the axis this is the continuation through the gaps for sets bounded
    on the left, and through the bands for two-sided sets; in both cases it is
    holomorphic near infinity whenever the set allows it.
    """

    return np.exp(_log_h0_terms(gap_set, div, np.asarray(z, dtype=complex)))


def h0_map(gap_set: FiniteGapSet, div: Divisor) -> HerglotzMap:
    return HerglotzMap(
        lambda z: h0_values(gap_set, div, z),
        continued=lambda z: h0_continued(gap_set, div, z),
        label="h0",
    )


def h0_eval(gap_set: FiniteGapSet, div: Divisor, z: complex) -> complex:
    if not complex(z).imag > 0:
        raise DomainError(f"h0 needs Im z > 0, got z={z}")
    return complex(h0_values(gap_set, div, np.array([z]))[0])


def krein_from_h0(
    gap_set: FiniteGapSet, div: Divisor, t: float, height: float = 1e-8
) -> float:
    """(1/pi) arg h0(t + i height), the boundary value that krein_xi predicts."""

    phase = cmath.phase(h0_eval(gap_set, div, complex(t, height))) / math.pi
    # arg is in (0, pi) up to rounding; keep values just past pi near 1
    return phase + 2.0 if phase < -0.5 else phase


def _modulus(gap_set: FiniteGapSet, div: Divisor, z: complex) -> float:
    """|h0(z)| from absolute values of the factors; no branch choices involved."""

    value = 2.0 if gap_set.case == SetCase.TWO_UNBOUNDED else 1.0
    for edge in gap_set.endpoints:
        value *= math.sqrt(abs(edge - z))
    for gap, point in zip(gap_set.gaps, div.points):
        if math.isinf(point.mu):
            continue
        if gap.kind == GapKind.LEFT:
            value *= 1.0 + gap.right - point.mu
        elif gap.kind == GapKind.RIGHT:
            value *= 1.0 + point.mu - gap.left
        value /= abs(point.mu - z)
    return value


def _xi_intervals(gap_set: FiniteGapSet, div: Divisor) -> list[tuple[float, float, float]]:
    intervals = [(lo, hi, 0.5) for lo, hi in gap_set.bands]
    for gap, point in zip(gap_set.gaps, div.points):
        if point.mu < gap.right:
            intervals.append((max(point.mu, gap.left), gap.right, 1.0))
    return intervals


def _interval_exponent(lo: float, hi: float, z: complex) -> complex:
    """Integral of 1/(t - z) - t/(t^2 + 1) over (lo, hi), infinite ends as limits."""

    if math.isinf(lo) and math.isinf(hi):
        return 1j * math.pi
    if math.isinf(lo):
        return cmath.log(hi - z) + 1j * math.pi - 0.5 * math.log(hi * hi + 1.0)
    if math.isinf(hi):
        return -cmath.log(lo - z) + 0.5 * math.log(lo * lo + 1.0)
    return (
        cmath.log(hi - z)
        - cmath.log(lo - z)
        - 0.5 * math.log((hi * hi + 1.0) / (lo * lo + 1.0))
    )


def krein_exponent(gap_set: FiniteGapSet, div: Divisor, z: complex) -> complex:
    """Exponent of the exponential Herglotz representation driven by xi."""

    return sum(
        (value * _interval_exponent(lo, hi, z) for lo, hi, value in _xi_intervals(gap_set, div)),
        start=0j,
    )


def h0_log_oracle(gap_set: FiniteGapSet, div: Divisor, z: complex) -> complex:
    """h0 rebuilt from the Krein function alone.

    The positive constant is fixed at z = i from the branch-free modulus, so the
    phase at every z comes entirely from the interval integrals.
    """

    if not complex(z).imag > 0:
        raise DomainError(f"h0 needs Im z > 0, got z={z}")
    reference = krein_exponent(gap_set, div, 1j)
    log_scale = math.log(_modulus(gap_set, div, 1j)) - reference.real
    return cmath.exp(krein_exponent(gap_set, div, z) + log_scale)


# Representation data --------------------------------------------------------


def _is_interior(gap: Gap, mu: float) -> bool:
    return math.isfinite(mu) and gap.contains(mu)


def point_mass(gap_set: FiniteGapSet, div: Divisor, index: int) -> float:
    """Residue form of the point mass at mu_j: lim (mu - z) h0(z) / (1 + mu^2)."""

    gap = gap_set.gaps[index]
    mu = div.points[index].mu
    if not _is_interior(gap, mu):
        return 0.0
    log_remainder = _log_h0_terms(
        gap_set, div, np.array(mu), boundary=True, skip_pole=index
    )
    remainder = complex(np.exp(log_remainder))
    if abs(remainder.imag) > 1e-8 * abs(remainder):
        logger.warning(f"residue at mu={mu} has phase {cmath.phase(remainder):.3e}")
    return remainder.real / (1.0 + mu * mu)


def point_mass_limit(
    gap_set: FiniteGapSet,
    div: Divisor,
    index: int,
    ladder: Sequence[float] | None = None,
) -> float:
    """The point mass as -i lim y h0(mu + iy) / (1 + mu^2) along a y-ladder."""

    gap = gap_set.gaps[index]
    mu = div.points[index].mu
    if not _is_interior(gap, mu):
        return 0.0
    ladder = tuple(ladder or get_settings().eps_ladder)
    ys = np.asarray(ladder, dtype=float)
    samples = -1j * ys * h0_values(gap_set, div, mu + 1j * ys) / (1.0 + mu * mu)
    return richardson_limit(ladder, samples).real


def boundary_density(gap_set: FiniteGapSet, div: Divisor, t: float) -> float:
    """Im h0(t + i0) on a band interior; there arg h0 = pi/2."""

    if gap_set.band_of(t) is None:
        raise DomainError(f"t={t} is not inside a band")
    return float(np.exp(_log_h0_terms(gap_set, div, np.array(t), boundary=True).real))


def absolutely_continuous_mass(gap_set: FiniteGapSet, div: Divisor) -> float:
    """Mass of the a.c. part of nu: integral over C of Im h0(t) / (pi (1 + t^2))."""

    def density(t: float) -> float:
        log_mod = _log_h0_terms(gap_set, div, np.array(t), boundary=True).real
        return float(np.exp(log_mod)) / (math.pi * (1.0 + t * t))

    return sum(integrate_band(density, lo, hi) for lo, hi in gap_set.bands)


def has_mass_at_infinity(gap_set: FiniteGapSet, div: Divisor) -> bool:
    return (
        gap_set.case == SetCase.COMPACT
        and div.points[0].mu == -math.inf
        and div.points[-1].mu == math.inf
    )


def representation_data(gap_set: FiniteGapSet, div: Divisor) -> RepresentationData:
    value = h0_eval(gap_set, div, 1j)
    weights = tuple(point_mass(gap_set, div, j) for j in range(len(gap_set.gaps)))
    return RepresentationData(
        A=value.real,
        nu_total=value.imag,
        w=weights,
        nu_infinity=1.0 if has_mass_at_infinity(gap_set, div) else 0.0,
    )


def independent_mass(gap_set: FiniteGapSet, div: Divisor, rep: RepresentationData) -> float:
    """a.c. mass by quadrature plus point masses plus the mass at infinity."""

    return absolutely_continuous_mass(gap_set, div) + sum(rep.w) + rep.nu_infinity
