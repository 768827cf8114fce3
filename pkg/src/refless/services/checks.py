"""Property checks over systems: the per-configuration checks and the acceptance battery."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from refless.core.config import get_settings
from refless.services.gapset import (
    FiniteGapSet,
    Divisor,
    Gap,
    GapKind,
    GapPoint,
    SetCase,
    classify_set,
    h0_eval,
    h0_log_oracle,
    h0_values,
    independent_mass,
    krein_from_h0,
    krein_xi,
    make_divisor,
    point_mass,
    point_mass_limit,
)
from refless.services.jacobi import free_m_function, strip_coefficients
from refless.services.moebius import (
    KanCoordinates,
    MoebiusElement,
    herglotz_metric,
    kan_compose,
    metric_grid,
)
from refless.services.orbits import (
    GElement,
    act,
    degeneration_profile,
    dirac_representative,
    jacobi_orbit_data,
    jacobi_representative,
    schrodinger_representative,
    twisted_shift_check,
)
from refless.services.systems import (
    Normalization,
    ReflectionlessSystem,
    Side,
    SingularSystem,
    System,
    build_system,
    eval_m,
    extract_parameters,
    nu_plus_total,
    reflectionless_defect,
    system_asymptotics,
    system_distance,
)

logger = logging.getLogger(__name__)

INF = math.inf

REFERENCE_BANDS: dict[SetCase, tuple[tuple[tuple[float, float], ...], ...]] = {
    SetCase.TWO_UNBOUNDED: (
        ((-INF, -1.0), (1.0, INF)),
        ((-INF, -2.0), (-1.0, 0.5), (1.5, INF)),
    ),
    SetCase.ONE_UNBOUNDED: (
        ((0.0, INF),),
        ((0.0, 1.0), (2.0, INF)),
    ),
    SetCase.COMPACT: (
        ((-2.0, 2.0),),
        ((-2.0, -0.5), (0.5, 2.0)),
    ),
}

CONFIG_CHECKS = (
    "reflectionless",
    "herglotz",
    "additivity",
    "oracle",
    "krein",
    "masses",
    "structure",
    "roundtrip",
)


@dataclass(frozen=True)
class CheckResult:
    name: str
    value: float
    threshold: float
    passed: bool

    def format_line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{self.name} value={self.value:.17g} threshold={self.threshold:.17g} {status}"


def _at_most(name: str, value: float, threshold: float) -> CheckResult:
    return CheckResult(name, float(value), float(threshold), bool(value <= threshold))


def _above(name: str, value: float, threshold: float) -> CheckResult:
    return CheckResult(name, float(value), float(threshold), bool(value > threshold))


# Random draws ---------------------------------------------------------------


def reference_sets(case: SetCase) -> list[FiniteGapSet]:
    return [classify_set(bands) for bands in REFERENCE_BANDS[case]]


def random_gap_point(rng: np.random.Generator, gap: Gap, allow_infinite: bool = True) -> GapPoint:
    s = int(rng.integers(0, 2))
    if gap.kind == GapKind.BOUNDED:
        return GapPoint(gap.left + (gap.right - gap.left) * rng.uniform(0.02, 0.98), s)
    if allow_infinite and rng.random() < 0.25:
        return GapPoint(gap.left if gap.kind == GapKind.LEFT else gap.right, 0)
    distance = 0.05 + rng.exponential(2.0)
    if gap.kind == GapKind.LEFT:
        return GapPoint(gap.right - distance, s)
    return GapPoint(gap.left + distance, s)


def random_divisor(
    rng: np.random.Generator, gap_set: FiniteGapSet, allow_infinite: bool = True
) -> Divisor:
    points = [random_gap_point(rng, gap, allow_infinite) for gap in gap_set.gaps]
    g = None
    if (
        gap_set.case == SetCase.COMPACT
        and points[0].mu == -INF
        and points[-1].mu == INF
    ):
        g = float(rng.uniform(-0.5, 0.5))
    return make_divisor(gap_set, points, g)


def random_system(
    rng: np.random.Generator, gap_set: FiniteGapSet, allow_infinite: bool = True
) -> ReflectionlessSystem:
    div = random_divisor(rng, gap_set, allow_infinite)
    norm = Normalization(float(rng.uniform(-2.0, 2.0)), float(rng.uniform(0.3, 3.0)))
    return build_system(gap_set, div, norm)


def random_moebius(rng: np.random.Generator) -> MoebiusElement:
    point = complex(rng.uniform(-2.0, 2.0), rng.uniform(0.25, 4.0))
    angle = complex(np.exp(2j * rng.uniform(0.0, math.pi)))
    return kan_compose(KanCoordinates(point=point, angle=angle))


def random_band_points(
    rng: np.random.Generator, gap_set: FiniteGapSet, count: int
) -> list[float]:
    """Points inside the bands, kept 1e-3 away from the edges."""

    points = []
    while len(points) < count:
        lo, hi = gap_set.bands[int(rng.integers(len(gap_set.bands)))]
        if math.isinf(lo) and math.isinf(hi):
            t = rng.normal(0.0, 3.0)
        elif math.isinf(lo):
            t = hi - rng.exponential(2.0)
        elif math.isinf(hi):
            t = lo + rng.exponential(2.0)
        else:
            t = rng.uniform(lo, hi)
        if min(abs(t - edge) for edge in gap_set.endpoints) > 1e-3:
            points.append(float(t))
    return points


def random_admissible_points(
    rng: np.random.Generator, gap_set: FiniteGapSet, div: Divisor, count: int
) -> list[float]:
    """Points in bands and gaps, 1e-3 away from band edges and finite divisor points."""

    intervals = [*gap_set.bands, *((gap.left, gap.right) for gap in gap_set.gaps)]
    exceptional = [*gap_set.endpoints, *(mu for mu in div.mus if math.isfinite(mu))]
    points = []
    while len(points) < count:
        lo, hi = intervals[int(rng.integers(len(intervals)))]
        if math.isinf(lo):
            t = hi - rng.exponential(2.0)
        elif math.isinf(hi):
            t = lo + rng.exponential(2.0)
        else:
            t = rng.uniform(lo, hi)
        if min(abs(t - x) for x in exceptional) > 1e-3:
            points.append(float(t))
    return points


def krein_deviation(gap_set: FiniteGapSet, div: Divisor, points: Iterable[float]) -> float:
    return max(
        abs(krein_from_h0(gap_set, div, t) - krein_xi(gap_set, div, t)) for t in points
    )


def band_probe_points(gap_set: FiniteGapSet) -> list[float]:
    points = []
    for lo, hi in gap_set.bands:
        if math.isinf(lo) and math.isinf(hi):
            points.append(0.0)
        elif math.isinf(lo):
            points.append(hi - 1.0)
        elif math.isinf(hi):
            points.append(lo + 1.0)
        else:
            points.append(0.5 * (lo + hi))
    return points


# Per-configuration checks ---------------------------------------------------


def _roundtrip_deviation(system: ReflectionlessSystem) -> float:
    result = extract_parameters(system.m_plus, system.gap_set)
    if isinstance(result, SingularSystem):
        return INF
    div, norm = result
    deviation = max(abs(norm.A_plus - system.norm.A_plus), abs(norm.D - system.norm.D))
    for got, want in zip(div.points, system.div.points):
        if got.s != want.s or (math.isinf(got.mu) or math.isinf(want.mu)) and got.mu != want.mu:
            return INF
        if math.isfinite(want.mu):
            deviation = max(deviation, abs(got.mu - want.mu) / max(1.0, abs(want.mu)))
    if div.g is not None and system.div.g is not None:
        deviation = max(deviation, abs(div.g - system.div.g))
    return deviation


def run_config_checks(
    system: ReflectionlessSystem,
    names: Iterable[str] | None = None,
    t: float | None = None,
    tolerances: dict[str, float] | None = None,
) -> list[CheckResult]:
    """Checks on a single system; ``t`` pins the reflectionless probe point."""

    tol = dict(get_settings().tolerances)
    tol.update(tolerances or {})
    grid = metric_grid(get_settings().metric_grid_n)
    results: list[CheckResult] = []
    for name in names or CONFIG_CHECKS:
        if name == "reflectionless":
            probes = [t] if t is not None else band_probe_points(system.gap_set)
            defect = max(reflectionless_defect(system, probe) for probe in probes)
            results.append(_at_most(name, defect, tol["reflectionless"]))
        elif name == "herglotz":
            lowest = min(
                float(np.min(system.values(side, grid).imag)) for side in (Side.PLUS, Side.MINUS)
            )
            results.append(_above(name, lowest, tol["herglotz"]))
        elif name == "additivity":
            h = system.norm.D * h0_values(system.gap_set, system.div, grid)
            total = system.values(Side.PLUS, grid) + system.values(Side.MINUS, grid)
            results.append(_at_most(name, float(np.max(np.abs(total - h) / np.abs(h))), tol["additivity"]))
        elif name == "oracle":
            worst = 0.0
            for z in grid[:: max(1, len(grid) // 50)]:
                value = h0_eval(system.gap_set, system.div, z)
                worst = max(worst, abs(h0_log_oracle(system.gap_set, system.div, z) - value) / abs(value))
            results.append(_at_most(name, worst, tol["oracle"]))
        elif name == "krein":
            rng = np.random.default_rng(0)
            points = random_admissible_points(rng, system.gap_set, system.div, 100)
            deviation = krein_deviation(system.gap_set, system.div, points)
            results.append(_at_most(name, deviation, tol["krein"]))
        elif name == "masses":
            mass = independent_mass(system.gap_set, system.div, system.rep)
            results.append(_at_most(name, abs(mass - system.rep.nu_total), tol["masses"]))
        elif name == "structure":
            at_i = complex(eval_m(system, Side.PLUS, 1j))
            predicted = system.norm.A_plus + 1j * system.norm.D * nu_plus_total(system)
            results.append(_at_most(name, abs(at_i - predicted), tol["masses"]))
        elif name == "roundtrip":
            results.append(_at_most(name, _roundtrip_deviation(system), tol["roundtrip_mu"]))
        else:
            raise ValueError(f"Unknown check '{name}'")
    return results


# Acceptance battery ---------------------------------------------------------


class AcceptanceSuite:
    """Seeded property battery over the reference sets of every case."""

    def __init__(self, seed: int = 20240611) -> None:
        self.seed = seed
        logger.debug(f"AcceptanceSuite initialised with seed {seed}")

    def _count(self, base: int) -> int:
        return max(1, int(round(base * get_settings().suite_scale)))

    def _rng(self, offset: int) -> np.random.Generator:
        return np.random.default_rng(self.seed + offset)

    def run(self, tolerances: dict[str, float] | None = None) -> list[CheckResult]:
        tol = dict(get_settings().tolerances)
        tol.update(tolerances or {})
        battery: list[Callable[[dict[str, float]], list[CheckResult]]] = [
            self.check_free_jacobi,
            self.check_oracle,
            self.check_krein,
            self.check_representation,
            self.check_point_masses,
            self.check_positivity,
            self.check_roundtrip,
            self.check_group_action,
            self.check_degeneration,
            self.check_twisted_shift,
        ]
        results: list[CheckResult] = []
        for check in battery:
            found = check(tol)
            logger.info(f"{check.__name__}: {sum(r.passed for r in found)}/{len(found)} passed")
            results.extend(found)
        return results

    def _free_jacobi(self) -> ReflectionlessSystem:
        gap_set = classify_set([(-2.0, 2.0)])
        div = make_divisor(gap_set, [GapPoint(-INF, 0), GapPoint(INF, 0)], g=-0.5)
        return build_system(gap_set, div, Normalization(0.0, 1.0))

    def check_free_jacobi(self, tol: dict[str, float]) -> list[CheckResult]:
        system = self._free_jacobi()
        window = strip_coefficients(system.m_plus, 5, 2.25)
        deviation = max(
            max(abs(a - 1.0) for a in window.a), max(abs(b) for b in window.b)
        )
        data = jacobi_orbit_data(system)
        return [
            _at_most("free_jacobi_coefficients", deviation, tol["free_jacobi"]),
            _at_most("free_jacobi_t", data.t, 1e-8),
        ]

    def check_oracle(self, tol: dict[str, float]) -> list[CheckResult]:
        rng = self._rng(1)
        results = []
        for case in SetCase:
            worst = 0.0
            for gap_set in reference_sets(case):
                for _ in range(self._count(50)):
                    system = random_system(rng, gap_set)
                    for _ in range(10):
                        z = complex(rng.uniform(-4.0, 4.0), rng.uniform(0.05, 4.0))
                        value = h0_eval(gap_set, system.div, z)
                        oracle = h0_log_oracle(gap_set, system.div, z)
                        worst = max(worst, abs(oracle - value) / abs(value))
            results.append(_at_most(f"oracle[{case.value}]", worst, tol["oracle"]))
        return results

    def check_krein(self, tol: dict[str, float]) -> list[CheckResult]:
        rng = self._rng(8)
        results = []
        for case in SetCase:
            worst = 0.0
            for gap_set in reference_sets(case):
                for _ in range(self._count(10)):
                    div = random_divisor(rng, gap_set)
                    points = random_admissible_points(rng, gap_set, div, 100)
                    worst = max(worst, krein_deviation(gap_set, div, points))
            results.append(_at_most(f"krein[{case.value}]", worst, tol["krein"]))
        return results

    def check_representation(self, tol: dict[str, float]) -> list[CheckResult]:
        rng = self._rng(2)
        results = []
        for case in SetCase:
            worst = 0.0
            for gap_set in reference_sets(case):
                for _ in range(self._count(50)):
                    system = random_system(rng, gap_set)
                    mass = independent_mass(gap_set, system.div, system.rep)
                    worst = max(worst, abs(mass - system.rep.nu_total))
            results.append(_at_most(f"masses[{case.value}]", worst, tol["masses"]))
            # nu_total is Im h0(i)
            totals = [
                h0_eval(gap_set, random_divisor(rng, gap_set), 1j).imag
                for gap_set in reference_sets(case)
                for _ in range(self._count(1000))
            ]
            results.append(
                CheckResult(
                    f"uniform_bounds[{case.value}]",
                    float(min(totals)),
                    0.0,
                    bool(min(totals) > 0 and math.isfinite(max(totals))),
                )
            )
        return results

    def check_point_masses(self, tol: dict[str, float]) -> list[CheckResult]:
        rng = self._rng(3)
        worst = 0.0
        for case in SetCase:
            for gap_set in reference_sets(case):
                for _ in range(self._count(20)):
                    system = random_system(rng, gap_set, allow_infinite=False)
                    for index, weight in enumerate(system.rep.w):
                        if weight > 0:
                            limit = point_mass_limit(gap_set, system.div, index)
                            worst = max(worst, abs(limit - weight) / weight)
        gap_set = classify_set([(-INF, -1.0), (1.0, INF)])
        edge = make_divisor(gap_set, [GapPoint(1.0 - 1e-9, 1)], snap=0.0)
        return [
            _at_most("point_mass", worst, tol["point_mass"]),
            _at_most("endpoint_mass", point_mass(gap_set, edge, 0), tol["endpoint_mass"]),
        ]

    def check_positivity(self, tol: dict[str, float]) -> list[CheckResult]:
        rng = self._rng(4)
        lowest = INF
        defect = 0.0
        for case in SetCase:
            for gap_set in reference_sets(case):
                for _ in range(self._count(50)):
                    system = random_system(rng, gap_set)
                    z = rng.uniform(-5.0, 5.0, 1000) + 1j * rng.uniform(0.01, 5.0, 1000)
                    for side in Side:
                        lowest = min(lowest, float(np.min(system.values(side, z).imag)))
                    for t in random_band_points(rng, gap_set, 10):
                        defect = max(defect, reflectionless_defect(system, t))
        return [
            _above("herglotz", lowest, tol["herglotz"]),
            _at_most("reflectionless", defect, tol["reflectionless"]),
        ]

    def check_roundtrip(self, tol: dict[str, float]) -> list[CheckResult]:
        rng = self._rng(5)
        results = []
        for case in SetCase:
            worst = 0.0
            for gap_set in reference_sets(case):
                for _ in range(self._count(50)):
                    worst = max(worst, _roundtrip_deviation(random_system(rng, gap_set)))
            results.append(_at_most(f"roundtrip[{case.value}]", worst, tol["roundtrip_mu"]))
        return results

    def check_group_action(self, tol: dict[str, float]) -> list[CheckResult]:
        rng = self._rng(6)
        results = []
        representatives = {
            SetCase.TWO_UNBOUNDED: dirac_representative,
            SetCase.ONE_UNBOUNDED: schrodinger_representative,
            SetCase.COMPACT: jacobi_representative,
        }
        composition = 0.0
        for case, representative in representatives.items():
            worst = 0.0
            system = random_system(rng, reference_sets(case)[0])
            base = representative(system)
            results.append(
                _at_most(f"normal_form[{case.value}]", normal_form_residual(base.system), tol["normal_form"])
            )
            for _ in range(self._count(25)):
                moved = act(random_moebius(rng), system)
                worst = max(worst, system_distance(representative(moved).system, base.system))
            results.append(_at_most(f"representative[{case.value}]", worst, tol["representative"]))
            for _ in range(self._count(25)):
                A = random_moebius(rng)
                B = random_moebius(rng)
                composed = system.m_plus.transformed(B).transformed(A)
                composition = max(
                    composition, herglotz_metric(system.m_plus.transformed(A @ B), composed)
                )
        results.append(_at_most("composition", composition, tol["composition"]))
        results.append(_at_most("g_closure", self._g_closure(rng), tol["roundtrip_mu"]))
        results.append(_above("fixed_point_free", self._nearest_image(rng), 1e-6))
        return results

    def _g_closure(self, rng: np.random.Generator) -> float:
        """Divisor drift when G acts through the generic extraction route."""

        worst = 0.0
        for gap_set in reference_sets(SetCase.TWO_UNBOUNDED):
            for _ in range(self._count(10)):
                system = random_system(rng, gap_set)
                g = GElement.from_affine(rng.uniform(0.5, 2.0), rng.uniform(-1.0, 1.0))
                result = extract_parameters(system.m_plus.transformed(g.to_moebius()), gap_set)
                if isinstance(result, SingularSystem):
                    return INF
                moved = build_system(gap_set, result[0], result[1])
                worst = max(worst, _divisor_deviation(moved, system))
        return worst

    def _nearest_image(self, rng: np.random.Generator) -> float:
        nearest = INF
        cases = list(SetCase)
        for index in range(self._count(100)):
            A = random_moebius(rng)
            if A.isclose(MoebiusElement.identity(), 1e-2):
                continue
            system = random_system(rng, reference_sets(cases[index % len(cases)])[0])
            nearest = min(nearest, system_distance(act(A, system), system))
        return nearest

    def check_degeneration(self, tol: dict[str, float]) -> list[CheckResult]:
        rng = self._rng(7)
        ns = list(range(10, 201, 10))
        results = []
        for case in SetCase:
            system = random_system(rng, reference_sets(case)[0])
            for a in (0.5, INF):
                profile = degeneration_profile(system, a, ns)
                increase = max(later - earlier for earlier, later in zip(profile, profile[1:]))
                label = "inf" if math.isinf(a) else f"{a:g}"
                results.append(
                    CheckResult(
                        f"degeneration[{case.value},{label}]",
                        profile[-1],
                        tol["degeneration"],
                        bool(increase < 0 and profile[-1] < tol["degeneration"]),
                    )
                )
        return results

    def check_twisted_shift(self, tol: dict[str, float]) -> list[CheckResult]:
        free = free_m_function()
        return [
            _at_most("twisted_shift", twisted_shift_check(free, 1.0, 0.0, 1.0), tol["twisted_shift"]),
            _above(
                "twisted_shift_probe",
                twisted_shift_check(free, 1.1, 0.0, 1.0),
                tol["twisted_shift_probe"],
            ),
        ]


acceptance_suite = AcceptanceSuite()


def run_suite(tolerances: dict[str, float] | None = None) -> list[CheckResult]:
    return acceptance_suite.run(tolerances)


def all_passed(results: Sequence[CheckResult]) -> bool:
    return all(result.passed for result in results)


def normal_form_residual(normal: System) -> float:
    """How far a representative is from the normal form of its case."""

    if isinstance(normal, SingularSystem):
        return INF
    if normal.gap_set.case == SetCase.TWO_UNBOUNDED:
        plus = system_asymptotics(normal, Side.PLUS).limit
        minus = system_asymptotics(normal, Side.MINUS).limit
        return max(abs(plus - 1j), abs(minus - 1j))
    if normal.gap_set.case == SetCase.ONE_UNBOUNDED:
        if normal.div.points[0].mu != -INF:
            return INF
        return max(abs(normal.norm.A_plus), abs(normal.norm.D - 1.0))
    data = system_asymptotics(normal, Side.PLUS)
    return max(data.b0, abs(data.a), abs(data.c + 1.0), abs(data.d2))


def _divisor_deviation(first: System, second: System) -> float:
    if isinstance(first, SingularSystem) or isinstance(second, SingularSystem):
        return INF
    worst = 0.0
    for p, q in zip(first.div.points, second.div.points):
        if p.s != q.s or (math.isinf(p.mu) or math.isinf(q.mu)) and p.mu != q.mu:
            return INF
        if math.isfinite(p.mu):
            worst = max(worst, abs(p.mu - q.mu))
    return worst
