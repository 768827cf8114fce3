"""Tests for the per-configuration checks and the acceptance battery."""

import pytest

from refless.core.config import get_settings
from refless.services.checks import (
    CONFIG_CHECKS,
    AcceptanceSuite,
    CheckResult,
    all_passed,
    normal_form_residual,
    random_system,
    reference_sets,
    run_config_checks,
    run_suite,
)
from refless.services.gapset import GapKind, SetCase
from refless.services.systems import SingularSystem


def test_format_line() -> None:
    result = CheckResult("oracle", 0.25, 0.5, True)
    assert result.format_line() == "oracle value=0.25 threshold=0.5 PASS"
    assert CheckResult("x", 2.0, 1.0, False).format_line().endswith("FAIL")


def test_reflectionless_probe_at_a_given_point(free_jacobi) -> None:
    (result,) = run_config_checks(free_jacobi, ["reflectionless"], t=0.0)
    assert result.name == "reflectionless"
    assert result.passed


@pytest.mark.parametrize("fixture", ["free_jacobi", "dirac_system"])
def test_default_checks_pass(fixture: str, request) -> None:
    system = request.getfixturevalue(fixture)
    results = run_config_checks(system)
    assert [r.name for r in results] == list(CONFIG_CHECKS)
    assert all_passed(results), [r.format_line() for r in results if not r.passed]


def test_checks_on_a_two_gap_system(two_gap_dirac) -> None:
    names = [name for name in CONFIG_CHECKS if name != "roundtrip"]
    assert all_passed(run_config_checks(two_gap_dirac, names))


def test_unknown_check_name(free_jacobi) -> None:
    with pytest.raises(ValueError):
        run_config_checks(free_jacobi, ["nonsense"])


def test_tolerance_override_can_fail_a_check(free_jacobi) -> None:
    (result,) = run_config_checks(free_jacobi, ["herglotz"], tolerances={"herglotz": 1e6})
    assert not result.passed


@pytest.mark.parametrize("case", list(SetCase))
def test_random_systems_respect_their_gaps(case: SetCase, rng) -> None:
    for gap_set in reference_sets(case):
        for _ in range(5):
            system = random_system(rng, gap_set)
            assert system.gap_set.case == case
            assert len(system.div.points) == len(gap_set.gaps)
            for gap, point in zip(gap_set.gaps, system.div.points):
                if gap.kind == GapKind.BOUNDED:
                    assert gap.left < point.mu < gap.right
            assert system.norm.D > 0


def test_normal_form_residual(free_jacobi, dirac_system) -> None:
    assert normal_form_residual(free_jacobi) < 1e-7
    assert normal_form_residual(dirac_system) < 1e-7
    assert normal_form_residual(SingularSystem(0.0)) == float("inf")


def test_suite_free_jacobi_and_twisted_shift() -> None:
    suite = AcceptanceSuite()
    tolerances = dict(get_settings().tolerances)
    assert all_passed(suite.check_free_jacobi(tolerances))
    assert all_passed(suite.check_twisted_shift(tolerances))



@pytest.fixture
def quick_suite(monkeypatch: pytest.MonkeyPatch) -> AcceptanceSuite:
    monkeypatch.setenv("REFLESS_SUITE_SCALE", "0.01")
    get_settings.cache_clear()
    return AcceptanceSuite()


def test_full_scale_meets_the_acceptance_sample_sizes() -> None:
    suite = AcceptanceSuite()
    assert get_settings().suite_scale == 1.0
    assert suite._count(50) * 2 * 10 == 1000
    assert suite._count(25) == 25


def test_group_action_battery(quick_suite: AcceptanceSuite) -> None:
    results = quick_suite.check_group_action(dict(get_settings().tolerances))
    names = [r.name for r in results]
    assert "composition" in names and "g_closure" in names and "fixed_point_free" in names
    assert all_passed(results), [r.format_line() for r in results if not r.passed]


def test_krein_battery(quick_suite: AcceptanceSuite) -> None:
    results = quick_suite.check_krein(dict(get_settings().tolerances))
    assert [r.name for r in results] == [f"krein[{case.value}]" for case in SetCase]
    assert all_passed(results)


def test_run_suite_at_a_reduced_scale(quick_suite: AcceptanceSuite) -> None:
    results = run_suite()
    prefixes = {r.name.split("[")[0] for r in results}
    assert {"oracle", "krein", "roundtrip", "representative", "degeneration"} <= prefixes
    assert all_passed(results), [r.format_line() for r in results if not r.passed]
