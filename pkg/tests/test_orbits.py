"""Tests for the group action and the orbit normal forms."""

import math

import numpy as np
import pytest

from refless.services.gapset import make_divisor
from refless.services.moebius import INFINITY, MoebiusElement, herglotz_metric
from refless.services.orbits import (
    CaseMismatchError,
    GElement,
    NormalFormError,
    OrbitError,
    OrbitKind,
    a_t_family,
    act,
    degeneration_profile,
    dirac_representative,
    insert_singular_interval,
    jacobi_orbit_data,
    jacobi_representative,
    schrodinger_representative,
    twisted_shift_check,
    twisted_shift_matrix,
)
from refless.services.checks import random_moebius
from refless.services.jacobi import free_m_function
from refless.services.systems import (
    Normalization,
    Side,
    SingularSystem,
    build_system,
    system_asymptotics,
    system_distance,
)


def test_g_elements_act_affinely_on_the_normalisation(dirac_system) -> None:
    g = GElement.from_affine(4.0, 1.5)
    moved = act(g.to_moebius(), dirac_system)
    assert moved.div == dirac_system.div
    assert moved.norm.A_plus == pytest.approx(1.5)
    assert moved.norm.D == pytest.approx(4.0)
    assert g.apply(1j) == pytest.approx(1.5 + 4.0j)
    assert GElement.from_moebius(g.to_moebius()).c == pytest.approx(2.0)


def test_g_elements_need_to_fix_infinity() -> None:
    with pytest.raises(OrbitError):
        GElement.from_moebius(MoebiusElement.inversion())
    with pytest.raises(OrbitError):
        GElement(c=0.0, a=1.0)


def test_action_on_singular_systems_moves_the_constant() -> None:
    assert act(MoebiusElement.inversion(), SingularSystem(0.0)).a is INFINITY
    assert act(MoebiusElement.translation(2.0), SingularSystem(1.0)) == SingularSystem(3.0)


def test_action_is_pointwise_on_both_m_functions(two_gap_dirac) -> None:
    A = GElement.from_affine(0.5, -1.0).to_moebius()
    moved = act(A, two_gap_dirac)
    z = np.array([1j, 0.3 + 2.0j])
    assert moved.values(Side.PLUS, z) == pytest.approx(A.apply_array(two_gap_dirac.values(Side.PLUS, z)))
    minus = -A.apply_array(-two_gap_dirac.values(Side.MINUS, z))
    assert moved.values(Side.MINUS, z) == pytest.approx(minus)


def test_action_composes_for_g_elements(two_gap_dirac) -> None:
    A = GElement.from_affine(2.0, 0.3).to_moebius()
    B = GElement.from_affine(0.7, -1.1).to_moebius()
    assert system_distance(act(A, act(B, two_gap_dirac)), act(A @ B, two_gap_dirac)) < 1e-12


def test_action_composes_for_general_elements(two_gap_dirac, rng) -> None:
    for _ in range(10):
        A = random_moebius(rng)
        B = random_moebius(rng)
        composed = two_gap_dirac.m_plus.transformed(B).transformed(A)
        assert herglotz_metric(two_gap_dirac.m_plus.transformed(A @ B), composed) < 1e-9
    A, B = MoebiusElement.rotation(0.4), MoebiusElement.rotation(-0.9)
    assert system_distance(act(A, act(B, two_gap_dirac)), act(A @ B, two_gap_dirac)) < 1e-6


def test_general_elements_keep_the_spectrum(dirac_system) -> None:
    A = MoebiusElement.rotation(0.4)
    moved = act(A, dirac_system)
    assert moved.gap_set == dirac_system.gap_set
    z = np.array([2j, 0.5 + 1.5j, -1.0 + 2.5j])
    expected = A.apply_array(dirac_system.values(Side.PLUS, z))
    assert moved.values(Side.PLUS, z) == pytest.approx(expected, abs=1e-6)


def test_dirac_example_is_already_normal(dirac_system) -> None:
    representative = dirac_representative(dirac_system)
    assert representative.kind == OrbitKind.DIRAC
    assert representative.transform.isclose(MoebiusElement.identity(), 1e-8)


def test_dirac_representative_is_orbit_invariant(two_gap_dirac) -> None:
    base = dirac_representative(two_gap_dirac)
    assert system_asymptotics(base.system, Side.PLUS).limit == pytest.approx(1j, abs=1e-7)
    assert system_asymptotics(base.system, Side.MINUS).limit == pytest.approx(1j, abs=1e-7)
    moved = act(GElement.from_affine(3.0, -2.0).to_moebius(), two_gap_dirac)
    assert system_distance(dirac_representative(moved).system, base.system) < 1e-7


def test_representatives_check_the_case(free_jacobi, dirac_system) -> None:
    with pytest.raises(CaseMismatchError) as excinfo:
        schrodinger_representative(dirac_system)
    assert excinfo.value.exit_code == 5
    with pytest.raises(CaseMismatchError):
        dirac_representative(free_jacobi)
    with pytest.raises(CaseMismatchError):
        jacobi_representative(SingularSystem(0.0))


def test_schrodinger_normal_form(schrodinger_system) -> None:
    representative = schrodinger_representative(schrodinger_system)
    normal = representative.system
    assert normal.div.points[0].mu == -math.inf
    assert normal.norm.A_plus == pytest.approx(0.0, abs=1e-7)
    assert normal.norm.D == pytest.approx(1.0, abs=1e-7)
    again = schrodinger_representative(normal)
    assert again.transform.isclose(MoebiusElement.identity(), 1e-6)


def test_schrodinger_representative_is_orbit_invariant(schrodinger_system, rng) -> None:
    base = schrodinger_representative(schrodinger_system)
    for _ in range(3):
        moved = act(random_moebius(rng), schrodinger_system)
        assert system_distance(schrodinger_representative(moved).system, base.system) < 1e-7


def test_free_jacobi_is_in_jacobi_normal_form(free_jacobi) -> None:
    representative = jacobi_representative(free_jacobi)
    assert representative.transform.isclose(MoebiusElement.identity())


def test_jacobi_representative_removes_the_pole_at_infinity(free_jacobi) -> None:
    div = make_divisor(free_jacobi.gap_set, free_jacobi.div.points, g=0.5)
    system = build_system(free_jacobi.gap_set, div, Normalization(0.0, 1.0))
    representative = jacobi_representative(system)
    data = system_asymptotics(representative.system, Side.PLUS)
    assert data.b0 == pytest.approx(0.0, abs=1e-7)
    assert data.a == pytest.approx(0.0, abs=1e-7)
    assert data.c == pytest.approx(-1.0, abs=1e-7)
    assert data.d2 == pytest.approx(0.0, abs=1e-7)


def test_jacobi_representative_is_orbit_invariant(one_gap_jacobi, rng) -> None:
    base = jacobi_representative(one_gap_jacobi)
    for _ in range(3):
        moved = act(random_moebius(rng), one_gap_jacobi)
        assert system_distance(jacobi_representative(moved).system, base.system) < 1e-7


def test_free_jacobi_orbit_data(free_jacobi) -> None:
    data = jacobi_orbit_data(free_jacobi)
    assert data.t == pytest.approx(0.0, abs=1e-8)
    assert data.a0 == pytest.approx(1.0, abs=1e-6)
    assert data.coefficients.a == pytest.approx((1.0,) * 5, abs=1e-6)
    assert data.coefficients.b == pytest.approx((0.0,) * 5, abs=1e-6)


def test_inserting_a_singular_interval_shifts_t(free_jacobi) -> None:
    inserted = insert_singular_interval(free_jacobi, 0.25)
    assert inserted.div.g == pytest.approx(-0.25)
    z = np.array([2j])
    assert inserted.values(Side.PLUS, z) == pytest.approx(free_jacobi.values(Side.PLUS, z) + 0.25 * z)
    data = jacobi_orbit_data(inserted)
    assert data.t == pytest.approx(0.25, abs=1e-6)
    assert data.coefficients.a == pytest.approx((1.0,) * 5, abs=1e-6)
    assert data.coefficients.b == pytest.approx((0.0,) * 5, abs=1e-6)


def test_singular_interval_needs_both_outer_points_at_infinity(dirac_system, free_jacobi) -> None:
    with pytest.raises(OrbitError):
        insert_singular_interval(dirac_system, 0.1)
    with pytest.raises(OrbitError):
        insert_singular_interval(free_jacobi, 2.0)


def test_twisted_shift_identity_for_the_free_m_function() -> None:
    free = free_m_function()
    assert twisted_shift_check(free, 1.0, 0.0, 1.0) < 1e-10
    assert twisted_shift_check(free, 1.1, 0.0, 1.0) > 1e-3


def test_twisted_shift_matrix_needs_positive_a0() -> None:
    with pytest.raises(OrbitError):
        twisted_shift_matrix(0.0, 1.0)


def test_interpolation_family_endpoints() -> None:
    assert a_t_family(0.0, 0.7, 2.0).isclose(MoebiusElement.identity())
    assert a_t_family(1.0, 0.0, 1.0).isclose(MoebiusElement(0.0, -1.0, 1.0, 0.0))
    expected = MoebiusElement.from_matrix(
        np.diag([2.0, 0.5]) @ np.array([[1.0, 0.0], [0.5, 1.0]]) @ np.array([[0.0, -1.0], [1.0, 0.0]])
    )
    assert a_t_family(1.0, 0.5, 2.0).isclose(expected)
    with pytest.raises(OrbitError):
        a_t_family(1.5, 0.0, 1.0)


def test_degeneration_towards_singular_systems(one_gap_jacobi) -> None:
    ns = list(range(10, 201, 10))
    for a in (0.5, math.inf):
        profile = degeneration_profile(one_gap_jacobi, a, ns)
        assert all(later < earlier for earlier, later in zip(profile, profile[1:]))
        assert profile[-1] < 0.05


def test_orbit_errors_carry_their_exit_codes() -> None:
    assert NormalFormError("x").exit_code == 6
    assert CaseMismatchError("x").exit_code == 5
    assert OrbitError("x").exit_code == 3
