"""Tests for sphere geometry, PSL(2, R) elements and Herglotz maps."""

import math

import numpy as np
import pytest

from refless.services.moebius import (
    INFINITY,
    DegenerateMatrix,
    HerglotzMap,
    KanCoordinates,
    MoebiusElement,
    MoebiusError,
    chordal_distance,
    chordal_distance_array,
    herglotz_metric,
    kan_compose,
    kan_decompose,
    metric_grid,
    mobius_apply,
    mobius_invert,
    to_sphere_point,
)


def test_chordal_distance_between_zero_and_infinity_is_the_diameter() -> None:
    assert chordal_distance(0j, INFINITY) == pytest.approx(2.0)
    assert chordal_distance(INFINITY, INFINITY) == 0.0
    assert chordal_distance(1j, -1j) == pytest.approx(2.0)


def test_chordal_distance_array_matches_scalar_version() -> None:
    p = np.array([0.0, 1.0 + 1.0j, np.inf, 2.0j])
    q = np.array([np.inf, 1.0 + 1.0j, 3.0, -1.0])
    expected = [chordal_distance(to_sphere_point(a), to_sphere_point(b)) for a, b in zip(p, q)]
    assert chordal_distance_array(p, q) == pytest.approx(expected)


def test_elements_are_normalised_to_unit_determinant_and_positive_sign() -> None:
    A = MoebiusElement(2.0, 0.0, 0.0, 2.0)
    assert A.entries() == pytest.approx((1.0, 0.0, 0.0, 1.0))
    B = MoebiusElement(-1.0, -2.0, 0.0, -1.0)
    assert B.entries() == pytest.approx((1.0, 2.0, 0.0, 1.0))
    assert B.det == pytest.approx(1.0)


def test_non_positive_determinant_is_rejected() -> None:
    with pytest.raises(DegenerateMatrix):
        MoebiusElement(1.0, 0.0, 0.0, -1.0)
    with pytest.raises(DegenerateMatrix):
        MoebiusElement(1.0, 2.0, 1.0, 2.0)


def test_inversion_swaps_zero_and_infinity() -> None:
    J = MoebiusElement.inversion()
    assert mobius_apply(J, 0j) is INFINITY
    assert mobius_apply(J, INFINITY) == 0
    assert mobius_apply(J, 1j) == pytest.approx(1j)


def test_composition_acts_as_successive_application() -> None:
    A = MoebiusElement(2.0, 1.0, 1.0, 1.0)
    B = MoebiusElement.rotation(0.7)
    z = 0.3 + 1.2j
    assert mobius_apply(A @ B, z) == pytest.approx(mobius_apply(A, mobius_apply(B, z)))
    assert (A @ mobius_invert(A)).isclose(MoebiusElement.identity())


def test_apply_array_maps_infinite_entries_to_the_image_of_infinity() -> None:
    A = MoebiusElement(1.0, 0.0, 1.0, 1.0)
    values = A.apply_array(np.array([np.inf, -1.0, 1j]))
    assert values[0] == pytest.approx(1.0)
    assert not np.isfinite(values[1])
    assert values[2] == pytest.approx(1j / (1j + 1.0))


def test_kan_coordinates_round_trip() -> None:
    A = MoebiusElement(1.5, -0.3, 0.8, 0.5)
    coords = kan_decompose(A)
    assert coords.point == pytest.approx(complex(mobius_apply(A, 1j)))
    assert kan_compose(coords).isclose(A, 1e-12)


def test_kan_rejects_points_off_the_upper_half_plane() -> None:
    with pytest.raises(MoebiusError):
        KanCoordinates(point=1.0 + 0j, angle=1.0 + 0j)


def test_transformed_constant_map_stays_constant() -> None:
    zero = HerglotzMap.constant_map(0.0)
    image = zero.transformed(MoebiusElement.inversion())
    assert image.is_constant
    assert image.constant is INFINITY


def test_herglotz_metric_between_singular_constants() -> None:
    zero = HerglotzMap.constant_map(0.0)
    infinity = HerglotzMap.constant_map(INFINITY)
    assert herglotz_metric(zero, infinity) == pytest.approx(2.0)
    assert herglotz_metric(zero, zero) == 0.0


def test_herglotz_metric_detects_a_translation() -> None:
    F = HerglotzMap(lambda z: np.asarray(z, dtype=complex), label="identity")
    shifted = F.transformed(MoebiusElement.translation(0.1))
    assert herglotz_metric(F, F) == 0.0
    assert herglotz_metric(F, shifted) > 0.0


def test_metric_grid_refines_as_a_superset() -> None:
    coarse = metric_grid(8)
    fine = metric_grid(16)
    assert len(coarse) == 1 + 8 * 8
    assert np.all(coarse.imag > 0)
    for point in coarse:
        assert np.min(np.abs(fine - point)) < 1e-12
    assert math.isclose(abs(coarse[-1] - 2j), 1.0)
