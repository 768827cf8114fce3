"""Tests for moment recovery and coefficient stripping."""

import numpy as np
import pytest

from refless.services.jacobi import (
    AliasingError,
    JacobiError,
    JacobiWindow,
    MomentBreakdownError,
    MomentSequence,
    free_m_function,
    jacobi_resolvent,
    laurent_moments,
    moments_to_jacobi,
    resolvent_map,
    strip_coefficients,
    strip_once,
)
from refless.services.moebius import HerglotzMap, herglotz_metric

CATALAN_MOMENTS = (1.0, 0.0, 1.0, 0.0, 2.0, 0.0, 5.0, 0.0, 14.0, 0.0, 42.0)


def test_free_m_function_moments_are_catalan_numbers() -> None:
    mom = laurent_moments(free_m_function(), radius=3.0, count=3)
    assert mom.m == pytest.approx(CATALAN_MOMENTS[:7], abs=1e-10)
    assert mom.order == 3


def test_catalan_moments_give_the_free_matrix() -> None:
    window = moments_to_jacobi(MomentSequence(CATALAN_MOMENTS), 5)
    assert window.a == pytest.approx((1.0,) * 5, abs=1e-12)
    assert window.b == pytest.approx((0.0,) * 5, abs=1e-12)


def test_strip_coefficients_of_the_free_m_function() -> None:
    window = strip_coefficients(free_m_function(), 5, radius=2.25)
    assert len(window) == 5
    assert window.a == pytest.approx((1.0,) * 5, abs=1e-6)
    assert window.b == pytest.approx((0.0,) * 5, abs=1e-6)


def test_stripping_the_free_m_function_gives_it_back() -> None:
    free = free_m_function()
    assert herglotz_metric(strip_once(free, 0.0, 1.0), free) < 1e-9


def test_resolvent_of_a_known_window() -> None:
    window = JacobiWindow(a=(1.0, 1.0, 1.0), b=(0.0, 0.0, 0.0))
    assert herglotz_metric(resolvent_map(window), free_m_function()) < 1e-12

    shifted = JacobiWindow(a=(0.5, 1.0), b=(0.3, -0.2))
    moments = laurent_moments(resolvent_map(shifted), radius=4.0, count=2)
    recovered = moments_to_jacobi(moments, 2)
    assert recovered.a == pytest.approx(shifted.a, abs=1e-8)
    assert recovered.b == pytest.approx(shifted.b, abs=1e-8)
    z = np.array([2j, 1.0 + 1.0j])
    assert np.all(jacobi_resolvent(shifted, z).imag > 0)


def test_point_mass_moments_break_down_at_the_second_step() -> None:
    mom = MomentSequence((1.0, 2.0, 4.0))
    with pytest.raises(MomentBreakdownError) as excinfo:
        moments_to_jacobi(mom, 1)
    assert excinfo.value.safe_k == 0
    assert excinfo.value.partial_b == pytest.approx((2.0,))
    assert excinfo.value.exit_code == 3


def test_laurent_moments_detect_positive_powers() -> None:
    growing = HerglotzMap(lambda z: np.asarray(z, dtype=complex) - 1.0 / np.asarray(z), label="z")
    with pytest.raises(AliasingError):
        laurent_moments(growing, radius=3.0, count=2)


def test_moment_count_is_capped() -> None:
    with pytest.raises(JacobiError):
        laurent_moments(free_m_function(), radius=3.0, count=9)


def test_window_validation() -> None:
    with pytest.raises(JacobiError):
        JacobiWindow(a=(1.0, -1.0), b=(0.0, 0.0))
    with pytest.raises(JacobiError):
        JacobiWindow(a=(1.0,), b=(0.0, 0.0))
    with pytest.raises(JacobiError):
        MomentSequence((0.0, 1.0, 1.0))
    assert JacobiWindow(a=(1.0, 2.0), b=(0.0, 1.0)).truncated(1) == JacobiWindow(a=(1.0,), b=(0.0,))


def test_stripping_more_coefficients_keeps_the_first_ones() -> None:
    F = resolvent_map(JacobiWindow(a=(0.8, 1.2, 0.9), b=(0.3, -0.2, 0.1)))
    short = strip_coefficients(F, 3, radius=4.0, cross_check=False)
    long = strip_coefficients(F, 5, radius=4.0, cross_check=False)
    assert long.truncated(3).a == pytest.approx(short.a, abs=1e-8)
    assert long.truncated(3).b == pytest.approx(short.b, abs=1e-8)
    assert short.a == pytest.approx((0.8, 1.2, 0.9), abs=1e-6)
