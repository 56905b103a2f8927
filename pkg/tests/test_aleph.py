from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from alephmap.aleph import (
    Compensation,
    CsfMaxMode,
    CsfParams,
    compensate_velocity,
    compute_aleph,
    csf_peak,
    csf_value,
    elevation_factor,
    rho_max,
)
from alephmap.pyramid import BAND_FREQUENCIES


def csf_ref(rho, v, c0=1.14, c1=0.67, c2=1.7):
    """Reference CSF written out independently, scalar only."""
    k = 6.1 + 7.3 * abs(math.log10(c2 * v / 3.0)) ** 3
    rm = 45.9 / (c2 * v + 2.0)
    return k * c0 * c2 * v * (2 * math.pi * c1 * rho) ** 2 * math.exp(-4 * math.pi * c1 * rho / rm)


# ---------------------------------------------------------------------------
# compensation


@pytest.mark.parametrize(
    "v, s, mode, expect",
    [
        (0.0, 0.0, "full", 0.15),
        (10.0, 0.0, "saliency", 9.85),
        (10.0, 1.0, "saliency", 0.15),
        (10.0, 0.3, "zero", 0.15),
        (10.0, 0.0, "full", 10 - (8.2 + 0.15)),
        (200.0, 0.0, "full", 120.0),  # pursuit saturates at v_max
    ],
)
def test_compensation_examples(v, s, mode, expect):
    assert compensate_velocity(v, s, mode) == pytest.approx(expect)


def test_negative_speed_rejected():
    with pytest.raises(ValueError):
        compensate_velocity(-1.0)


# ---------------------------------------------------------------------------
# CSF


def test_k_correction_vanishes_at_three():
    v = 3.0 / 1.7
    assert csf_value(1.0, v) == pytest.approx(6.1 * 1.14 * 1.7 * v * (2 * math.pi * 0.67) ** 2
                                              * math.exp(-4 * math.pi * 0.67 / rho_max(v)), rel=1e-12)


def test_rho_max_static():
    assert float(rho_max(0.15)) == pytest.approx(20.355, abs=1e-3)


def test_static_peak_value():
    rho, cmax = csf_peak(0.15)
    assert rho == pytest.approx(4.835, abs=1e-3)
    assert cmax == pytest.approx(245, abs=5)
    assert cmax == pytest.approx(csf_ref(rho, 0.15), rel=1e-12)


@pytest.mark.parametrize("v", [0.15, 1.0, 5.0, 10.0, 40.0, 80.0])
def test_peak_matches_grid_search(v):
    grid = np.linspace(60.0 / 1e4, 60.0, 10_000)
    vals = np.array([csf_ref(r, v) for r in grid])
    j = int(np.argmax(vals))
    rho, cmax = csf_peak(v)
    assert rho == pytest.approx(grid[j], rel=1e-3, abs=60.0 / 1e4)
    assert cmax == pytest.approx(vals[j], rel=1e-3)
    # exponent is exactly -2 at the peak
    assert cmax == pytest.approx((6.1 + 7.3 * abs(math.log10(1.7 * v / 3)) ** 3) * 1.14 * 1.7 * v
                                 * float(rho_max(v)) ** 2 * math.exp(-2), rel=1e-12)


def test_peak_shifts_left_with_speed():
    rho, _ = csf_peak(10.0)
    assert float(rho_max(10.0)) == pytest.approx(45.9 / 19)
    assert rho == pytest.approx(0.574, abs=1e-3)


def test_literal_mode_returns_the_frequency():
    p = CsfParams(csf_max_mode=CsfMaxMode.LITERAL)
    rho, cmax = csf_peak(0.15, p)
    assert cmax == rho == pytest.approx(45.9 / (1.7 * 0.15 + 2) / (2 * math.pi * 0.67), rel=1e-12)
    # the branch point moves out to rho_max: 16 cpd < 20.355 is not elevated
    assert elevation_factor(16.0, 0.15, p) == 1.0


# ---------------------------------------------------------------------------
# elevation


def test_below_peak_is_not_elevated():
    assert elevation_factor(4.0, 0.15) == 1.0
    assert elevation_factor(0.25, 0.15) == 1.0


def test_elevation_is_continuous_at_the_peak():
    rho, _ = csf_peak(2.0)
    assert elevation_factor(rho * (1 + 1e-9), 2.0) == pytest.approx(1.0, abs=1e-6)


def test_fast_fine_band_elevation():
    f = elevation_factor(16.0, 10.0)
    rho, cmax = csf_peak(10.0)
    assert f >= 10.0
    assert f == pytest.approx(min(csf_ref(rho, 10.0) / csf_ref(16.0, 10.0), 250.0), rel=1e-9)


def test_elevation_ceiling():
    assert elevation_factor(16.0, 80.0) == 250.0


# ---------------------------------------------------------------------------
# aleph map


def _bands(shape, band):
    R = np.zeros((7,) + shape)
    R[band] = 1.0
    return R


def test_degenerate_static_pixel_is_one():
    out = compute_aleph(_bands((3, 3), 6), np.zeros((3, 3)), np.zeros((3, 3)))
    np.testing.assert_array_equal(out.values, 1.0)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.0, 100.0), st.floats(0.0, 1.0), st.lists(st.floats(0.0, 1.0), min_size=7, max_size=7))
def test_aleph_is_bounded(v, s, w):
    w = np.asarray(w) + 1e-9
    R = (w / w.sum())[:, None, None] * np.ones((7, 2, 2))
    a = compute_aleph(R, np.full((2, 2), v), np.full((2, 2), s)).values
    assert (a >= 1.0).all() and (a <= 250.0).all()


def test_aleph_is_monotone_in_speed():
    rng = np.random.default_rng(0)
    w = rng.random((7, 1, 64))
    R = w / w.sum(axis=0)
    S = np.full((1, 64), 0.4)
    prev = None
    for v in np.linspace(0.0, 60.0, 61):
        a = compute_aleph(R, np.full((1, 64), v), S).values
        if prev is not None:
            assert (a >= prev - 1e-12).all()
        prev = a


def test_full_saliency_protects_moving_pixels():
    rng = np.random.default_rng(1)
    w = rng.random((7, 8, 8))
    R = w / w.sum(axis=0)
    speed = rng.random((8, 8)) * 40
    sal = compute_aleph(R, speed, np.ones((8, 8)), Compensation.SALIENCY).values
    still = compute_aleph(R, speed, np.ones((8, 8)), Compensation.ZERO).values
    np.testing.assert_allclose(sal, still, rtol=1e-12)


def test_mode_ordering_with_sub_tracking_saliency():
    rng = np.random.default_rng(2)
    w = rng.random((7, 32, 32))
    R = w / w.sum(axis=0)
    speed = rng.random((32, 32)) * 30
    S = rng.random((32, 32)) * 0.82
    z, f, s = (compute_aleph(R, speed, S, m).values for m in Compensation)
    assert (z <= f + 1e-12).all()
    assert (f <= s + 1e-12).all()


def test_dimension_mismatch():
    with pytest.raises(ValueError, match="differ"):
        compute_aleph(_bands((4, 4), 0), np.zeros((4, 5)), np.zeros((4, 4)))


def test_band_order_matches_frequencies():
    R = _bands((1, 1), 0)
    a = compute_aleph(R, np.full((1, 1), 10.0), np.zeros((1, 1))).values
    assert a[0, 0] == pytest.approx(elevation_factor(BAND_FREQUENCIES[0], compensate_velocity(10.0, 0.0)))
