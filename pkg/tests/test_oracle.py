from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from alephmap.oracle import (
    TVI_JOINTS,
    SampleAccumulator,
    adaptation_luminance,
    asp_budget,
    compress_accuracy,
    convergence_test,
    disk_footprint,
    noise_inject,
    scale_add_accuracy,
    threshold_map,
    tvi_threshold,
    variance_test,
)

# integer points with x^2 + y^2 <= 15.5^2, enumerated by hand loop once
DISK_31_COUNT = 749


# ---------------------------------------------------------------------------
# ambient accuracy


def test_compress_examples():
    assert compress_accuracy(1.0, 0.1) == pytest.approx(0.1)
    assert compress_accuracy(10.0, 0.1) == pytest.approx(10 / 19)
    assert compress_accuracy(1e9, 0.1) < 1.0
    assert compress_accuracy(1e9, 0.1) == pytest.approx(1.0, abs=1e-8)


@given(st.floats(1.0, 1e6), st.floats(1e-3, 1.0), st.floats(1.0, 1e6))
def test_compress_is_monotone_and_bounded(a, acc, b):
    lo, hi = sorted((a, b))
    x, y = compress_accuracy(lo, acc), compress_accuracy(hi, acc)
    assert acc - 1e-12 <= x <= y <= 1.0 + 1e-12


def test_compress_rejects_nonpositive_accuracy():
    with pytest.raises(ValueError):
        compress_accuracy(2.0, 0.0)


def test_scale_add_examples():
    assert scale_add_accuracy(100.0, 0.1, 100.0) == pytest.approx(1.1)
    assert scale_add_accuracy(1.0, 0.1, 250.0) == pytest.approx(0.104)
    with pytest.raises(ValueError):
        scale_add_accuracy(1.0, 0.1, 0.0)


# ---------------------------------------------------------------------------
# TVI


def test_tvi_weber_segment():
    assert tvi_threshold(100.0) == pytest.approx(10 ** (2 - 1.255), rel=1e-12)
    assert tvi_threshold(100.0) == pytest.approx(5.56, abs=0.01)
    assert tvi_threshold(1000.0) / tvi_threshold(100.0) == pytest.approx(10.0, rel=0.01)


def test_tvi_is_monotone():
    La = np.logspace(-6, 6, 20001)
    t = tvi_threshold(La)
    assert (np.diff(t) >= 0).all()
    assert tvi_threshold(0.0) == pytest.approx(10 ** -2.86)


@pytest.mark.parametrize("j", TVI_JOINTS)
def test_tvi_is_continuous_at_joints(j):
    lo, hi = tvi_threshold(10 ** (j - 1e-9)), tvi_threshold(10 ** (j + 1e-9))
    assert abs(np.log10(hi) - np.log10(lo)) <= 1e-3


def test_tvi_rejects_negative():
    with pytest.raises(ValueError):
        tvi_threshold(-1.0)


# ---------------------------------------------------------------------------
# adaptation


def test_disk_pixel_count():
    fp = disk_footprint(31)
    assert fp.shape == (31, 31)
    assert int(fp.sum()) == DISK_31_COUNT


def test_uniform_adaptation():
    np.testing.assert_allclose(adaptation_luminance(np.full((40, 50), 12.5)), 12.5)


def test_half_field_midline():
    lum = np.zeros((64, 64))
    lum[:, 32:] = 100.0
    la = adaptation_luminance(lum)
    # disk centred on column 32 covers the centre column plus one half
    expect = 100.0 * (DISK_31_COUNT + 31) / 2 / DISK_31_COUNT
    assert la[32, 32] == pytest.approx(expect)
    assert abs(la[32, 32] - 50.0) <= 100.0 * 31 / 2 / DISK_31_COUNT + 1e-9


# ---------------------------------------------------------------------------
# thresholds and convergence


def test_threshold_identities():
    la = np.array([[0.5, 10.0], [100.0, 1000.0]])
    t1 = threshold_map(np.ones((2, 2)), la).dL
    np.testing.assert_array_equal(t1, tvi_threshold(la))
    np.testing.assert_array_equal(threshold_map(np.full((2, 2), 2.0), la).dL, 2 * t1)
    assert (t1 > 0).all() and np.isfinite(t1).all()
    with pytest.raises(ValueError):
        threshold_map(np.ones((2, 3)), la)


def test_convergence_boundary():
    dL = np.full((3, 3), 0.5)
    a = np.zeros((3, 3))
    assert convergence_test(a, a, dL).all()
    assert not convergence_test(a, a + 0.5, dL).any()
    assert convergence_test(a, a + 0.25, dL).all()
    with pytest.raises(ValueError):
        convergence_test(a, np.zeros((3, 2)), dL)


# ---------------------------------------------------------------------------
# variance


def test_variance_examples():
    acc = SampleAccumulator()
    acc.extend([3.0, 3.0, 3.0])
    assert acc.variance()[0] == 0.0 and variance_test(acc, 1e-6)
    acc = SampleAccumulator()
    acc.extend([0.0, 2.0 * 1.5])
    assert acc.variance()[0] == pytest.approx(1.5**2)
    assert not variance_test(acc, 1.5)
    assert variance_test(acc, 1.5 + 1e-9)


def test_variance_needs_two_samples():
    acc = SampleAccumulator()
    acc.extend([1.0])
    with pytest.raises(ValueError):
        variance_test(acc, 1.0)


def test_variance_matches_two_pass_oracle():
    rng = np.random.default_rng(5)
    for _ in range(1000):
        xs = rng.normal(rng.uniform(-10, 10), rng.uniform(0.1, 5), size=int(rng.integers(2, 50)))
        acc = SampleAccumulator()
        acc.extend(xs)
        mean = sum(xs) / len(xs)
        ref = sum((x - mean) ** 2 for x in xs) / len(xs)
        assert acc.variance()[0] == pytest.approx(ref, rel=1e-9, abs=1e-12)


# ---------------------------------------------------------------------------
# budgets


@pytest.mark.parametrize("a, n", [(1.0, 512), (64.0, 16), (8.0, 64), (250.0, 16)])
def test_asp_budget(a, n):
    assert asp_budget(512, a, 16) == n


def test_asp_budget_is_nonincreasing_and_bounded():
    a = np.linspace(1.0, 250.0, 5000)
    b = asp_budget(512, a, 16)
    assert (np.diff(b) <= 0).all() and b.min() >= 16 and b.max() <= 512


# ---------------------------------------------------------------------------
# noise


@pytest.mark.parametrize("dtype", [np.float64, np.float32])
def test_noise_stays_below_threshold(dtype):
    rng = np.random.default_rng(0)
    ref = rng.uniform(0.01, 200.0, (64, 64))
    t = threshold_map(rng.uniform(1.0, 250.0, (64, 64)), adaptation_luminance(ref))
    out = noise_inject(ref, t, seed=11, dtype=dtype)
    assert out.dtype == dtype
    assert (np.abs(out.astype(np.float64) - ref) < t.dL).all()
    assert convergence_test(out.astype(np.float64), ref, t).all()


def test_noise_is_reproducible():
    ref = np.full((16, 16), 50.0)
    t = threshold_map(np.ones((16, 16)), ref)
    np.testing.assert_array_equal(noise_inject(ref, t, 3), noise_inject(ref, t, 3))
    assert not np.array_equal(noise_inject(ref, t, 3), noise_inject(ref, t, 4))


def test_unit_aleph_noise_is_bounded_by_tvi():
    ref = np.linspace(1.0, 100.0, 256).reshape(16, 16)
    la = adaptation_luminance(ref)
    out = noise_inject(ref, threshold_map(np.ones_like(ref), la), 0)
    assert (np.abs(out - ref) < tvi_threshold(la)).all()
