"""Renderer-facing controls derived from a contrast elevation map.

Perceptual ambient accuracy, luminance thresholds, convergence and variance
tests, per-pixel sample budgets, and the sub-threshold noise injector.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .imgio import DisplayGeometry, as_plane

# Four-segment threshold-versus-intensity envelope, log10(cd/m^2) in and out.
# The rod/cone and cone/Weber joints sit where adjacent segments meet
# (closest approach, and crossing) so the curve is continuous in log space.
TVI_SCOTOPIC_FLOOR = -2.86
TVI_JOINTS = (-3.94, -1.206626317854933, -0.0184, 1.9175969152718608)


def _log_tvi(x: np.ndarray) -> np.ndarray:
    j0, j1, j2, j3 = TVI_JOINTS
    out = np.empty_like(x)
    s0 = x < j0
    s1 = (x >= j0) & (x < j1)
    s2 = (x >= j1) & (x < j2)
    s3 = (x >= j2) & (x < j3)
    s4 = x >= j3
    out[s0] = TVI_SCOTOPIC_FLOOR
    out[s1] = (0.405 * x[s1] + 1.6) ** 2.18 - 2.86
    out[s2] = x[s2] - 0.395
    out[s3] = (0.249 * x[s3] + 0.65) ** 2.7 - 0.72
    out[s4] = x[s4] - 1.255
    return out


def tvi_threshold(La):
    """Just-detectable luminance difference (cd/m^2) at adaptation luminance ``La``."""
    La = np.asarray(La, dtype=np.float64)
    if np.any(La < 0):
        raise ValueError("adaptation luminance must be >= 0")
    with np.errstate(divide="ignore"):
        x = np.log10(La)
    out = 10.0 ** _log_tvi(np.atleast_1d(x))
    return out.reshape(La.shape) if La.ndim else float(out[0])


# ---------------------------------------------------------------------------
# ambient accuracy


def compress_accuracy(aleph, alpha_acc: float):
    """Map elevation >= 1 onto an ambient accuracy in [alpha_acc, 1)."""
    if not alpha_acc > 0:
        raise ValueError("alpha_acc must be > 0")
    aleph = np.asarray(aleph, dtype=np.float64)
    out = aleph / (aleph - 1.0 + 1.0 / alpha_acc)
    return out if out.ndim else float(out)


def scale_add_accuracy(aleph, alpha_acc: float, K: float = 100.0):
    """alpha_acc + aleph / K.  Not clamped, may exceed 1."""
    if not K > 0:
        raise ValueError("K must be > 0")
    out = alpha_acc + np.asarray(aleph, dtype=np.float64) / K
    return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# thresholds


def disk_footprint(diameter: float) -> np.ndarray:
    """Boolean disk of the given pixel diameter, centred on a pixel."""
    r = diameter / 2.0
    half = int(np.floor(r))
    y, x = np.mgrid[-half : half + 1, -half : half + 1]
    return x * x + y * y <= r * r


def adaptation_luminance(lum, geom: DisplayGeometry | None = None) -> np.ndarray:
    """Mean luminance over a one-degree disk around each pixel.

    The disk is truncated at the image border and the mean taken over the
    pixels that remain.
    """
    plane = as_plane(lum)
    geom = geom or DisplayGeometry()
    fp = disk_footprint(geom.pixels_per_degree).astype(np.float64)
    total = ndimage.correlate(plane, fp, mode="constant", cval=0.0)
    count = ndimage.correlate(np.ones_like(plane), fp, mode="constant", cval=0.0)
    return total / count


@dataclass
class ThresholdMap:
    dL: np.ndarray
    metadata: dict = field(default_factory=dict)

    @property
    def shape(self):
        return self.dL.shape


def threshold_map(aleph, adapt_lum, metadata: dict | None = None) -> ThresholdMap:
    """Per-pixel luminance threshold: elevation times TVI(adaptation luminance)."""
    a = as_plane(getattr(aleph, "values", aleph))
    la = as_plane(adapt_lum)
    if a.shape != la.shape:
        raise ValueError(f"aleph {a.shape} and luminance {la.shape} differ in size")
    return ThresholdMap(a * tvi_threshold(la), dict(metadata or {}))


def _dl(t) -> np.ndarray:
    return t.dL if isinstance(t, ThresholdMap) else as_plane(t)


def convergence_test(L_N, L_N1, t) -> np.ndarray:
    a, b, dL = as_plane(L_N), as_plane(L_N1), _dl(t)
    if not (a.shape == b.shape == dL.shape):
        raise ValueError("convergence_test inputs differ in size")
    return np.abs(a - b) < dL


# ---------------------------------------------------------------------------
# sample statistics


class SampleAccumulator:
    """Running count, sum and sum of squares for a set of pixels."""

    def __init__(self, size: int = 1):
        self.n = np.zeros(size, dtype=np.int64)
        self.sum = np.zeros(size)
        self.sumsq = np.zeros(size)

    def add(self, ids, values) -> None:
        """Add samples ``values`` of shape (len(ids), k) to pixels ``ids``."""
        values = np.asarray(values, dtype=np.float64)
        if values.ndim == 1:
            values = values[:, None]
        self.n[ids] += values.shape[1]
        self.sum[ids] += values.sum(axis=1)
        self.sumsq[ids] += (values * values).sum(axis=1)

    def extend(self, samples) -> None:
        """Add a flat batch of samples to a single-pixel accumulator."""
        self.add(np.array([0]), np.asarray(samples, dtype=np.float64)[None, :])

    def variance(self, ids=slice(None)) -> np.ndarray:
        """Biased (1/N) sample variance, negative round-off clamped to zero."""
        n = self.n[ids].astype(np.float64)
        v = (self.sumsq[ids] - self.sum[ids] ** 2 / n) / n
        return np.maximum(v, 0.0)


def variance_test(acc: SampleAccumulator, dL, ids=slice(None)):
    """True where the sample standard deviation is below ``dL``."""
    if np.any(acc.n[ids] < 2):
        raise ValueError("variance_test needs at least two samples")
    out = np.sqrt(acc.variance(ids)) < dL
    if isinstance(ids, slice) and acc.n.size == 1:
        return bool(out[0])
    return out


def asp_budget(max_samples: int, aleph, floor: int = 16):
    """Samples to shoot: max_samples / aleph, never fewer than ``floor``."""
    if not max_samples >= floor >= 1:
        raise ValueError("need max_samples >= floor >= 1")
    a = np.asarray(aleph, dtype=np.float64)
    out = np.clip(np.round(max_samples / a), floor, max_samples).astype(np.int64)
    return int(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# validation noise


def noise_inject(reference, t, seed: int, dtype=np.float64) -> np.ndarray:
    """reference + dL * U with U ~ U[0, 1).

    The result is built in ``dtype`` and nudged toward the reference wherever
    rounding would let the perturbation reach dL.  The bound is checked
    against the unrounded reference.
    """
    ref = as_plane(reference)
    dL = _dl(t)
    if ref.shape != dL.shape:
        raise ValueError("reference and threshold map differ in size")
    u = np.random.default_rng(seed).random(ref.shape)
    out = (ref + dL * u).astype(dtype)
    ref_c = ref.astype(dtype)
    bad = np.abs(out.astype(np.float64) - ref) >= dL
    while bad.any():
        bad &= out != ref_c
        out[bad] = np.nextafter(out[bad], ref_c[bad])
        bad = (np.abs(out.astype(np.float64) - ref) >= dL) & (out != ref_c)
    return out
