"""Bottom-up saliency: intensity, colour, orientation and motion conspicuity.

Each channel gets a 9-level Gaussian pyramid, six centre-surround
differences, lateral inhibition per map and a per-channel sum.  The four
conspicuity maps are inhibited again, summed and normalised to [0, 1].
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .imgio import ColorSpace, ImageBuffer, as_plane, rgb_to_opponent
from .pyramid import Pyramid, PyramidError, gaussian_pyramid, upsample

CENTER_SURROUND_PAIRS = ((2, 5), (2, 6), (3, 6), (3, 7), (4, 7), (4, 8))
SALIENCY_DEPTH = 9
ORIENTATIONS = (0.0, 45.0, 90.0, 135.0)  # degrees, counter-clockwise, y up
CHANNELS = ("intensity", "color", "orientation", "motion")
ORIENTATION_SIGMA = 1.0


@dataclass
class FeatureMap:
    plane: np.ndarray
    center: int
    surround: int
    angle: float | None = None
    source: str = ""


@dataclass
class FeatureMapSet:
    tag: str
    maps: list[FeatureMap] = field(default_factory=list)

    def __len__(self):
        return len(self.maps)

    def __iter__(self):
        return iter(self.maps)

    def __add__(self, other: "FeatureMapSet") -> "FeatureMapSet":
        if other.tag != self.tag:
            raise ValueError(f"cannot merge {self.tag} and {other.tag} maps")
        return FeatureMapSet(self.tag, self.maps + other.maps)


@dataclass
class SaliencyMap:
    S: np.ndarray
    conspicuity: dict[str, np.ndarray] = field(default_factory=dict)
    feature_counts: dict[str, int] = field(default_factory=dict)

    @property
    def shape(self):
        return self.S.shape


def normalize_unit(plane) -> np.ndarray:
    """Affine map onto [0, 1]; constant planes become zero."""
    m = as_plane(plane)
    lo, hi = float(m.min()), float(m.max())
    if not hi > lo:
        return np.zeros_like(m)
    return (m - lo) / (hi - lo)


def _pyramid(plane: np.ndarray) -> Pyramid:
    return gaussian_pyramid(plane, SALIENCY_DEPTH, strict=False)


def center_surround_maps(p: Pyramid, tag: str, angle: float | None = None, source: str = "") -> FeatureMapSet:
    if len(p) < SALIENCY_DEPTH:
        raise PyramidError(f"center-surround needs {SALIENCY_DEPTH} levels, got {len(p)}")
    shape = p.base_shape
    up = {i: upsample(p[i], shape, i) for i in range(2, SALIENCY_DEPTH)}
    maps = [FeatureMap(np.abs(up[c] - up[s]), c, s, angle, source) for c, s in CENTER_SURROUND_PAIRS]
    return FeatureMapSet(tag, maps)


def _g2_kernels(sigma: float):
    r = int(np.ceil(4 * sigma))
    x = np.arange(-r, r + 1, dtype=np.float64)
    g = np.exp(-0.5 * (x / sigma) ** 2)
    g /= g.sum()
    g1 = -x / sigma**2 * g
    g2 = (x * x / sigma**4 - 1.0 / sigma**2) * g
    g2 -= g2.mean()  # exact zero DC so brightness offsets cancel
    return g, g1, g2


def oriented_response(level: np.ndarray, angle_deg: float, sigma: float = ORIENTATION_SIGMA) -> np.ndarray:
    """|second derivative of Gaussian| across a bar at ``angle_deg``, steered from three basis kernels."""
    g, g1, g2 = _g2_kernels(sigma)

    def sep(kx, ky):
        out = ndimage.correlate1d(level, kx, axis=1, mode="nearest")
        return ndimage.correlate1d(out, ky, axis=0, mode="nearest")

    # bar normal in array coordinates (rows grow downward)
    phi = np.deg2rad(angle_deg + 90.0)
    nx, ny = np.cos(phi), -np.sin(phi)
    # g1 is odd, so correlation flips its sign; the product of two flips cancels
    resp = nx * nx * sep(g2, g) + 2 * nx * ny * sep(g1, g1) + ny * ny * sep(g, g2)
    return np.abs(resp)


def orientation_pyramids(a: Pyramid) -> FeatureMapSet:
    out = FeatureMapSet("orientation")
    for ang in ORIENTATIONS:
        levels = [oriented_response(lv, ang) for lv in a.levels]
        out = out + center_surround_maps(Pyramid(levels, a.kind, a.base_ppd), "orientation", ang, "A")
    return out


def _local_maxima(m: np.ndarray) -> np.ndarray:
    fp = np.ones((3, 3), dtype=bool)
    fp[1, 1] = False
    nb = ndimage.maximum_filter(m, footprint=fp, mode="constant", cval=-np.inf)
    return m > nb


def lateral_inhibition(m) -> np.ndarray:
    """Normalise, then scale by (M - mean of the other local maxima)^2."""
    n = normalize_unit(m)
    if not n.any():
        return n
    peaks = _local_maxima(n)
    peaks.flat[int(np.argmax(n))] = False
    others = n[peaks]
    m_bar = float(others.mean()) if others.size else 0.0
    return n * (1.0 - m_bar) ** 2


def conspicuity_combine(f: FeatureMapSet | list[FeatureMapSet]) -> np.ndarray:
    sets = [f] if isinstance(f, FeatureMapSet) else list(f)
    total = None
    for s in sets:
        for fm in s:
            v = lateral_inhibition(fm.plane)
            total = v if total is None else total + v
    if total is None:
        raise ValueError("no feature maps to combine")
    return total


def feature_maps(frame: ImageBuffer, speed) -> dict[str, FeatureMapSet]:
    """All 48 centre-surround maps, keyed by channel."""
    if frame.space is ColorSpace.LINEAR_RGB:
        frame = rgb_to_opponent(frame)
    if frame.space is not ColorSpace.OPPONENT:
        raise ValueError("saliency needs a three-plane colour frame")
    speed = as_plane(getattr(speed, "speed", speed))
    if speed.shape != frame.shape:
        raise ValueError(f"velocity field {speed.shape} does not match frame {frame.shape}")
    a_pyr = _pyramid(frame.plane(0))
    color = center_surround_maps(_pyramid(frame.plane(1)), "color", source="C1") + center_surround_maps(
        _pyramid(frame.plane(2)), "color", source="C2"
    )
    return {
        "intensity": center_surround_maps(a_pyr, "intensity", source="A"),
        "color": color,
        "orientation": orientation_pyramids(a_pyr),
        "motion": center_surround_maps(_pyramid(speed), "motion", source="|v|"),
    }


def compute_saliency(frame: ImageBuffer, vel) -> SaliencyMap:
    fmaps = feature_maps(frame, vel)
    consp = {c: conspicuity_combine(fmaps[c]) for c in CHANNELS}
    total = np.zeros(frame.shape)
    for c in CHANNELS:
        total = total + lateral_inhibition(consp[c])
    return SaliencyMap(normalize_unit(total), consp, {c: len(fmaps[c]) for c in CHANNELS})
