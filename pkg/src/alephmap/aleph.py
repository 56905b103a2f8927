"""Velocity compensation, the spatiotemporal CSF, and the elevation map.

The CSF used throughout is a travelling-wave fit::

    CSF(rho, v) = k c0 c2 v (2 pi c1 rho)^2 exp(-4 pi c1 rho / rho_max)
    k           = 6.1 + 7.3 |log10(c2 v / 3)|^3
    rho_max     = 45.9 / (c2 v + 2)

with ``rho`` in cycles/degree and ``v`` the retinal velocity in deg/s.
"""
from __future__ import annotations

import enum
from dataclasses import asdict, dataclass

import numpy as np

from .pyramid import BAND_FREQUENCIES, BandWeights

ELEVATION_CEILING = 250.0
TRACKING_EFFICIENCY = 0.82


class Compensation(enum.Enum):
    ZERO = "zero"  # spatial only: every pixel at the drift velocity
    FULL = "full"  # eye tracks everything at 82% efficiency
    SALIENCY = "saliency"  # tracking efficiency given by the saliency map


class CsfMaxMode(enum.Enum):
    PEAK = "peak"  # CSF evaluated at its analytic maximum
    LITERAL = "literal"  # rho_max / (2 pi c1), taken as written


@dataclass(frozen=True)
class CsfParams:
    c0: float = 1.14
    c1: float = 0.67
    c2: float = 1.7
    v_min: float = 0.15  # deg/s, fixational drift
    v_max: float = 80.0  # deg/s, fastest smooth pursuit
    tracking_efficiency: float = TRACKING_EFFICIENCY
    csf_max_mode: CsfMaxMode = CsfMaxMode.PEAK

    def as_dict(self) -> dict:
        d = asdict(self)
        d["csf_max_mode"] = self.csf_max_mode.value
        return d


DEFAULT_PARAMS = CsfParams()


@dataclass
class AlephMap:
    values: np.ndarray
    mode: Compensation = Compensation.SALIENCY
    params: CsfParams = DEFAULT_PARAMS

    @property
    def shape(self):
        return self.values.shape


def compensate_velocity(v_image, saliency=0.0, mode=Compensation.SALIENCY, p: CsfParams = DEFAULT_PARAMS):
    """Retinal velocity after smooth-pursuit compensation, floored at ``v_min``."""
    mode = Compensation(mode)
    v = np.asarray(v_image, dtype=np.float64)
    if np.any(v < 0):
        raise ValueError("image-plane speed must be >= 0")
    if mode is Compensation.ZERO:
        vr = np.full_like(v, p.v_min)
    else:
        eff = p.tracking_efficiency if mode is Compensation.FULL else np.asarray(saliency, dtype=np.float64)
        vr = v - np.minimum(eff * v + p.v_min, p.v_max)
    vr = np.maximum(vr, p.v_min)
    return vr if vr.ndim else float(vr)


def _k(v, p):
    return 6.1 + 7.3 * np.abs(np.log10(p.c2 * v / 3.0)) ** 3


def rho_max(v_r, p: CsfParams = DEFAULT_PARAMS):
    return 45.9 / (p.c2 * np.asarray(v_r, dtype=np.float64) + 2.0)


def csf_value(rho, v_r, p: CsfParams = DEFAULT_PARAMS):
    rho = np.asarray(rho, dtype=np.float64)
    v = np.asarray(v_r, dtype=np.float64)
    a = 2.0 * np.pi * p.c1 * rho
    out = _k(v, p) * p.c0 * p.c2 * v * a * a * np.exp(-2.0 * a / rho_max(v, p))
    return out if out.ndim else float(out)


def csf_peak(v_r, p: CsfParams = DEFAULT_PARAMS):
    """(rho_peak, csf_max) at retinal velocity ``v_r``.

    Setting d/drho of the CSF to zero gives rho_peak = rho_max / (2 pi c1),
    where the exponent is exactly -2.  In LITERAL mode csf_max is that
    frequency itself rather than the CSF value there.
    """
    v = np.asarray(v_r, dtype=np.float64)
    rm = rho_max(v, p)
    peak = rm / (2.0 * np.pi * p.c1)
    if p.csf_max_mode is CsfMaxMode.LITERAL:
        cmax = peak
    else:
        cmax = _k(v, p) * p.c0 * p.c2 * v * rm * rm * np.exp(-2.0)
    if peak.ndim == 0:
        return float(peak), float(cmax)
    return peak, cmax


def elevation_factor(rho_i, v_r, p: CsfParams = DEFAULT_PARAMS):
    """Threshold elevation for band frequency ``rho_i``, clamped to [1, 250]."""
    rho = np.asarray(rho_i, dtype=np.float64)
    v = np.asarray(v_r, dtype=np.float64)
    peak, cmax = csf_peak(v, p)
    cut = rho_max(v, p) if p.csf_max_mode is CsfMaxMode.LITERAL else peak
    with np.errstate(divide="ignore", over="ignore"):
        ratio = cmax / csf_value(rho, v, p)
    f = np.where(rho > cut, ratio, 1.0)
    f = np.clip(np.nan_to_num(f, nan=ELEVATION_CEILING, posinf=ELEVATION_CEILING), 1.0, ELEVATION_CEILING)
    return f if f.ndim else float(f)


def compute_aleph(
    R: BandWeights,
    speed,
    saliency,
    mode=Compensation.SALIENCY,
    p: CsfParams = DEFAULT_PARAMS,
) -> AlephMap:
    """Per-pixel contrast elevation: band weights times per-band elevation."""
    mode = Compensation(mode)
    weights = R.R if isinstance(R, BandWeights) else np.asarray(R)
    speed = np.asarray(getattr(speed, "speed", speed), dtype=np.float64)
    S = np.asarray(getattr(saliency, "S", saliency), dtype=np.float64)
    shape = weights.shape[1:]
    if speed.shape != shape or (mode is Compensation.SALIENCY and S.shape != shape):
        raise ValueError(f"plane sizes differ: bands {shape}, speed {speed.shape}, saliency {S.shape}")
    freqs = R.peak_frequencies if isinstance(R, BandWeights) else BAND_FREQUENCIES
    v_r = compensate_velocity(speed, S if mode is Compensation.SALIENCY else 0.0, mode, p)
    total = np.zeros(shape)
    for i, rho in enumerate(freqs):  # fixed band order
        total = total + weights[i] * elevation_factor(rho, v_r, p)
    np.clip(total, 1.0, ELEVATION_CEILING, out=total)
    return AlephMap(total, mode, p)
