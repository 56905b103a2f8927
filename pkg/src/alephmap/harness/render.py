"""Estimate generator and the oracle-driven renderer."""
from __future__ import annotations

import enum
from dataclasses import asdict, dataclass, field

import numpy as np

from .. import oracle
from ..imgio import OPPONENT_MATRIX, ColorSpace, DisplayGeometry, ImageBuffer, as_plane
from .cache import IrradianceCache, irradiance_lookup, irradiance_sample
from .lighting import direct_samples
from .raytrace import intersect, surface_albedo
from .scene import Scene

DIRECT_BATCH = 16


class RenderMode(enum.Enum):
    UNIFORM = "uniform"
    ALEPH_ALPHA = "aleph-alpha"
    AVT = "avt"
    ASP = "asp"


@dataclass
class RenderParams:
    width: int = 128
    height: int = 128
    alpha_acc: float = 0.1
    direct_spp: int = 16
    max_spp: int = 512
    asp_floor: int = 16
    irradiance_samples: int = 256
    r_min_fraction: float = 0.05
    r_max_fraction: float = 1.0
    indirect: bool = True
    seed: int = 0
    geometry: DisplayGeometry = field(default_factory=DisplayGeometry)


@dataclass
class RenderStats:
    primary_rays: int = 0
    direct_samples: int = 0
    hemisphere_samples: int = 0
    cache_created: int = 0
    cache_interpolated: int = 0
    indirect_lookups: int = 0

    def as_dict(self) -> dict:
        return asdict(self)

    def to_text(self) -> str:
        return "".join(f"{k}={v}\n" for k, v in self.as_dict().items())


@dataclass
class PrimaryHits:
    shape: tuple[int, int]
    dirs: np.ndarray
    t: np.ndarray
    prim: np.ndarray
    point: np.ndarray
    normal: np.ndarray

    @property
    def mask(self):
        return self.prim >= 0


def cast_primary(scene: Scene, frame: int, width: int, height: int) -> PrimaryHits:
    cam = scene.camera(frame)
    dirs = cam.rays(width, height).reshape(-1, 3)
    origins = np.broadcast_to(cam.position, dirs.shape)
    hit = intersect(scene, frame, origins, dirs)
    return PrimaryHits((height, width), dirs, hit.t, hit.prim, hit.point, hit.normal)


def _uniforms(rng, n, k, correlated: bool):
    if correlated:
        # one stratified pattern shared by every pixel: smooth, noise-free estimates
        strata = (np.arange(k) + rng.random(k)) / k
        u1 = (rng.permutation(k) + rng.random(k)) / k
        u2 = (rng.permutation(k) + rng.random(k)) / k
        return [np.broadcast_to(a, (n, k)) for a in (strata, u1, u2)]
    return [rng.random((n, k)) for _ in range(3)]


class _Shading:
    """Hit-point data for the pixels that see a non-emissive surface."""

    def __init__(self, scene, frame, hits: PrimaryHits):
        tab = scene.material_table
        m = hits.mask
        emissive = np.zeros(m.shape, dtype=bool)
        emissive[m] = np.any(tab["emission"][hits.prim[m]] > 0, axis=1)
        self.emission = np.zeros((m.size, 3))
        self.emission[emissive] = tab["emission"][hits.prim[emissive]]
        self.surface = m & ~emissive
        idx = np.flatnonzero(self.surface)
        self.index = idx
        self.P = hits.point[idx]
        self.N = hits.normal[idx]
        self.V = -hits.dirs[idx]
        self.prim = hits.prim[idx]
        self.albedo = surface_albedo(scene, frame, self.prim, self.P)


def trace_direct(
    scene: Scene,
    frame: int,
    width: int,
    height: int,
    spp: int = 16,
    seed: int = 0,
    correlated: bool = False,
) -> ImageBuffer:
    """Direct lighting only: area-light sampling with shadow rays."""
    if spp < 1:
        raise ValueError("spp must be >= 1")
    hits = cast_primary(scene, frame, width, height)
    sh = _Shading(scene, frame, hits)
    rng = np.random.default_rng([seed, frame, 0])
    out = sh.emission.copy()
    n = sh.index.size
    if n:
        acc = np.zeros((n, 3))
        u = _uniforms(rng, n, spp, correlated)
        for s in range(0, spp, DIRECT_BATCH):
            sl = slice(s, s + DIRECT_BATCH)
            rad, _, _ = direct_samples(
                scene, frame, sh.P, sh.N, sh.V, sh.albedo, sh.prim, u[0][:, sl], u[1][:, sl], u[2][:, sl]
            )
            acc += rad.sum(axis=1)
        out[sh.index] += acc / spp
    return ImageBuffer(out.reshape(height, width, 3), ColorSpace.LINEAR_RGB)


def _direct_fixed(scene, frame, sh, counts, rng, stats):
    """Mean direct radiance with a per-pixel sample count (drawn in batches)."""
    n = sh.index.size
    acc = np.zeros((n, 3))
    kmax = int(counts.max()) if n else 0
    for s in range(0, kmax, DIRECT_BATCH):
        k = min(DIRECT_BATCH, kmax - s)
        u = rng.random((3, n, k))
        use = (s + np.arange(k))[None, :] < counts[:, None]
        live = use.any(axis=1)
        if not live.any():
            break
        rad, _, _ = direct_samples(
            scene, frame, sh.P[live], sh.N[live], sh.V[live], sh.albedo[live], sh.prim[live],
            u[0][live], u[1][live], u[2][live],
        )
        acc[live] += (rad * use[live][..., None]).sum(axis=1)
        stats.direct_samples += int(use.sum())
    return acc / np.maximum(counts, 1)[:, None]


def _direct_avt(scene, frame, sh, dL, params: RenderParams, rng, stats):
    """Sample until the luminance standard deviation drops below the threshold."""
    n = sh.index.size
    acc_rgb = np.zeros((n, 3))
    accum = oracle.SampleAccumulator(n)
    active = np.ones(n, dtype=bool)
    scale = params.geometry.max_display_luminance
    while active.any():
        ids = np.flatnonzero(active)
        k = int(min(DIRECT_BATCH, params.max_spp - accum.n[ids].max()))
        u = rng.random((3, ids.size, k))
        rad, _, _ = direct_samples(
            scene, frame, sh.P[ids], sh.N[ids], sh.V[ids], sh.albedo[ids], sh.prim[ids], u[0], u[1], u[2]
        )
        acc_rgb[ids] += rad.sum(axis=1)
        accum.add(ids, (rad @ OPPONENT_MATRIX[0]) * scale)
        stats.direct_samples += ids.size * k
        done = oracle.variance_test(accum, dL[ids], ids) | (accum.n[ids] >= params.max_spp)
        active[ids[done]] = False
    return acc_rgb / np.maximum(accum.n, 1)[:, None]


def render(
    scene: Scene,
    frame: int,
    mode: RenderMode | str = RenderMode.UNIFORM,
    params: RenderParams | None = None,
    aleph=None,
    threshold=None,
    cache: IrradianceCache | None = None,
):
    """Render direct + irradiance-cached indirect diffuse light.

    ``aleph`` (contrast elevation map) drives aleph-alpha and asp modes;
    ``threshold`` (luminance threshold map, cd/m^2) drives avt.  The cache is
    filled in scanline order, so results are deterministic for a given seed.
    """
    mode = RenderMode(mode)
    p = params or RenderParams()
    shape = (p.height, p.width)
    if mode in (RenderMode.ALEPH_ALPHA, RenderMode.ASP):
        if aleph is None:
            raise ValueError(f"{mode.value} mode needs an aleph map")
        aleph = as_plane(aleph)
        if aleph.shape != shape:
            raise ValueError(f"aleph map is {aleph.shape}, render is {shape}")
    if mode is RenderMode.AVT:
        if threshold is None:
            raise ValueError("avt mode needs a threshold map")
        threshold = as_plane(threshold)
        if threshold.shape != shape:
            raise ValueError(f"threshold map is {threshold.shape}, render is {shape}")

    stats = RenderStats(primary_rays=p.width * p.height)
    hits = cast_primary(scene, frame, p.width, p.height)
    sh = _Shading(scene, frame, hits)
    out = sh.emission.copy()
    n = sh.index.size
    if n == 0:
        return ImageBuffer(out.reshape(*shape, 3)), stats

    rng = np.random.default_rng([p.seed, frame, 1])
    if mode is RenderMode.AVT:
        direct = _direct_avt(scene, frame, sh, threshold.reshape(-1)[sh.index], p, rng, stats)
    else:
        if mode is RenderMode.ASP:
            counts = oracle.asp_budget(p.max_spp, aleph.reshape(-1)[sh.index], p.asp_floor)
        else:
            counts = np.full(n, p.direct_spp)
        direct = _direct_fixed(scene, frame, sh, np.asarray(counts), rng, stats)

    indirect = np.zeros((n, 3))
    if p.indirect:
        if mode is RenderMode.ALEPH_ALPHA:
            alpha = oracle.compress_accuracy(aleph.reshape(-1)[sh.index], p.alpha_acc)
        else:
            alpha = np.full(n, p.alpha_acc)
        cache = cache if cache is not None else IrradianceCache()
        radius = scene.bounding_sphere[1]
        bounds = (p.r_min_fraction * radius, p.r_max_fraction * radius)
        for j in range(n):
            P, N = sh.P[j], sh.N[j]
            stats.indirect_lookups += 1
            E = irradiance_lookup(cache, P, N, float(alpha[j]))
            if E is None:
                rec_rng = np.random.default_rng([p.seed, frame, 2, int(sh.index[j])])
                E, R = irradiance_sample(scene, frame, P, N, p.irradiance_samples, rec_rng, bounds)
                cache.add(P, N, E, R)
                stats.cache_created += 1
                stats.hemisphere_samples += p.irradiance_samples
            else:
                stats.cache_interpolated += 1
            indirect[j] = E
        indirect *= sh.albedo / np.pi

    out[sh.index] += direct + indirect
    return ImageBuffer(out.reshape(*shape, 3)), stats
