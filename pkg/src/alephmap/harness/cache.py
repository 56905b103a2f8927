"""Irradiance cache with split-sphere weighting (constant extrapolation, no gradients)."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lighting import direct_samples
from .raytrace import intersect, surface_albedo
from .scene import Scene


@dataclass
class IrradianceRecord:
    position: np.ndarray
    normal: np.ndarray
    irradiance: np.ndarray
    radius: float


class IrradianceCache:
    """Append-only record store; lookups scan every record."""

    def __init__(self, capacity: int = 1024):
        self._P = np.zeros((capacity, 3))
        self._N = np.zeros((capacity, 3))
        self._E = np.zeros((capacity, 3))
        self._R = np.zeros(capacity)
        self.count = 0

    def __len__(self):
        return self.count

    def add(self, position, normal, irradiance, radius) -> IrradianceRecord:
        normal = np.asarray(normal, dtype=np.float64)
        normal = normal / np.linalg.norm(normal)
        if radius <= 0:
            raise ValueError("record radius must be positive")
        if self.count == self._R.shape[0]:
            grow = self._R.shape[0]
            self._P = np.vstack([self._P, np.zeros((grow, 3))])
            self._N = np.vstack([self._N, np.zeros((grow, 3))])
            self._E = np.vstack([self._E, np.zeros((grow, 3))])
            self._R = np.concatenate([self._R, np.zeros(grow)])
        i = self.count
        self._P[i], self._N[i] = position, normal
        self._E[i] = np.maximum(np.asarray(irradiance, dtype=np.float64), 0.0)
        self._R[i] = radius
        self.count += 1
        return self.record(i)

    def record(self, i: int) -> IrradianceRecord:
        return IrradianceRecord(self._P[i].copy(), self._N[i].copy(), self._E[i].copy(), float(self._R[i]))

    def records(self):
        return [self.record(i) for i in range(self.count)]

    def weights(self, P, N) -> np.ndarray:
        """Split-sphere weights of every record at (P, N); inf on exact matches."""
        n = self.count
        dist = np.sqrt(((self._P[:n] - P) ** 2).sum(axis=1))
        cosang = np.clip(self._N[:n] @ N, -1.0, 1.0)
        err = dist / self._R[:n] + np.sqrt(1.0 - cosang)
        with np.errstate(divide="ignore"):
            return 1.0 / err

    def lookup(self, P, N, alpha: float):
        return irradiance_lookup(self, P, N, alpha)


def irradiance_lookup(cache: IrradianceCache, P, N, alpha: float):
    """Weighted average of records with weight > 1/alpha, or None."""
    if cache.count == 0:
        return None
    w = cache.weights(np.asarray(P, dtype=np.float64), np.asarray(N, dtype=np.float64))
    exact = np.isinf(w)
    if exact.any():
        return cache._E[int(np.argmax(exact))].copy()
    sel = w > 1.0 / alpha
    if not sel.any():
        return None
    ws = w[sel]
    return (ws[:, None] * cache._E[: cache.count][sel]).sum(axis=0) / ws.sum()


def _orthonormal(n):
    a = np.array([1.0, 0.0, 0.0]) if abs(n[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    t = np.cross(n, a)
    t /= np.linalg.norm(t)
    return t, np.cross(n, t)


def cosine_directions(N, u1, u2) -> np.ndarray:
    """Cosine-weighted hemisphere directions about unit normal ``N``."""
    t, b = _orthonormal(N)
    r = np.sqrt(u1)
    phi = 2.0 * np.pi * u2
    x, y, z = r * np.cos(phi), r * np.sin(phi), np.sqrt(np.maximum(0.0, 1.0 - u1))
    return x[:, None] * t + y[:, None] * b + z[:, None] * N


def _stratified(n: int, rng: np.random.Generator):
    side = int(np.sqrt(n))
    if side * side == n:
        i, j = np.divmod(np.arange(n), side)
        return (i + rng.random(n)) / side, (j + rng.random(n)) / side
    return rng.random(n), rng.random(n)


def one_bounce_radiance(scene: Scene, frame: int, hit, dirs, rng) -> np.ndarray:
    """Outgoing diffuse radiance at secondary hits from one light sample each.

    Emitters contribute nothing here: direct light is handled separately.
    """
    L = np.zeros((hit.t.shape[0], 3))
    tab = scene.material_table
    m = hit.mask
    if not m.any():
        return L
    m &= ~np.any(tab["emission"][np.maximum(hit.prim, 0)] > 0, axis=1)
    if not m.any():
        return L
    P, N, prim = hit.point[m], hit.normal[m], hit.prim[m]
    albedo = surface_albedo(scene, frame, prim, P)
    k = m.sum()
    u = rng.random((3, k, 1))
    rad, _, _ = direct_samples(scene, frame, P, N, None, albedo, prim, u[0], u[1], u[2])
    L[m] = rad[:, 0, :]
    return L


def harmonic_distance(distances, hit=None, far: float = np.inf) -> float:
    """n / sum(1/d), with misses (``hit`` False) counted at ``far``."""
    d = np.asarray(distances, dtype=np.float64)
    if hit is not None:
        d = np.where(hit, d, far)
    return float(d.size / np.sum(1.0 / np.maximum(d, 1e-12)))


def irradiance_sample(
    scene: Scene,
    frame: int,
    P,
    N,
    n_samples: int,
    rng: np.random.Generator,
    r_bounds: tuple[float, float] | None = None,
    radiance=None,
):
    """Monte Carlo irradiance at (P, N) and the harmonic mean hit distance.

    ``radiance(hit, dirs)`` returns incoming radiance per ray; it defaults to
    one-bounce diffuse interreflection.
    """
    if n_samples < 8:
        raise ValueError("n_samples must be >= 8")
    P = np.asarray(P, dtype=np.float64)
    N = np.asarray(N, dtype=np.float64)
    u1, u2 = _stratified(n_samples, rng)
    dirs = cosine_directions(N, u1, u2)
    eps = 1e-6 * scene.bounding_sphere[1]
    origins = np.broadcast_to(P + eps * N, dirs.shape)
    hit = intersect(scene, frame, origins, dirs)
    if radiance is None:
        L = one_bounce_radiance(scene, frame, hit, dirs, rng)
    else:
        L = np.asarray(radiance(hit, dirs), dtype=np.float64).reshape(n_samples, -1)
    E = np.pi * L.mean(axis=0)
    R = harmonic_distance(hit.t, hit.mask, scene.far_distance)
    if r_bounds is None:
        r = scene.bounding_sphere[1]
        r_bounds = (0.05 * r, r)
    return E, float(np.clip(R, *r_bounds))
