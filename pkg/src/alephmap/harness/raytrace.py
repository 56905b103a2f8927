"""Vectorised ray casting against a frame's triangles and spheres."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .scene import FrameGeometry, Scene

CHUNK = 4096


@dataclass
class Hit:
    t: np.ndarray  # inf where nothing was hit
    prim: np.ndarray  # -1 where nothing was hit
    point: np.ndarray
    normal: np.ndarray  # unit, facing against the incoming ray

    @property
    def mask(self) -> np.ndarray:
        return self.prim >= 0


def _tri_hits(g: FrameGeometry, o, d, tmax):
    n = o.shape[0]
    best_t = np.full(n, np.inf)
    best_i = np.full(n, -1, dtype=np.intp)
    if g.tri_v0.shape[0] == 0:
        return best_t, best_i
    e1, e2 = g.tri_e1[None], g.tri_e2[None]
    pvec = np.cross(d[:, None, :], e2)
    det = np.einsum("ntk,ntk->nt", np.broadcast_to(e1, pvec.shape), pvec)
    ok = np.abs(det) > 1e-14
    inv = np.where(ok, 1.0 / np.where(ok, det, 1.0), 0.0)
    tvec = o[:, None, :] - g.tri_v0[None]
    u = np.einsum("ntk,ntk->nt", tvec, pvec) * inv
    qvec = np.cross(tvec, e1)
    v = np.einsum("nk,ntk->nt", d, qvec) * inv
    t = np.einsum("ntk,ntk->nt", np.broadcast_to(e2, qvec.shape), qvec) * inv
    hit = ok & (u >= 0) & (v >= 0) & (u + v <= 1) & (t > 0) & (t < tmax[:, None])
    t = np.where(hit, t, np.inf)
    j = np.argmin(t, axis=1)
    best_t = t[np.arange(n), j]
    best_i = np.where(np.isfinite(best_t), j, -1)
    return best_t, best_i


def _sph_hits(g: FrameGeometry, o, d, tmax):
    n = o.shape[0]
    if g.sph_center.shape[0] == 0:
        return np.full(n, np.inf), np.full(n, -1, dtype=np.intp)
    oc = o[:, None, :] - g.sph_center[None]
    b = np.einsum("nk,nsk->ns", d, oc)
    c = np.einsum("nsk,nsk->ns", oc, oc) - g.sph_radius[None] ** 2
    disc = b * b - c
    sq = np.sqrt(np.maximum(disc, 0.0))
    t0, t1 = -b - sq, -b + sq
    t = np.where(t0 > 0, t0, t1)
    hit = (disc >= 0) & (t > 0) & (t < tmax[:, None])
    t = np.where(hit, t, np.inf)
    j = np.argmin(t, axis=1)
    best_t = t[np.arange(n), j]
    return best_t, np.where(np.isfinite(best_t), j, -1)


def intersect(scene: Scene, frame: int, origins, dirs, tmax=None) -> Hit:
    """Closest hit for each ray; ``dirs`` must be unit length."""
    g = scene.geometry(frame)
    origins = np.asarray(origins, dtype=np.float64).reshape(-1, 3)
    dirs = np.asarray(dirs, dtype=np.float64).reshape(-1, 3)
    n = origins.shape[0]
    if tmax is None:
        tmax = np.full(n, np.inf)
    else:
        tmax = np.broadcast_to(np.asarray(tmax, dtype=np.float64), (n,))
    t = np.full(n, np.inf)
    prim = np.full(n, -1, dtype=np.intp)
    normal = np.zeros((n, 3))
    for s in range(0, n, CHUNK):
        sl = slice(s, s + CHUNK)
        o, d, tm = origins[sl], dirs[sl], tmax[sl]
        tt, ti = _tri_hits(g, o, d, tm)
        st, si = _sph_hits(g, o, d, tm)
        use_sph = st < tt
        t_best = np.where(use_sph, st, tt)
        p = np.full(o.shape[0], -1, dtype=np.intp)
        tri_ok = (~use_sph) & (ti >= 0)
        sph_ok = use_sph & (si >= 0)
        p[tri_ok] = g.tri_prim[ti[tri_ok]]
        p[sph_ok] = g.sph_prim[si[sph_ok]]
        nrm = np.zeros((o.shape[0], 3))
        nrm[tri_ok] = g.tri_normal[ti[tri_ok]]
        if sph_ok.any():
            hp = o[sph_ok] + t_best[sph_ok, None] * d[sph_ok]
            nn = hp - g.sph_center[si[sph_ok]]
            nrm[sph_ok] = nn / np.linalg.norm(nn, axis=1, keepdims=True)
        # two-sided shading: normals face the viewer
        flip = np.einsum("nk,nk->n", nrm, d) > 0
        nrm[flip] *= -1.0
        t[sl], prim[sl], normal[sl] = t_best, p, nrm
    point = origins + np.where(np.isfinite(t), t, 0.0)[:, None] * dirs
    return Hit(t, prim, point, normal)


def occluded(scene: Scene, frame: int, origins, dirs, dist) -> np.ndarray:
    """True where something blocks the segment of length ``dist``."""
    hit = intersect(scene, frame, origins, dirs, tmax=np.asarray(dist) * (1.0 - 1e-6))
    return hit.mask


def to_local(scene: Scene, frame: int, prim: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Object-space coordinates of world points on the given primitives."""
    m = scene.geometry(frame).to_local[prim]
    return np.einsum("nij,nj->ni", m[:, :3, :3], points) + m[:, :3, 3]


def to_world(scene: Scene, frame: int, prim: np.ndarray, local: np.ndarray) -> np.ndarray:
    m = scene.geometry(frame).to_world[prim]
    return np.einsum("nij,nj->ni", m[:, :3, :3], local) + m[:, :3, 3]


def surface_albedo(scene: Scene, frame: int, prim: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Diffuse albedo at hit points, resolving checker textures in object space."""
    tab = scene.material_table
    albedo = tab["albedo"][prim].copy()
    size = tab["checker_size"][prim]
    tex = size > 0
    if tex.any():
        local = to_local(scene, frame, prim[tex], points[tex])
        # offset keeps axis-aligned faces off the cell boundaries
        cell = np.floor(local / size[tex, None] + 0.2513).astype(np.int64).sum(axis=1)
        odd = (cell & 1).astype(bool)
        sub = albedo[tex]
        sub[odd] = tab["checker_albedo"][prim[tex]][odd]
        albedo[tex] = sub
    return albedo
