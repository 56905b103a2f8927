"""Area-light sampling and direct illumination."""
from __future__ import annotations

import numpy as np

from .raytrace import occluded
from .scene import Scene


def _light_table(scene: Scene, frame: int):
    g = scene.geometry(frame)
    lights = set(scene.light_prims.tolist())
    rows = []
    for k, p in enumerate(g.tri_prim):
        if p in lights:
            area = 0.5 * np.linalg.norm(np.cross(g.tri_e1[k], g.tri_e2[k]))
            rows.append(("tri", k, int(p), area))
    for k, p in enumerate(g.sph_prim):
        if p in lights:
            rows.append(("sphere", k, int(p), 4.0 * np.pi * g.sph_radius[k] ** 2))
    areas = np.array([r[3] for r in rows])
    return rows, areas


def sample_light_points(scene: Scene, frame: int, u0, u1, u2):
    """Area-uniform points on emissive primitives.

    Returns ``(points, normals, prims, two_sided, total_area)``; the sampling
    density is ``1 / total_area`` everywhere on the emitters.
    """
    g = scene.geometry(frame)
    rows, areas = _light_table(scene, frame)
    total = float(areas.sum())
    cdf = np.cumsum(areas) / total
    which = np.minimum(np.searchsorted(cdf, u0, side="right"), len(rows) - 1)
    shape = np.shape(u0)
    pts = np.zeros(shape + (3,))
    nrm = np.zeros(shape + (3,))
    prims = np.zeros(shape, dtype=np.intp)
    two_sided = np.zeros(shape, dtype=bool)
    for idx, (kind, k, p, _) in enumerate(rows):
        sel = which == idx
        if not sel.any():
            continue
        a, b = u1[sel], u2[sel]
        if kind == "tri":
            s = np.sqrt(a)
            pts[sel] = (
                g.tri_v0[k]
                + (s * (1.0 - b))[..., None] * g.tri_e1[k]
                + (s * b)[..., None] * g.tri_e2[k]
            )
            nrm[sel] = g.tri_normal[k]
            two_sided[sel] = True
        else:
            z = 1.0 - 2.0 * a
            r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
            phi = 2.0 * np.pi * b
            dirs = np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=-1)
            pts[sel] = g.sph_center[k] + g.sph_radius[k] * dirs
            nrm[sel] = dirs
        prims[sel] = p
    return pts, nrm, prims, two_sided, total


def direct_samples(scene: Scene, frame: int, P, N, V, albedo, prim, u0, u1, u2):
    """Per-sample outgoing radiance from direct lighting.

    ``P, N, V, albedo`` are (n, 3) (``V`` points toward the viewer, may be
    None for pure irradiance); ``u*`` are (n, k) uniforms.  Returns
    ``(radiance (n, k, 3), irradiance (n, k, 3), shadow_rays)``.
    """
    n, k = np.shape(u0)
    lp, ln, lprim, two_sided, area = sample_light_points(scene, frame, u0, u1, u2)
    emission = scene.material_table["emission"][lprim]
    to_light = lp - P[:, None, :]
    dist = np.linalg.norm(to_light, axis=-1)
    dist = np.maximum(dist, 1e-12)
    w = to_light / dist[..., None]
    cos_s = np.einsum("nk,nsk->ns", N, w)
    cos_l = -np.einsum("nsk,nsk->ns", ln, w)
    cos_l = np.where(two_sided, np.abs(cos_l), cos_l)
    live = (cos_s > 0) & (cos_l > 0) & (lprim != prim[:, None])
    eps = 1e-6 * scene.bounding_sphere[1]
    origins = np.broadcast_to(P[:, None, :] + eps * N[:, None, :], (n, k, 3))
    vis = np.zeros((n, k), dtype=bool)
    if live.any():
        vis[live] = ~occluded(scene, frame, origins[live], w[live], dist[live] - eps)
    geo = np.where(vis, cos_s * cos_l / (dist * dist), 0.0) * area
    irr = emission * geo[..., None]
    rad = albedo[:, None, :] / np.pi * irr
    if V is not None:
        ks = scene.material_table["ks"][prim]
        glossy = ks > 0
        if glossy.any():
            ex = scene.material_table["exponent"][prim][glossy]
            Ng, Vg = N[glossy], V[glossy]
            R = 2.0 * np.einsum("nk,nk->n", Ng, Vg)[:, None] * Ng - Vg
            c = np.maximum(0.0, np.einsum("nk,nsk->ns", R, w[glossy]))
            lobe = ks[glossy, None] * (ex[:, None] + 2.0) / (2.0 * np.pi) * c ** ex[:, None]
            rad[glossy] += lobe[..., None] * irr[glossy]
    return rad, irr, int(live.sum())
