"""Frame-to-frame pixel displacement and image-plane velocity.

Two estimators:

* image based -- census transform of the achromatic Gaussian pyramid,
  exhaustive +-8 search at level 2, three-step refinement at levels 1 and 0
  (maximum reach 7 + 2 * (7 + 2 * 8) = 53 px);
* model based -- ray cast each pixel, move the hit point with its
  primitive's next-frame transform and reproject through the next camera.

Displacements follow ``dP = P(frame N+1) - P(frame N)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .imgio import ColorSpace, DisplayGeometry, ImageBuffer, as_plane, luminance_of
from .pyramid import gaussian_pyramid

# neighbour offsets (dy, dx) in bit order TL, T, TR, L, R, BL, B, BR (MSB first)
CENSUS_OFFSETS = ((-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1))
POPCOUNT = np.array([bin(i).count("1") for i in range(256)], dtype=np.int32)
EXHAUSTIVE_RADIUS = 8
THREE_STEP = (4, 2, 1)
MAX_IMAGE_DISPLACEMENT = sum(THREE_STEP) + 2 * (sum(THREE_STEP) + 2 * EXHAUSTIVE_RADIUS)


@dataclass
class CensusMap:
    codes: np.ndarray  # uint8, one 8-bit string per pixel

    def bits(self, y: int, x: int) -> str:
        return format(int(self.codes[y, x]), "08b")


@dataclass
class DisplacementField:
    dx: np.ndarray
    dy: np.ndarray
    valid: np.ndarray

    @property
    def magnitude(self) -> np.ndarray:
        return np.hypot(self.dx, self.dy)

    @property
    def shape(self):
        return self.dx.shape

    def to_planes(self) -> np.ndarray:
        return np.stack([self.dx, self.dy, self.valid.astype(np.float64)], axis=-1)

    @classmethod
    def from_planes(cls, arr) -> "DisplacementField":
        arr = np.asarray(arr, dtype=np.float64)
        return cls(arr[..., 0].copy(), arr[..., 1].copy(), arr[..., 2] > 0.5)


@dataclass
class VelocityField:
    vx: np.ndarray  # deg/s
    vy: np.ndarray

    @property
    def speed(self) -> np.ndarray:
        return np.hypot(self.vx, self.vy)

    @property
    def shape(self):
        return self.vx.shape

    def to_planes(self) -> np.ndarray:
        return np.stack([self.vx, self.vy, self.speed], axis=-1)

    @classmethod
    def from_planes(cls, arr) -> "VelocityField":
        arr = np.asarray(arr, dtype=np.float64)
        return cls(arr[..., 0].copy(), arr[..., 1].copy())

    @classmethod
    def still(cls, shape) -> "VelocityField":
        return cls(np.zeros(shape), np.zeros(shape))


# ---------------------------------------------------------------------------
# census / Hamming


def census_transform(channel) -> CensusMap:
    """Bit set where the neighbour is >= the centre pixel; edges replicate."""
    a = as_plane(channel)
    padded = np.pad(a, 1, mode="edge")
    h, w = a.shape
    codes = np.zeros((h, w), dtype=np.uint8)
    for bit, (dy, dx) in enumerate(CENSUS_OFFSETS):
        nb = padded[1 + dy : 1 + dy + h, 1 + dx : 1 + dx + w]
        codes |= (nb >= a).astype(np.uint8) << np.uint8(7 - bit)
    return CensusMap(codes)


def hamming_distance(a, b) -> int:
    """Number of differing bits between two bit strings or integers."""
    if isinstance(a, str) or isinstance(b, str):
        if not (isinstance(a, str) and isinstance(b, str)):
            raise TypeError("compare strings with strings")
        if len(a) != len(b):
            raise ValueError(f"bit strings differ in length ({len(a)} vs {len(b)})")
        return sum(x != y for x, y in zip(a, b))
    return bin(int(a) ^ int(b)).count("1")


def _box3(h: np.ndarray) -> np.ndarray:
    return ndimage.correlate(h, np.ones((3, 3), dtype=np.int32), mode="nearest")


def _prefer(cost, best, dx, dy, bdx, bdy):
    """Lower cost wins; ties go to smaller |d|, then smaller (dx, dy)."""
    m, bm = dx * dx + dy * dy, bdx * bdx + bdy * bdy
    return (cost < best) | (
        (cost == best) & ((m < bm) | ((m == bm) & ((dx < bdx) | ((dx == bdx) & (dy < bdy)))))
    )


def exhaustive_search(c0: np.ndarray, c1: np.ndarray, radius: int = EXHAUSTIVE_RADIUS):
    """Full search minimising the 3x3-aggregated Hamming cost."""
    h, w = c0.shape
    yy, xx = np.mgrid[0:h, 0:w]
    best = np.full((h, w), np.iinfo(np.int32).max, dtype=np.int32)
    bdx = np.zeros((h, w), dtype=np.int64)
    bdy = np.zeros((h, w), dtype=np.int64)
    cands = sorted(
        ((dx, dy) for dy in range(-radius, radius + 1) for dx in range(-radius, radius + 1)),
        key=lambda d: (d[0] ** 2 + d[1] ** 2, d[0], d[1]),
    )
    for dx, dy in cands:
        ty = np.clip(yy + dy, 0, h - 1)
        tx = np.clip(xx + dx, 0, w - 1)
        cost = _box3(POPCOUNT[c0 ^ c1[ty, tx]])
        # candidates arrive in tie-break order, so strict improvement suffices
        better = cost < best
        best[better] = cost[better]
        bdx[better] = dx
        bdy[better] = dy
    return bdx, bdy, best


def _gathered_cost(c0, c1, dx, dy):
    h, w = c0.shape
    yy, xx = np.mgrid[0:h, 0:w]
    cost = np.zeros((h, w), dtype=np.int32)
    for qy in (-1, 0, 1):
        for qx in (-1, 0, 1):
            py = np.clip(yy + qy, 0, h - 1)
            px = np.clip(xx + qx, 0, w - 1)
            ty = np.clip(py + dy, 0, h - 1)
            tx = np.clip(px + dx, 0, w - 1)
            cost += POPCOUNT[c0[py, px] ^ c1[ty, tx]]
    return cost


def three_step_search(c0, c1, dx0, dy0, steps=THREE_STEP):
    """Refine per-pixel initial displacements with shrinking 9-point patterns."""
    dx, dy = dx0.astype(np.int64).copy(), dy0.astype(np.int64).copy()
    best = _gathered_cost(c0, c1, dx, dy)
    for s in steps:
        cx, cy = dx.copy(), dy.copy()
        for oy in (-s, 0, s):
            for ox in (-s, 0, s):
                if ox == 0 and oy == 0:
                    continue
                ndx, ndy = cx + ox, cy + oy
                cost = _gathered_cost(c0, c1, ndx, ndy)
                better = _prefer(cost, best, ndx, ndy, dx, dy)
                best[better] = cost[better]
                dx[better] = ndx[better]
                dy[better] = ndy[better]
    return dx, dy, best


def _achromatic(frame) -> np.ndarray:
    if not isinstance(frame, ImageBuffer) and np.ndim(frame) == 3 and np.shape(frame)[2] == 3:
        frame = ImageBuffer(frame)  # bare arrays are linear RGB
    if isinstance(frame, ImageBuffer) and frame.channels == 3:
        return luminance_of(frame).plane(0)
    return as_plane(frame)


def _propagate(d: np.ndarray, shape) -> np.ndarray:
    yy, xx = np.mgrid[0 : shape[0], 0 : shape[1]]
    return 2 * d[yy // 2, xx // 2]


def match_image_motion(frame_n, frame_n1) -> DisplacementField:
    """Hierarchical census matching between two frames."""
    a0, a1 = _achromatic(frame_n), _achromatic(frame_n1)
    if a0.shape != a1.shape:
        raise ValueError(f"frame sizes differ: {a0.shape} vs {a1.shape}")
    p0 = gaussian_pyramid(a0, 3, strict=False)
    p1 = gaussian_pyramid(a1, 3, strict=False)
    census0 = [census_transform(lv).codes for lv in p0.levels]
    census1 = [census_transform(lv).codes for lv in p1.levels]
    dx, dy, _ = exhaustive_search(census0[2], census1[2])
    for level in (1, 0):
        shape = census0[level].shape
        dx, dy, _ = three_step_search(
            census0[level], census1[level], _propagate(dx, shape), _propagate(dy, shape)
        )
    return DisplacementField(dx.astype(np.float64), dy.astype(np.float64), np.ones(a0.shape, dtype=bool))


# ---------------------------------------------------------------------------
# model based


def project_model_motion(scene, frame: int, width: int, height: int) -> DisplacementField:
    """Reprojection of every pixel's surface point into the next frame."""
    from .harness.raytrace import intersect, to_local, to_world

    nxt = frame + 1
    cam0, cam1 = scene.camera(frame), scene.camera(nxt)
    scene.geometry(nxt)  # validates transforms for frame N+1
    dirs = cam0.rays(width, height).reshape(-1, 3)
    origins = np.broadcast_to(cam0.position, dirs.shape)
    hit = intersect(scene, frame, origins, dirs)
    world1 = cam0.position + scene.far_distance * dirs  # background: far point
    m = hit.mask
    if m.any():
        local = to_local(scene, frame, hit.prim[m], hit.point[m])
        world1[m] = to_world(scene, nxt, hit.prim[m], local)
    x1, y1, front = cam1.project(world1, width, height)
    yy, xx = np.mgrid[0:height, 0:width]
    dx = x1.reshape(height, width) - xx
    dy = y1.reshape(height, width) - yy
    x1, y1 = x1.reshape(height, width), y1.reshape(height, width)
    valid = front.reshape(height, width) & (x1 > -0.5) & (x1 < width - 0.5) & (y1 > -0.5) & (y1 < height - 0.5)
    if not valid.all():
        if valid.any():
            _, (iy, ix) = ndimage.distance_transform_edt(~valid, return_indices=True)
            dx, dy = dx[iy, ix], dy[iy, ix]
        else:
            dx, dy = np.zeros_like(dx), np.zeros_like(dy)
    return DisplacementField(dx, dy, valid)


def displacement_to_velocity(d: DisplacementField, geom: DisplayGeometry | None = None) -> VelocityField:
    """Pixels per frame -> degrees per second."""
    geom = geom or DisplayGeometry()
    scale = geom.frames_per_second / geom.pixels_per_degree
    return VelocityField(d.dx * scale, d.dy * scale)
