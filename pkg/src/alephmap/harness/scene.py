"""Scene description: materials, primitives, per-frame rigid transforms, cameras.

Plain-text format, one directive per line, ``#`` starts a comment::

    mat    <name> <r> <g> <b> [glossy <ks> <exponent>] [checker <r> <g> <b> <size>]
    light  <name> <r> <g> <b>
    tri    <mat> x0 y0 z0  x1 y1 z1  x2 y2 z2
    sphere <mat> cx cy cz radius
    camera <frame> ex ey ez  lx ly lz  ux uy uz  vfov_deg
    xform  <frame> <prim> m00 m01 ... m33        (4x4, row major)
    far    <distance>

``light`` declares an emissive material.  Primitives are numbered from 0 in
file order.  A primitive without ``xform`` lines is static; one with any
``xform`` line must have one for every camera frame.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np


class SceneError(ValueError):
    pass


@dataclass
class Material:
    name: str
    albedo: np.ndarray = field(default_factory=lambda: np.full(3, 0.5))
    emission: np.ndarray = field(default_factory=lambda: np.zeros(3))
    glossy_ks: float = 0.0
    glossy_exponent: float = 0.0
    checker_albedo: np.ndarray | None = None
    checker_size: float = 0.0

    @property
    def emissive(self) -> bool:
        return bool(np.any(self.emission > 0))


@dataclass
class Primitive:
    kind: str  # "tri" | "sphere"
    material: str
    vertices: np.ndarray | None = None  # (3, 3) for triangles
    center: np.ndarray | None = None
    radius: float = 0.0


@dataclass
class Camera:
    position: np.ndarray
    look_at: np.ndarray
    up: np.ndarray
    vfov: float  # degrees

    def basis(self):
        w = self.look_at - self.position
        w = w / np.linalg.norm(w)
        u = np.cross(w, self.up)
        u = u / np.linalg.norm(u)
        v = np.cross(u, w)
        return u, v, w

    def _half_extents(self, width: int, height: int):
        th = math.tan(math.radians(self.vfov) / 2.0)
        return th * width / height, th

    def rays(self, width: int, height: int):
        """Unit ray directions through pixel centres, shape (H, W, 3), row 0 at top."""
        u, v, w = self.basis()
        tx, ty = self._half_extents(width, height)
        sx = ((np.arange(width) + 0.5) / width * 2.0 - 1.0) * tx
        sy = (1.0 - (np.arange(height) + 0.5) / height * 2.0) * ty
        d = w[None, None, :] + sx[None, :, None] * u + sy[:, None, None] * v
        return d / np.linalg.norm(d, axis=-1, keepdims=True)

    def project(self, points: np.ndarray, width: int, height: int):
        """Pixel coordinates (x, y) of world points; pixel centres land on integers.

        Returns ``(x, y, in_front)``.
        """
        u, v, w = self.basis()
        tx, ty = self._half_extents(width, height)
        rel = points - self.position
        z = rel @ w
        in_front = z > 1e-9
        zs = np.where(in_front, z, 1.0)
        sx = (rel @ u) / zs / tx
        sy = (rel @ v) / zs / ty
        x = (sx + 1.0) / 2.0 * width - 0.5
        y = (1.0 - sy) / 2.0 * height - 0.5
        return x, y, in_front


@dataclass
class FrameGeometry:
    """Primitives of one frame flattened into arrays for vectorised tracing."""

    tri_v0: np.ndarray
    tri_e1: np.ndarray
    tri_e2: np.ndarray
    tri_normal: np.ndarray
    tri_prim: np.ndarray
    sph_center: np.ndarray
    sph_radius: np.ndarray
    sph_prim: np.ndarray
    to_world: np.ndarray  # (P, 4, 4)
    to_local: np.ndarray  # (P, 4, 4)


@dataclass
class Scene:
    materials: dict[str, Material]
    primitives: list[Primitive]
    cameras: dict[int, Camera]
    xforms: dict[int, dict[int, np.ndarray]] = field(default_factory=dict)
    far: float | None = None

    def __post_init__(self):
        self.validate()
        self._geometry: dict[int, FrameGeometry] = {}

    # -- validation -------------------------------------------------------
    def validate(self):
        if not self.primitives:
            raise SceneError("no primitives")
        if not self.cameras:
            raise SceneError("no camera")
        for i, p in enumerate(self.primitives):
            if p.material not in self.materials:
                raise SceneError(f"primitive {i}: unknown material {p.material!r}")
        if not any(self.materials[p.material].emissive for p in self.primitives):
            raise SceneError("scene needs at least one emissive primitive")
        for prim, frames in self.xforms.items():
            if not 0 <= prim < len(self.primitives):
                raise SceneError(f"xform references missing primitive {prim}")
            missing = sorted(set(self.cameras) - set(frames))
            if missing:
                raise SceneError(f"missing frame transform for primitive {prim}, frame {missing[0]}")

    @property
    def frames(self) -> list[int]:
        return sorted(self.cameras)

    def camera(self, frame: int) -> Camera:
        try:
            return self.cameras[frame]
        except KeyError:
            raise SceneError(f"no camera for frame {frame}") from None

    def transform(self, prim: int, frame: int) -> np.ndarray:
        frames = self.xforms.get(prim)
        if frames is None:
            return np.eye(4)
        try:
            return frames[frame]
        except KeyError:
            raise SceneError(f"missing frame transform for primitive {prim}, frame {frame}") from None

    def material_of(self, prim: int) -> Material:
        return self.materials[self.primitives[prim].material]

    # -- derived quantities ----------------------------------------------
    @cached_property
    def bounding_sphere(self) -> tuple[np.ndarray, float]:
        pts = []
        for frame in self.frames:
            g = self.geometry(frame)
            pts.append(g.tri_v0)
            pts.append(g.tri_v0 + g.tri_e1)
            pts.append(g.tri_v0 + g.tri_e2)
            for c, r in zip(g.sph_center, g.sph_radius):
                pts.append(c[None] + r * np.vstack([np.eye(3), -np.eye(3)]))
        pts = np.vstack(pts)
        lo, hi = pts.min(axis=0), pts.max(axis=0)
        center = (lo + hi) / 2.0
        return center, float(np.linalg.norm(pts - center, axis=1).max())

    @property
    def far_distance(self) -> float:
        if self.far is not None:
            return float(self.far)
        return 4.0 * self.bounding_sphere[1]

    @cached_property
    def material_table(self):
        """Per-primitive material arrays."""
        mats = [self.material_of(i) for i in range(len(self.primitives))]
        albedo = np.array([m.albedo for m in mats], dtype=np.float64)
        checker = np.array(
            [m.checker_albedo if m.checker_albedo is not None else m.albedo for m in mats],
            dtype=np.float64,
        )
        return {
            "albedo": albedo,
            "checker_albedo": checker,
            "checker_size": np.array([m.checker_size for m in mats]),
            "emission": np.array([m.emission for m in mats], dtype=np.float64),
            "ks": np.array([m.glossy_ks for m in mats]),
            "exponent": np.array([m.glossy_exponent for m in mats]),
        }

    def geometry(self, frame: int) -> FrameGeometry:
        if frame in self._geometry:
            return self._geometry[frame]
        self.camera(frame)
        v0, e1, e2, tn, tp = [], [], [], [], []
        sc, sr, sp = [], [], []
        to_world = np.empty((len(self.primitives), 4, 4))
        for i, p in enumerate(self.primitives):
            m = self.transform(i, frame)
            to_world[i] = m
            if p.kind == "tri":
                v = p.vertices @ m[:3, :3].T + m[:3, 3]
                a, b = v[1] - v[0], v[2] - v[0]
                n = np.cross(a, b)
                norm = np.linalg.norm(n)
                if norm == 0:
                    raise SceneError(f"primitive {i}: degenerate triangle")
                v0.append(v[0]); e1.append(a); e2.append(b); tn.append(n / norm); tp.append(i)
            else:
                sc.append(m[:3, :3] @ p.center + m[:3, 3]); sr.append(p.radius); sp.append(i)
        geom = FrameGeometry(
            tri_v0=np.array(v0).reshape(-1, 3),
            tri_e1=np.array(e1).reshape(-1, 3),
            tri_e2=np.array(e2).reshape(-1, 3),
            tri_normal=np.array(tn).reshape(-1, 3),
            tri_prim=np.array(tp, dtype=np.intp),
            sph_center=np.array(sc).reshape(-1, 3),
            sph_radius=np.array(sr, dtype=np.float64),
            sph_prim=np.array(sp, dtype=np.intp),
            to_world=to_world,
            to_local=np.linalg.inv(to_world),
        )
        self._geometry[frame] = geom
        return geom

    @cached_property
    def light_prims(self) -> np.ndarray:
        return np.array(
            [i for i in range(len(self.primitives)) if self.material_of(i).emissive],
            dtype=np.intp,
        )


# ---------------------------------------------------------------------------
# parsing / writing


def _floats(tokens, n, lineno, what):
    if len(tokens) < n:
        raise SceneError(f"line {lineno}: {what} needs {n} numbers, got {len(tokens)}")
    try:
        return [float(t) for t in tokens[:n]]
    except ValueError as exc:
        raise SceneError(f"line {lineno}: {exc}") from None


def parse_scene(text: str) -> Scene:
    materials: dict[str, Material] = {}
    prims: list[Primitive] = []
    cameras: dict[int, Camera] = {}
    xforms: dict[int, dict[int, np.ndarray]] = {}
    far = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        tokens = raw.split("#", 1)[0].split()
        if not tokens:
            continue
        key, args = tokens[0], tokens[1:]
        try:
            if key == "mat":
                name = args[0]
                rgb = _floats(args[1:], 3, lineno, "mat")
                mat = Material(name, albedo=np.array(rgb))
                rest = args[4:]
                while rest:
                    opt = rest.pop(0)
                    if opt == "glossy":
                        mat.glossy_ks, mat.glossy_exponent = _floats(rest, 2, lineno, "glossy")
                        rest = rest[2:]
                    elif opt == "checker":
                        vals = _floats(rest, 4, lineno, "checker")
                        mat.checker_albedo = np.array(vals[:3])
                        mat.checker_size = vals[3]
                        rest = rest[4:]
                    else:
                        raise SceneError(f"line {lineno}: unknown mat option {opt!r}")
                materials[name] = mat
            elif key == "light":
                name = args[0]
                rgb = _floats(args[1:], 3, lineno, "light")
                materials[name] = Material(name, albedo=np.zeros(3), emission=np.array(rgb))
            elif key == "tri":
                v = _floats(args[1:], 9, lineno, "tri")
                prims.append(Primitive("tri", args[0], vertices=np.array(v).reshape(3, 3)))
            elif key == "sphere":
                v = _floats(args[1:], 4, lineno, "sphere")
                prims.append(Primitive("sphere", args[0], center=np.array(v[:3]), radius=v[3]))
            elif key == "camera":
                frame = int(args[0])
                v = _floats(args[1:], 10, lineno, "camera")
                cameras[frame] = Camera(np.array(v[0:3]), np.array(v[3:6]), np.array(v[6:9]), v[9])
            elif key == "xform":
                frame, prim = int(args[0]), int(args[1])
                m = np.array(_floats(args[2:], 16, lineno, "xform")).reshape(4, 4)
                xforms.setdefault(prim, {})[frame] = m
            elif key == "far":
                far = _floats(args, 1, lineno, "far")[0]
            else:
                raise SceneError(f"line {lineno}: unknown keyword {key!r}")
        except IndexError:
            raise SceneError(f"line {lineno}: missing arguments for {key!r}") from None
        except ValueError as exc:
            if isinstance(exc, SceneError):
                raise
            raise SceneError(f"line {lineno}: {exc}") from None
    return Scene(materials, prims, cameras, xforms, far)


def load_scene(path) -> Scene:
    with open(path) as fh:
        return parse_scene(fh.read())


def _fmt(values) -> str:
    return " ".join(repr(float(v)) for v in np.ravel(values))


def dump_scene(scene: Scene) -> str:
    lines = []
    for m in scene.materials.values():
        if m.emissive:
            lines.append(f"light {m.name} {_fmt(m.emission)}")
            continue
        line = f"mat {m.name} {_fmt(m.albedo)}"
        if m.glossy_ks > 0:
            line += f" glossy {_fmt([m.glossy_ks, m.glossy_exponent])}"
        if m.checker_albedo is not None:
            line += f" checker {_fmt(m.checker_albedo)} {m.checker_size!r}"
        lines.append(line)
    for p in scene.primitives:
        if p.kind == "tri":
            lines.append(f"tri {p.material} {_fmt(p.vertices)}")
        else:
            lines.append(f"sphere {p.material} {_fmt(p.center)} {p.radius!r}")
    for f in scene.frames:
        c = scene.cameras[f]
        lines.append(f"camera {f} {_fmt(c.position)} {_fmt(c.look_at)} {_fmt(c.up)} {c.vfov!r}")
    for prim in sorted(scene.xforms):
        for f in sorted(scene.xforms[prim]):
            lines.append(f"xform {f} {prim} {_fmt(scene.xforms[prim][f])}")
    if scene.far is not None:
        lines.append(f"far {scene.far!r}")
    return "\n".join(lines) + "\n"


def save_scene(scene: Scene, path) -> None:
    with open(path, "w") as fh:
        fh.write(dump_scene(scene))
