"""Command-line driver.

    alephmap [--config FILE] [--jobs N] <command> [options]

Commands: estimate, motion, saliency, aleph, oracle, render, noisemap, compare.
Exit status is 0 on success, 1 on usage errors and 2 on data errors.  Every
written artifact gets a ``<file>.meta`` sidecar holding the full configuration.
"""
from __future__ import annotations

import argparse
import os
import sys
from dataclasses import fields

import numpy as np

from . import __version__, oracle
from .aleph import DEFAULT_PARAMS, ELEVATION_CEILING
from .config import ConfigError, PipelineConfig, load_config
from .imgio import ImageError, load_frame, luminance_of, read_pfm, save_map, save_pfm, save_ppm
from .motion import DisplacementField, VelocityField, displacement_to_velocity, match_image_motion
from .pyramid import BAND_FREQUENCIES, PyramidError, gaussian_pyramid, laplacian_bands
from .saliency import CENTER_SURROUND_PAIRS, CHANNELS

USAGE_ERROR = 1
DATA_ERROR = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse exits with 2 by default
        self.print_usage(sys.stderr)
        self.exit(USAGE_ERROR, f"{self.prog}: error: {message}\n")


def constants_table() -> str:
    p = DEFAULT_PARAMS
    rows = [
        ("version", __version__),
        ("c0", p.c0),
        ("c1", p.c1),
        ("c2", p.c2),
        ("v_min", p.v_min),
        ("v_max", p.v_max),
        ("tracking_efficiency", p.tracking_efficiency),
        ("aleph_ceiling", ELEVATION_CEILING),
        ("pairs", " ".join(f"({c},{s})" for c, s in CENTER_SURROUND_PAIRS)),
        ("rho_i", " ".join(f"{r:g}" for r in BAND_FREQUENCIES)),
    ]
    return "".join(f"{k:<20} {v}\n" for k, v in rows)


class _Version(argparse.Action):
    def __init__(self, option_strings, dest, **kw):
        super().__init__(option_strings, dest, nargs=0, default=argparse.SUPPRESS, help="print constants and exit")

    def __call__(self, parser, namespace, values, option_string=None):
        sys.stdout.write(constants_table())
        parser.exit(0)


# ---------------------------------------------------------------------------
# helpers


def _write_meta(path: str, command: str, cfg: PipelineConfig, inputs: dict) -> None:
    with open(path + ".meta", "w", encoding="utf-8") as fh:
        fh.write(f"command={command}\nversion={__version__}\n")
        for k, v in inputs.items():
            fh.write(f"input.{k}={v}\n")
        fh.write(cfg.to_text())


def _ensure_dir(path: str) -> None:
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)


def _save_map(stem, plane, command, cfg, inputs) -> str:
    _ensure_dir(stem)
    pfm, ppm = save_map(stem, plane)
    _write_meta(pfm, command, cfg, inputs)
    return pfm


def _save_planes(path, arr, command, cfg, inputs) -> str:
    _ensure_dir(path)
    save_pfm(path, arr)
    _write_meta(path, command, cfg, inputs)
    return path


def _scalar_cd(path: str, cfg: PipelineConfig) -> np.ndarray:
    """Absolute luminance of a frame; single-plane files are taken as cd/m^2."""
    img = load_frame(path)
    if img.channels == 1:
        return img.plane(0).copy()
    return luminance_of(img, cfg.geometry, absolute=True).plane(0).copy()


def _plane_file(path: str) -> np.ndarray:
    arr = read_pfm(path).astype(np.float64)
    if arr.shape[2] != 1:
        raise ImageError(f"{path}: expected a single-plane map")
    return arr[:, :, 0]


def _load_displacement(path: str) -> DisplacementField:
    arr = read_pfm(path)
    if arr.shape[2] != 3:
        raise ImageError(f"{path}: displacement files hold three planes (dx, dy, valid)")
    return DisplacementField.from_planes(arr)


def _displacement(args, cfg: PipelineConfig, shape=None) -> DisplacementField:
    if getattr(args, "displacement", None):
        return _load_displacement(args.displacement)
    if cfg.motion == "model":
        if not args.scene:
            raise UsageError("model motion needs --scene (or pass --motion image with two frames)")
        from .harness.scene import load_scene
        from .motion import project_model_motion

        h, w = shape if shape is not None else (cfg.height, cfg.width)
        return project_model_motion(load_scene(args.scene), args.frame, w, h)
    if not (args.frame_n and args.frame_n1):
        raise UsageError("image motion needs two frames")
    return match_image_motion(load_frame(args.frame_n), load_frame(args.frame_n1, shape))


# ---------------------------------------------------------------------------
# commands


def cmd_estimate(args, cfg):
    from .harness.render import trace_direct
    from .harness.scene import load_scene

    scene = load_scene(args.scene)
    frames = args.frames if args.frames else scene.frames
    os.makedirs(args.out_dir, exist_ok=True)
    for f in frames:
        img = trace_direct(scene, f, cfg.width, cfg.height, cfg.spp, cfg.seed, correlated=True)
        path = os.path.join(args.out_dir, f"frame_{f:04d}.pfm")
        _save_planes(path, img, "estimate", cfg, {"scene": args.scene, "frame": f})
        save_ppm(path[:-4] + ".ppm", img)
        print(path)


def cmd_motion(args, cfg):
    shape = load_frame(args.frame_n).shape if args.frame_n else None
    d = _displacement(args, cfg, shape)
    v = displacement_to_velocity(d, cfg.geometry)
    inputs = {"frame_n": args.frame_n, "frame_n1": args.frame_n1, "scene": args.scene, "frame": args.frame}
    _save_planes(args.out + ".pfm", d.to_planes(), "motion", cfg, inputs)
    _save_planes(args.out + "_velocity.pfm", v.to_planes(), "motion", cfg, inputs)
    print(f"max_displacement={float(d.magnitude.max()):.6g}\ninvalid_pixels={int((~d.valid).sum())}")


def _velocity(args, shape, cfg) -> VelocityField:
    if args.velocity:
        arr = read_pfm(args.velocity)
        if arr.shape[2] != 3 or arr.shape[:2] != shape:
            raise ImageError(f"{args.velocity}: expected a 3-plane velocity file of the frame's size")
        return VelocityField.from_planes(arr)
    return VelocityField.still(shape)


def cmd_saliency(args, cfg):
    from .saliency import compute_saliency

    frame = load_frame(args.frame)
    if frame.channels != 3:
        raise ImageError("saliency needs a colour frame")
    sal = compute_saliency(frame, _velocity(args, frame.shape, cfg))
    inputs = {"frame": args.frame, "velocity": args.velocity}
    _save_map(args.out, sal.S, "saliency", cfg, inputs)
    for c in CHANNELS:
        _save_map(f"{args.out}_{c}", sal.conspicuity[c], "saliency", cfg, inputs)
    save_ppm(args.out + "_overlay.ppm", np.asarray(frame.data) * sal.S[:, :, None])
    print("feature_maps=" + " ".join(f"{c}:{sal.feature_counts[c]}" for c in CHANNELS))


def cmd_aleph(args, cfg):
    from .pipeline import aleph_from_frames

    frame = load_frame(args.frame_n)
    if frame.channels != 3:
        raise ImageError("aleph needs a colour estimate frame")
    d = _displacement(args, cfg, frame.shape)
    res = aleph_from_frames(frame, displacement=d, mode=cfg.compensation, params=cfg.csf, geom=cfg.geometry)
    inputs = {"frame_n": args.frame_n, "frame_n1": args.frame_n1, "scene": args.scene, "frame": args.frame,
              "displacement": args.displacement}
    _save_map(args.out, res.aleph.values, "aleph", cfg, inputs)
    if args.dump_saliency:
        _save_map(args.out + "_saliency", res.saliency.S, "aleph", cfg, inputs)
    if args.dump_bands:
        os.makedirs(args.dump_bands, exist_ok=True)
        lum = luminance_of(frame).plane(0)
        gauss = gaussian_pyramid(lum, len(BAND_FREQUENCIES) + 1, cfg.pixels_per_degree)
        for i, lv in enumerate(gauss.levels):
            _save_map(os.path.join(args.dump_bands, f"gauss_{i}"), lv, "aleph", cfg, inputs)
        for i, lv in enumerate(laplacian_bands(gauss).levels):
            _save_map(os.path.join(args.dump_bands, f"band_{i}"), lv, "aleph", cfg, inputs)
        for i in range(res.bands.R.shape[0]):
            _save_map(os.path.join(args.dump_bands, f"weight_{i}"), res.bands.R[i], "aleph", cfg, inputs)
    a = res.aleph.values
    print(f"aleph_min={a.min():.6g}\naleph_max={a.max():.6g}\naleph_mean={a.mean():.6g}")


def cmd_oracle(args, cfg):
    a = _plane_file(args.aleph)
    lum = _scalar_cd(args.frame, cfg)
    if lum.shape != a.shape:
        raise ImageError("aleph map and frame differ in size")
    if cfg.alpha_mode == "compress":
        alpha = oracle.compress_accuracy(a, cfg.alpha_acc)
    else:
        alpha = oracle.scale_add_accuracy(a, cfg.alpha_acc, cfg.k)
    la = oracle.adaptation_luminance(lum, cfg.geometry)
    t = oracle.threshold_map(a, la)
    budget = oracle.asp_budget(cfg.max_samples, a, cfg.floor)
    inputs = {"aleph": args.aleph, "frame": args.frame}
    _save_map(args.out + "_alpha", alpha, "oracle", cfg, inputs)
    _save_map(args.out + "_threshold", t.dL, "oracle", cfg, inputs)
    _save_map(args.out + "_budget", budget.astype(np.float64), "oracle", cfg, inputs)
    print(f"threshold_min={t.dL.min():.6g}\nthreshold_max={t.dL.max():.6g}\nmean_budget={budget.mean():.6g}")


def cmd_render(args, cfg):
    from .harness.render import RenderMode, RenderParams, render
    from .harness.scene import load_scene

    scene = load_scene(args.scene)
    mode = RenderMode(args.mode)
    aleph = _plane_file(args.aleph) if args.aleph else None
    thr = _plane_file(args.threshold) if args.threshold else None
    if mode in (RenderMode.ALEPH_ALPHA, RenderMode.ASP) and aleph is None:
        raise UsageError(f"{mode.value} mode needs --aleph")
    if mode is RenderMode.AVT and thr is None:
        raise UsageError("avt mode needs --threshold")
    params = RenderParams(
        width=cfg.width, height=cfg.height, alpha_acc=cfg.alpha_acc, direct_spp=cfg.spp, max_spp=cfg.max_samples,
        asp_floor=cfg.floor, irradiance_samples=cfg.irradiance_samples, seed=cfg.seed, geometry=cfg.geometry,
    )
    img, stats = render(scene, args.frame, mode, params, aleph=aleph, threshold=thr)
    inputs = {"scene": args.scene, "frame": args.frame, "mode": mode.value, "aleph": args.aleph,
              "threshold": args.threshold}
    _save_planes(args.out + ".pfm", img, "render", cfg, inputs)
    save_ppm(args.out + ".ppm", img)
    with open(args.out + ".stats", "w", encoding="utf-8") as fh:
        fh.write(stats.to_text())
    sys.stdout.write(stats.to_text())


def cmd_noisemap(args, cfg):
    ref = _scalar_cd(args.reference, cfg)
    t = _plane_file(args.threshold)
    noisy = oracle.noise_inject(ref, t, cfg.seed, dtype=np.float32)
    _save_planes(args.out, noisy, "noisemap", cfg, {"reference": args.reference, "threshold": args.threshold})
    print(args.out)


def cmd_compare(args, cfg):
    a, b = _scalar_cd(args.a, cfg), _scalar_cd(args.b, cfg)
    t = _plane_file(args.threshold)
    if not (a.shape == b.shape == t.shape):
        raise ImageError("compare inputs differ in size")
    ratio = np.abs(a - b) / t
    if args.out:
        _save_map(args.out, ratio, "compare", cfg, {"a": args.a, "b": args.b, "threshold": args.threshold})
    print(f"max_ratio={float(ratio.max()):.9g}\nfraction_below={float((ratio < 1).mean()):.9g}")


COMMANDS = {
    "estimate": cmd_estimate,
    "motion": cmd_motion,
    "saliency": cmd_saliency,
    "aleph": cmd_aleph,
    "oracle": cmd_oracle,
    "render": cmd_render,
    "noisemap": cmd_noisemap,
    "compare": cmd_compare,
}


# ---------------------------------------------------------------------------
# parser


def _config_flags() -> argparse.ArgumentParser:
    """One ``--key`` override per config field (``mode`` is spelled ``--compensation``)."""
    p = _Parser(add_help=False)
    g = p.add_argument_group("configuration overrides")
    for f in fields(PipelineConfig):
        kind = {"int": int, "float": float}.get(f.type, str)
        flag = "--compensation" if f.name == "mode" else "--" + f.name.replace("_", "-")
        g.add_argument(flag, dest="cfg_" + f.name, type=kind, default=None,
                       metavar=f.name.upper())
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _config_flags()
    parser = _Parser(prog="alephmap", description="Perceptual error-tolerance maps for rendering.")
    parser.add_argument("--version", action=_Version)
    parser.add_argument("--config", help="key=value configuration file")
    parser.add_argument("--jobs", type=int, default=1, help="worker cap (all commands run single-threaded)")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser, metavar="command")
    sub.required = True

    p = sub.add_parser("estimate", parents=[common], help="direct-lighting estimate frames of a scene")
    p.add_argument("scene")
    p.add_argument("--frames", type=int, nargs="+")
    p.add_argument("--out-dir", required=True)

    def motion_inputs(p, frames_required=False):
        p.add_argument("frame_n", nargs=None if frames_required else "?")
        p.add_argument("frame_n1", nargs="?")
        p.add_argument("--scene")
        p.add_argument("--frame", type=int, default=0)

    p = sub.add_parser("motion", parents=[common], help="displacement and velocity fields")
    motion_inputs(p)
    p.add_argument("--out", required=True, help="output stem")

    p = sub.add_parser("saliency", parents=[common], help="saliency and conspicuity maps")
    p.add_argument("frame")
    p.add_argument("--velocity", help="3-plane velocity PFM (vx, vy, speed); default still")
    p.add_argument("--out", required=True)

    p = sub.add_parser("aleph", parents=[common], help="contrast elevation map")
    motion_inputs(p, frames_required=True)
    p.add_argument("--displacement", help="precomputed 3-plane displacement PFM")
    p.add_argument("--out", required=True)
    p.add_argument("--dump-bands", metavar="DIR", help="write pyramid levels and band weights")
    p.add_argument("--dump-saliency", action="store_true")

    p = sub.add_parser("oracle", parents=[common], help="ambient accuracy, thresholds, sample budgets")
    p.add_argument("aleph")
    p.add_argument("--frame", required=True, help="frame whose luminance sets adaptation")
    p.add_argument("--out", required=True)

    p = sub.add_parser("render", parents=[common], help="render a frame")
    p.add_argument("scene")
    p.add_argument("--frame", type=int, default=0)
    p.add_argument("--mode", choices=["uniform", "aleph-alpha", "avt", "asp"], default="uniform")
    p.add_argument("--aleph")
    p.add_argument("--threshold")
    p.add_argument("--out", required=True)

    p = sub.add_parser("noisemap", parents=[common], help="sub-threshold noisy copy of a frame")
    p.add_argument("reference")
    p.add_argument("--threshold", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("compare", parents=[common], help="per-pixel |a - b| / threshold")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--threshold", required=True)
    p.add_argument("--out")
    return parser


def _config(args) -> PipelineConfig:
    cfg = load_config(args.config) if args.config else PipelineConfig()
    overrides = {k[4:]: v for k, v in vars(args).items() if k.startswith("cfg_")}
    return cfg.updated(**overrides)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.jobs < 1:
            parser.error("--jobs must be >= 1")
    except SystemExit as exc:  # --version, --help and usage errors
        return int(exc.code or 0)
    try:
        cfg = _config(args)
    except (ConfigError, OSError) as exc:
        print(f"alephmap: {exc}", file=sys.stderr)
        return USAGE_ERROR
    try:
        COMMANDS[args.command](args, cfg)
    except UsageError as exc:
        print(f"alephmap {args.command}: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except (ImageError, PyramidError, OSError, ValueError) as exc:
        print(f"alephmap {args.command}: {exc}", file=sys.stderr)
        return DATA_ERROR
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
