"""Frame and map I/O, opponent colour conversion and display geometry.

Frames are held as ``(H, W, C)`` float64 arrays inside an :class:`ImageBuffer`.
Two on-disk formats are supported: binary PPM (``P6``, 8 bit) and PFM
(``PF`` three channel / ``Pf`` one channel, 32 bit float, little endian).
"""
from __future__ import annotations

import enum
import os
import re
from dataclasses import dataclass

import numpy as np

GAMMA = 2.2

# Linear RGB -> (A, C1, C2).  A is the Rec. 709 / sRGB luminance row
# (IEC 61966-2-1), so A(white) == 1.  C1 (red-green) and C2 (yellow-blue)
# are zero-sum rows: achromatic inputs carry no chromatic signal.
OPPONENT_MATRIX = np.array(
    [
        [0.2126, 0.7152, 0.0722],
        [1.0, -1.0, 0.0],
        [-0.5, -0.5, 1.0],
    ]
)
OPPONENT_MATRIX.setflags(write=False)


class ColorSpace(enum.Enum):
    LINEAR_RGB = "LinearRGB"
    OPPONENT = "OpponentAC1C2"
    SCALAR = "Scalar"


class ImageError(ValueError):
    """Raised for unreadable, malformed or mismatched image data."""


_PLANES = {ColorSpace.LINEAR_RGB: 3, ColorSpace.OPPONENT: 3, ColorSpace.SCALAR: 1}


@dataclass(frozen=True)
class ImageBuffer:
    data: np.ndarray
    space: ColorSpace = ColorSpace.LINEAR_RGB

    def __post_init__(self):
        data = np.array(self.data, dtype=np.float64)
        if data.ndim == 2:
            data = data[:, :, None]
        if data.ndim != 3:
            raise ImageError(f"expected (H, W, C) data, got shape {data.shape}")
        if data.shape[0] < 1 or data.shape[1] < 1:
            raise ImageError("image must be at least 1x1")
        if data.shape[2] != _PLANES[self.space]:
            raise ImageError(
                f"{self.space.value} needs {_PLANES[self.space]} planes, got {data.shape[2]}"
            )
        if not np.all(np.isfinite(data)):
            raise ImageError("image contains non-finite values")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def channels(self) -> int:
        return self.data.shape[2]

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape[:2]

    def plane(self, index: int = 0) -> np.ndarray:
        return self.data[:, :, index]

    @classmethod
    def scalar(cls, plane) -> "ImageBuffer":
        return cls(np.asarray(plane, dtype=np.float64)[:, :, None], ColorSpace.SCALAR)


@dataclass(frozen=True)
class DisplayGeometry:
    """Viewing conditions shared by the whole pipeline."""

    pixels_per_degree: float = 31.0
    frames_per_second: float = 30.0
    max_display_luminance: float = 100.0

    def __post_init__(self):
        for name in ("pixels_per_degree", "frames_per_second", "max_display_luminance"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")


def as_plane(img) -> np.ndarray:
    """Return a 2-D float64 view of a scalar buffer or array."""
    if isinstance(img, ImageBuffer):
        if img.channels != 1:
            raise ImageError("expected a single-plane buffer")
        return img.plane(0)
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim == 3 and arr.shape[2] == 1:
        arr = arr[:, :, 0]
    if arr.ndim != 2:
        raise ImageError(f"expected a 2-D plane, got shape {arr.shape}")
    return arr


# ---------------------------------------------------------------------------
# colour


def rgb_to_opponent(img: ImageBuffer) -> ImageBuffer:
    if img.space is not ColorSpace.LINEAR_RGB:
        raise ImageError(f"rgb_to_opponent needs LinearRGB input, got {img.space.value}")
    return ImageBuffer(img.data @ OPPONENT_MATRIX.T, ColorSpace.OPPONENT)


def luminance_of(
    img: ImageBuffer,
    geom: DisplayGeometry | None = None,
    absolute: bool = False,
) -> ImageBuffer:
    """Achromatic plane of a 3-plane buffer.

    With ``absolute=True`` the relative A value is scaled to cd/m^2 by the
    display's maximum luminance.
    """
    if img.channels == 1:
        a = img.plane(0)
    elif img.space is ColorSpace.OPPONENT:
        a = img.plane(0)
    else:
        a = img.data @ OPPONENT_MATRIX[0]
    if absolute:
        a = a * (geom or DisplayGeometry()).max_display_luminance
    return ImageBuffer.scalar(a)


# ---------------------------------------------------------------------------
# file formats


def _read_header_tokens(fh, count: int) -> list[bytes]:
    tokens: list[bytes] = []
    while len(tokens) < count:
        line = fh.readline()
        if not line:
            raise ImageError("truncated header")
        line = line.split(b"#", 1)[0]
        tokens.extend(line.split())
    if len(tokens) != count:
        raise ImageError("malformed header")
    return tokens


def _read_pfm(fh) -> np.ndarray:
    magic, w, h, scale = _read_header_tokens(fh, 4)
    channels = {b"PF": 3, b"Pf": 1}[magic]
    try:
        width, height, scale = int(w), int(h), float(scale)
    except ValueError as exc:
        raise ImageError(f"malformed PFM header: {exc}") from None
    if width < 1 or height < 1:
        raise ImageError("PFM dimensions must be positive")
    dtype = "<f4" if scale < 0 else ">f4"
    count = width * height * channels
    raw = np.frombuffer(fh.read(4 * count), dtype=dtype)
    if raw.size != count:
        raise ImageError("PFM payload shorter than header claims")
    # PFM stores rows bottom to top.
    return raw.reshape(height, width, channels)[::-1].astype(np.float32)


def _read_ppm(fh) -> np.ndarray:
    magic, w, h, maxval = _read_header_tokens(fh, 4)
    if magic != b"P6":
        raise ImageError("only binary P6 PPM is supported")
    width, height, maxval = int(w), int(h), int(maxval)
    if maxval != 255:
        raise ImageError("only 8-bit PPM is supported")
    count = width * height * 3
    raw = np.frombuffer(fh.read(count), dtype=np.uint8)
    if raw.size != count:
        raise ImageError("PPM payload shorter than header claims")
    return raw.reshape(height, width, 3)


def read_pfm(path) -> np.ndarray:
    """Raw PFM contents as a float32 ``(H, W, C)`` array, rows top to bottom."""
    with open(path, "rb") as fh:
        magic = fh.read(2)
        fh.seek(0)
        if magic not in (b"PF", b"Pf"):
            raise ImageError(f"{path}: not a PFM file")
        return _read_pfm(fh)


def load_frame(path, expect_shape: tuple[int, int] | None = None) -> ImageBuffer:
    """Load a PPM or PFM frame as linear RGB.

    8-bit data is mapped to [0, 1] and linearised with gamma 2.2; PFM data is
    taken as already linear.  Single-channel PFM yields a Scalar buffer.
    """
    if not os.path.isfile(path):
        raise ImageError(f"{path}: no such file")
    with open(path, "rb") as fh:
        magic = fh.read(2)
        fh.seek(0)
        if magic in (b"PF", b"Pf"):
            data = _read_pfm(fh).astype(np.float64)
        elif magic == b"P6":
            data = (_read_ppm(fh) / 255.0) ** GAMMA
        else:
            raise ImageError(f"{path}: unrecognised image format")
    if expect_shape is not None and data.shape[:2] != tuple(expect_shape):
        raise ImageError(
            f"{path}: size {data.shape[1]}x{data.shape[0]} does not match "
            f"sequence size {expect_shape[1]}x{expect_shape[0]}"
        )
    space = ColorSpace.SCALAR if data.shape[2] == 1 else ColorSpace.LINEAR_RGB
    return ImageBuffer(data, space)


def load_sequence(paths) -> list[ImageBuffer]:
    frames: list[ImageBuffer] = []
    for p in paths:
        frames.append(load_frame(p, frames[0].shape if frames else None))
    return frames


def save_pfm(path, data) -> None:
    arr = np.asarray(data.data if isinstance(data, ImageBuffer) else data)
    if arr.ndim == 2:
        arr = arr[:, :, None]
    if arr.shape[2] not in (1, 3):
        raise ImageError("PFM holds one or three planes")
    magic = b"PF" if arr.shape[2] == 3 else b"Pf"
    h, w = arr.shape[:2]
    with open(path, "wb") as fh:
        fh.write(magic + b"\n%d %d\n-1.0\n" % (w, h))
        fh.write(np.ascontiguousarray(arr[::-1], dtype="<f4").tobytes())


def save_ppm(path, data, encode_gamma: bool = True) -> None:
    """Write 8-bit P6.  Linear values in [0, 1] are gamma encoded by default."""
    arr = np.asarray(data.data if isinstance(data, ImageBuffer) else data, dtype=np.float64)
    if arr.ndim == 2:
        arr = arr[:, :, None]
    if arr.shape[2] == 1:
        arr = np.repeat(arr, 3, axis=2)
    arr = np.clip(arr, 0.0, 1.0)
    if encode_gamma:
        arr = arr ** (1.0 / GAMMA)
    pix = np.round(arr * 255.0).astype(np.uint8)
    h, w = pix.shape[:2]
    with open(path, "wb") as fh:
        fh.write(b"P6\n%d %d\n255\n" % (w, h))
        fh.write(pix.tobytes())


def visualize_map(plane) -> np.ndarray:
    """Linear map of [min, max] onto [0, 1]; constant planes become 0."""
    plane = as_plane(plane)
    lo, hi = float(plane.min()), float(plane.max())
    if hi <= lo:
        return np.zeros_like(plane)
    return (plane - lo) / (hi - lo)


def save_map(path_stem, plane) -> tuple[str, str]:
    """Write a scalar map as ``<stem>.pfm`` plus an 8-bit ``<stem>.ppm`` preview."""
    stem = re.sub(r"\.(pfm|ppm)$", "", str(path_stem))
    pfm, ppm = stem + ".pfm", stem + ".ppm"
    save_pfm(pfm, as_plane(plane))
    save_ppm(ppm, visualize_map(plane), encode_gamma=False)
    return pfm, ppm
