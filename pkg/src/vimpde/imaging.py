"""8-bit grayscale images: PGM I/O, unit-range conversion, noise and quality metrics."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import field as fc
from .errors import DimensionError, ParameterError, PgmParseError
from .field import GridField, GridGeometry

__all__ = [
    "ImageU8",
    "QualityReport",
    "read_pgm",
    "write_pgm",
    "load_pgm",
    "save_pgm",
    "to_unit",
    "from_unit",
    "gaussian_noise",
    "add_gaussian_noise",
    "psnr",
    "shapes_image",
    "MAIN_EDGE",
    "edge_contrast",
]


@dataclass(frozen=True, eq=False)
class ImageU8:
    width: int
    height: int
    pixels: np.ndarray

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise DimensionError(f"image dimensions must be positive, got {self.width}x{self.height}")
        px = np.asarray(self.pixels)
        if px.size != self.width * self.height:
            raise DimensionError(f"{px.size} pixels for a {self.width}x{self.height} image")
        if px.size and (px.min() < 0 or px.max() > 255):
            raise ParameterError("pixel values must lie in [0, 255]")
        object.__setattr__(self, "pixels", px.astype(np.uint8).reshape(self.height, self.width))

    def __eq__(self, other):
        return (isinstance(other, ImageU8) and self.width == other.width and self.height == other.height
                and np.array_equal(self.pixels, other.pixels))


_WHITESPACE = b" \t\r\n\v\f"


class _HeaderReader:
    def __init__(self, data):
        self.data = data
        self.pos = 0

    def skip_space(self):
        data = self.data
        while self.pos < len(data):
            c = data[self.pos:self.pos + 1]
            if c == b"#":
                end = data.find(b"\n", self.pos)
                self.pos = len(data) if end < 0 else end + 1
            elif c in _WHITESPACE:
                self.pos += 1
            else:
                break

    def integer(self, what):
        self.skip_space()
        start = self.pos
        while self.pos < len(self.data) and self.data[self.pos:self.pos + 1].isdigit():
            self.pos += 1
        if start == self.pos:
            if start >= len(self.data):
                raise PgmParseError(f"unexpected end of data while reading {what}", start)
            raise PgmParseError(f"expected an integer for {what}", start)
        return int(self.data[start:self.pos])


def read_pgm(data: bytes) -> ImageU8:
    """Parse a P2 (ASCII) or P5 (binary) PGM with maxval 255."""
    data = bytes(data)
    magic = data[:2]
    if magic not in (b"P2", b"P5"):
        raise PgmParseError(f"unsupported magic number {magic!r}", 0)
    reader = _HeaderReader(data)
    reader.pos = 2
    if reader.pos < len(data) and data[2:3] not in _WHITESPACE + b"#":
        raise PgmParseError("magic number must be followed by whitespace", 2)
    width = reader.integer("width")
    height = reader.integer("height")
    if width == 0 or height == 0:
        raise PgmParseError(f"image dimensions must be positive, got {width}x{height}", reader.pos)
    reader.skip_space()
    maxval_at = reader.pos
    maxval = reader.integer("maxval")
    if maxval != 255:
        raise PgmParseError(f"only maxval 255 is supported, got {maxval}", maxval_at)
    count = width * height

    if magic == b"P5":
        if reader.pos >= len(data) or data[reader.pos:reader.pos + 1] not in _WHITESPACE:
            raise PgmParseError("missing whitespace after maxval", reader.pos)
        start = reader.pos + 1
        if len(data) - start < count:
            raise PgmParseError(f"truncated payload: expected {count} bytes, got {len(data) - start}", len(data))
        pixels = np.frombuffer(data, dtype=np.uint8, count=count, offset=start)
    else:
        values = []
        for _ in range(count):
            reader.skip_space()
            at = reader.pos
            v = reader.integer("pixel value")
            if v > 255:
                raise PgmParseError(f"pixel value {v} exceeds maxval", at)
            values.append(v)
        pixels = np.array(values, dtype=np.uint8)
    return ImageU8(width, height, pixels.copy())


def write_pgm(img: ImageU8) -> bytes:
    header = b"P5\n%d %d\n255\n" % (img.width, img.height)
    return header + img.pixels.astype(np.uint8).tobytes()


def load_pgm(path) -> ImageU8:
    with open(path, "rb") as fh:
        data = fh.read()
    try:
        return read_pgm(data)
    except PgmParseError as exc:
        raise PgmParseError(f"{path}: {exc.reason}", exc.offset) from None


def save_pgm(path, img: ImageU8):
    with open(path, "wb") as fh:
        fh.write(write_pgm(img))


def to_unit(img: ImageU8) -> GridField:
    return GridField(GridGeometry(img.width, img.height), img.pixels.astype(np.float64) / 255.0)


def from_unit(f: GridField) -> ImageU8:
    """Clamp to [0, 1], scale by 255 and round half up."""
    v = np.clip(f.values, 0.0, 1.0) * 255.0
    px = np.floor(v + 0.5).astype(np.uint8)
    return ImageU8(f.geometry.nx, f.geometry.ny, px)


def gaussian_noise(count: int, seed: int) -> np.ndarray:
    """``count`` standard normal deviates, reproducible across platforms.

    Algorithm: Philox4x64-10 keyed with ``seed`` (counter starting at 0)
    yields 64-bit words ``w``; each maps to ``u = ((w >> 11) + 0.5) * 2**-53``
    in (0, 1). Consecutive pairs ``(u1, u2)`` give
    ``sqrt(-2 ln u1) * cos(2 pi u2)`` and ``sqrt(-2 ln u1) * sin(2 pi u2)``
    (Box-Muller), emitted in that order.
    """
    if seed < 0:
        raise ParameterError(f"seed must be non-negative, got {seed}")
    pairs = (count + 1) // 2
    words = np.random.Philox(key=seed).random_raw(2 * pairs)
    u = ((words >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53
    u1, u2 = u[0::2], u[1::2]
    rad = np.sqrt(-2.0 * np.log(u1))
    out = np.empty(2 * pairs)
    out[0::2] = rad * np.cos(2.0 * np.pi * u2)
    out[1::2] = rad * np.sin(2.0 * np.pi * u2)
    return out[:count]


def add_gaussian_noise(f: GridField, sigma_n: float, seed: int) -> GridField:
    """Add i.i.d. ``N(0, sigma_n^2)`` noise, cells in row-major order."""
    if not (sigma_n >= 0):
        raise ParameterError(f"noise level must be non-negative, got {sigma_n}")
    if sigma_n == 0:
        return f.like(f.values.copy())
    noise = gaussian_noise(f.geometry.size, seed).reshape(f.geometry.shape)
    return f.like(f.values + sigma_n * noise)


@dataclass(frozen=True)
class QualityReport:
    mse: float
    psnr_db: float
    min: float
    max: float
    mean: float

    @property
    def psnr_infinite(self):
        return math.isinf(self.psnr_db)


def psnr(a: GridField, b: GridField, peak: float = 1.0) -> QualityReport:
    """MSE and PSNR of ``a`` against ``b``; intensity statistics are those of ``a``."""
    if a.geometry.shape != b.geometry.shape:
        raise DimensionError(f"cannot compare grids {a.geometry.shape} and {b.geometry.shape}")
    if not peak > 0:
        raise ParameterError(f"peak must be positive, got {peak}")
    diff = a.values - b.values
    mse = float(np.mean(diff * diff))
    value = math.inf if mse == 0 else 10.0 * math.log10(peak * peak / mse)
    v = a.values
    return QualityReport(mse, value, float(v.min()), float(v.max()), float(v.mean()))


# row and column span crossing the right edge of the large rectangle
MAIN_EDGE = (64, slice(52, 76))


def shapes_image(n: int = 128) -> GridField:
    """Piecewise-constant test scene: a tall rectangle, a disc and a small square."""
    if n < 32:
        raise DimensionError("shapes image needs n >= 32")
    s = n / 128.0
    X, Y = GridGeometry(n, n).mesh()
    u = np.full((n, n), 0.2)
    u[(X >= 16 * s) & (X < 64 * s) & (Y >= 24 * s) & (Y < 104 * s)] = 0.8
    u[(X - 96 * s) ** 2 + (Y - 64 * s) ** 2 <= (18 * s) ** 2] = 0.5
    u[(X >= 84 * s) & (X < 108 * s) & (Y >= 98 * s) & (Y < 118 * s)] = 0.65
    return GridField(GridGeometry(n, n), u)


def edge_contrast(f: GridField, edge=MAIN_EDGE) -> float:
    """Largest central-difference gradient magnitude along a cross-section."""
    row, cols = edge
    grad = fc.gradient(f)
    mag = np.hypot(grad.x[row, cols], grad.y[row, cols])
    return float(mag.max())
