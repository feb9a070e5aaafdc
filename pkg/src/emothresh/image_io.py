"""Raster images, histograms and noise models.

Binary and ASCII PGM/PPM are read and written natively. Other formats
(PNG, JPEG, ...) go through Pillow when it is installed.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

NBINS = 256
CHANNEL_NAMES = {1: ("gray",), 3: ("R", "G", "B")}


class ImageFormatError(ValueError):
    """Raised for malformed or unsupported image and histogram files."""


@dataclass(frozen=True, eq=False)
class RasterImage:
    """8-bit image stored as a ``(height, width, channels)`` uint8 array."""

    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data)
        if data.ndim == 2:
            data = data[:, :, None]
        if data.ndim != 3 or data.shape[2] not in (1, 3):
            raise ValueError(f"expected (h, w, 1|3) array, got shape {data.shape}")
        if data.dtype != np.uint8:
            if data.size and (data.min() < 0 or data.max() > 255):
                raise ValueError("samples must lie in [0, 255]")
            data = data.astype(np.uint8)
        data = np.ascontiguousarray(data)
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @classmethod
    def from_samples(cls, width, height, channels, samples):
        samples = np.asarray(samples)
        if samples.size != width * height * channels:
            raise ValueError("samples length must equal width * height * channels")
        return cls(samples.reshape(height, width, channels))

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]

    @property
    def samples(self) -> np.ndarray:
        """Row-major interleaved samples."""
        return self.data.reshape(-1)

    @property
    def pixel_count(self) -> int:
        return self.height * self.width

    def __eq__(self, other):
        if not isinstance(other, RasterImage):
            return NotImplemented
        return np.array_equal(self.data, other.data)

    def __repr__(self):
        return f"RasterImage({self.width}x{self.height}x{self.channels})"


@dataclass(frozen=True, eq=False)
class Histogram:
    counts: np.ndarray

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        if counts.shape != (NBINS,):
            raise ValueError(f"histogram needs {NBINS} bins, got {counts.shape}")
        if (counts < 0).any():
            raise ValueError("histogram counts must be non-negative")
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)

    @property
    def total(self) -> int:
        return int(self.counts.sum())


@dataclass(frozen=True, eq=False)
class ProbDist:
    """Normalized 256-bin intensity distribution."""

    p: np.ndarray

    def __post_init__(self):
        p = np.array(self.p, dtype=np.float64)
        if p.shape != (NBINS,):
            raise ValueError(f"distribution needs {NBINS} bins, got {p.shape}")
        if (p < 0).any() or not np.isfinite(p).all():
            raise ValueError("probabilities must be finite and non-negative")
        if abs(p.sum() - 1.0) > 1e-9:
            raise ValueError(f"probabilities sum to {p.sum()!r}, not 1")
        p.setflags(write=False)
        object.__setattr__(self, "p", p)


# --------------------------------------------------------------------------
# PNM reading / writing


def _pnm_header(buf: bytes):
    """Parse magic, width, height, maxval; return them and the body offset."""
    tokens = []
    pos = 0
    n = len(buf)
    while len(tokens) < 4:
        while pos < n and buf[pos : pos + 1].isspace():
            pos += 1
        if pos < n and buf[pos : pos + 1] == b"#":
            while pos < n and buf[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < n and not buf[pos : pos + 1].isspace() and buf[pos : pos + 1] != b"#":
            pos += 1
        if start == pos:
            raise ImageFormatError("truncated PNM header")
        tokens.append(buf[start:pos])
    # exactly one whitespace byte separates the header from a binary body
    if pos >= n and tokens[0] in (b"P5", b"P6"):
        raise ImageFormatError("missing PNM body")
    pos += 1
    magic = tokens[0].decode("ascii", "replace")
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError as exc:
        raise ImageFormatError(f"bad PNM header: {exc}") from None
    if width <= 0 or height <= 0:
        raise ImageFormatError("PNM dimensions must be positive")
    if not 0 < maxval < 65536:
        raise ImageFormatError(f"bad maxval {maxval}")
    if maxval > 255:
        raise ImageFormatError("only 8-bit images are supported (maxval > 255)")
    return magic, width, height, maxval, pos


def _read_pnm(buf: bytes) -> RasterImage:
    if buf[:2] not in (b"P2", b"P3", b"P5", b"P6"):
        raise ImageFormatError("not a PGM/PPM file")
    magic, width, height, maxval, offset = _pnm_header(buf)
    channels = 3 if magic in ("P3", "P6") else 1
    count = width * height * channels
    if magic in ("P5", "P6"):
        body = np.frombuffer(buf, dtype=np.uint8, count=-1, offset=offset)
        if body.size < count:
            raise ImageFormatError(f"PNM body has {body.size} bytes, expected {count}")
        samples = body[:count]
    else:
        try:
            samples = np.array(buf[offset:].split()[:count], dtype=np.int64)
        except ValueError:
            raise ImageFormatError("non-numeric sample in ASCII PNM") from None
        if samples.size < count:
            raise ImageFormatError("ASCII PNM body is truncated")
    if samples.max(initial=0) > maxval:
        raise ImageFormatError("sample exceeds maxval")
    return RasterImage.from_samples(width, height, channels, samples.astype(np.uint8))


def _read_with_pillow(path: Path) -> RasterImage:
    try:
        from PIL import Image
    except ImportError:
        raise ImageFormatError(
            f"{path.suffix or path.name}: only PGM/PPM are supported without Pillow"
        ) from None
    try:
        with Image.open(path) as im:
            mode = im.mode
            if mode in ("I;16", "I;16B", "I;16L", "I", "F") or mode.startswith("I;"):
                raise ImageFormatError(f"only 8-bit images are supported (mode {mode})")
            if mode in ("1", "L", "LA"):
                im = im.convert("L")
            else:
                im = im.convert("RGB")
            arr = np.asarray(im, dtype=np.uint8)
    except ImageFormatError:
        raise
    except OSError as exc:
        raise ImageFormatError(f"cannot decode {path}: {exc}") from None
    return RasterImage(arr)


def load_image(path) -> RasterImage:
    path = Path(path)
    buf = path.read_bytes()
    if buf[:1] == b"P" and buf[1:2] in b"123456":
        if buf[1:2] in b"14":
            raise ImageFormatError("bitmap PBM files are not supported")
        return _read_pnm(buf)
    return _read_with_pillow(path)


def save_image(image: RasterImage, path) -> None:
    """Write ``image``; ``.pgm/.ppm/.pnm`` natively, anything else via Pillow."""
    path = Path(path)
    if path.suffix.lower() in (".pgm", ".ppm", ".pnm", ""):
        magic = b"P5" if image.channels == 1 else b"P6"
        header = b"%s\n%d %d\n255\n" % (magic, image.width, image.height)
        with open(path, "wb") as fh:
            fh.write(header)
            fh.write(image.samples.tobytes())
        return
    try:
        from PIL import Image
    except ImportError:
        raise ImageFormatError("writing non-PNM formats requires Pillow") from None
    arr = image.data[:, :, 0] if image.channels == 1 else image.data
    Image.fromarray(arr).save(path)


# --------------------------------------------------------------------------
# channels and histograms


def split_channels(image: RasterImage) -> list[RasterImage]:
    if image.channels == 1:
        return [image]
    return [RasterImage(image.data[:, :, c]) for c in range(image.channels)]


def merge_channels(channels) -> RasterImage:
    channels = list(channels)
    if len(channels) == 1:
        return channels[0]
    return RasterImage(np.stack([ch.data[:, :, 0] for ch in channels], axis=2))


def build_histogram(channel: RasterImage) -> Histogram:
    if channel.channels != 1:
        raise ValueError("build_histogram expects a single-component channel")
    return Histogram(np.bincount(channel.samples, minlength=NBINS))


def normalize(hist: Histogram) -> ProbDist:
    total = hist.total
    if total <= 0:
        raise ValueError("cannot normalize an empty histogram")
    return ProbDist(hist.counts / total)


def load_histogram_file(path) -> Histogram | ProbDist:
    """Read a JSON array of 256 numbers (counts, or probabilities summing to 1).

    A JSON object with a ``"counts"`` or ``"p"`` key is also accepted.
    """
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError:
        try:
            doc = [float(tok) for tok in text.split()]
        except ValueError:
            raise ImageFormatError(f"{path}: not a histogram document") from None
    if isinstance(doc, dict):
        doc = doc.get("counts", doc.get("p"))
    if not isinstance(doc, list) or len(doc) != NBINS:
        raise ImageFormatError(f"{path}: expected an array of {NBINS} numbers")
    arr = np.array(doc, dtype=np.float64)
    if not np.isfinite(arr).all() or (arr < 0).any():
        raise ImageFormatError(f"{path}: histogram values must be finite and >= 0")
    total = arr.sum()
    if total <= 0:
        raise ImageFormatError(f"{path}: histogram is empty")
    if abs(total - 1.0) <= 1e-6:
        return ProbDist(arr / total)
    if not np.array_equal(arr, np.round(arr)):
        raise ImageFormatError(f"{path}: counts must be integers")
    return Histogram(arr.astype(np.int64))


def save_histogram_file(hist: Histogram | ProbDist, path) -> None:
    values = hist.counts.tolist() if isinstance(hist, Histogram) else hist.p.tolist()
    Path(path).write_text(json.dumps(values) + "\n")


# --------------------------------------------------------------------------
# noise models


def _round_half_up(x):
    return np.floor(x + 0.5)


def add_gaussian_noise(image: RasterImage, mean=0.0, variance=0.1, seed=0) -> RasterImage:
    """Additive Gaussian noise on the unit intensity scale, then re-quantized."""
    if variance < 0:
        raise ValueError("variance must be non-negative")
    rng = np.random.default_rng(seed)
    g = rng.normal(mean, math.sqrt(variance), size=image.data.shape)
    noisy = _round_half_up(255.0 * (image.data / 255.0 + g))
    return RasterImage(np.clip(noisy, 0, 255).astype(np.uint8))


def add_salt_pepper(image: RasterImage, fraction=0.02, seed=0) -> RasterImage:
    """Set exactly ``round(fraction * NP)`` distinct pixels per channel to 0 or 255."""
    if not 0.0 <= fraction <= 1.0:
        raise ValueError("fraction must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    npix = image.pixel_count
    n_bad = int(_round_half_up(fraction * npix))
    out = image.data.copy()
    flat = out.reshape(npix, image.channels)
    for c in range(image.channels):
        where = rng.choice(npix, size=n_bad, replace=False)
        flat[where, c] = np.where(rng.random(n_bad) < 0.5, 0, 255)
    return RasterImage(out)
