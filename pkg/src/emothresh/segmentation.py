"""Apply thresholds to channels, render class-mean images, RMSE and PSNR."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .image_io import (
    NBINS,
    Histogram,
    ProbDist,
    RasterImage,
    build_histogram,
    merge_channels,
    normalize,
    split_channels,
)
from .objectives import as_thresholds, class_bounds, class_decomposition

INFINITE_PSNR = math.inf


@dataclass(frozen=True, eq=False)
class LabelMap:
    labels: np.ndarray  # (height, width) class indices
    k: int

    @property
    def height(self):
        return self.labels.shape[0]

    @property
    def width(self):
        return self.labels.shape[1]

    def class_sizes(self):
        return np.bincount(self.labels.ravel(), minlength=self.k + 1)


def classify(channel: RasterImage, th) -> LabelMap:
    """Class index = number of thresholds at or below the pixel value."""
    th = as_thresholds(th)
    if channel.channels != 1:
        raise ValueError("classify expects a single-component channel")
    values = channel.data[:, :, 0]
    labels = np.searchsorted(np.asarray(th), values, side="right").astype(np.int16)
    return LabelMap(labels, len(th))


def class_levels(dist: ProbDist, th) -> np.ndarray:
    """Rendered intensity per class: rounded class mean, or the lower bin if empty."""
    deco = class_decomposition(dist, th)
    levels = np.empty(len(deco.weights), dtype=np.int64)
    for i, (lo, _) in enumerate(class_bounds(as_thresholds(th))):
        levels[i] = math.floor(deco.means[i] + 0.5) if deco.weights[i] > 0 else lo
    return levels


def level_lut(dist: ProbDist, th) -> np.ndarray:
    """256-entry lookup table mapping every intensity to its rendered level."""
    th = as_thresholds(th)
    cls = np.searchsorted(np.asarray(th), np.arange(NBINS), side="right")
    return class_levels(dist, th)[cls]


def reconstruct(labels: LabelMap, channel: RasterImage, th, dist: ProbDist | None = None) -> RasterImage:
    if dist is None:
        dist = normalize(build_histogram(channel))
    levels = class_levels(dist, th)
    return RasterImage(levels[labels.labels].astype(np.uint8))


def segment_channel(channel: RasterImage, th, dist: ProbDist | None = None) -> RasterImage:
    return reconstruct(classify(channel, th), channel, th, dist)


def segment_image(image: RasterImage, thresholds_per_channel) -> RasterImage:
    """Segment each channel with its own threshold vector and re-interleave."""
    channels = split_channels(image)
    if len(thresholds_per_channel) != len(channels):
        raise ValueError("need one threshold vector per channel")
    return merge_channels(
        segment_channel(ch, th) for ch, th in zip(channels, thresholds_per_channel)
    )


def _check_shapes(a: RasterImage, b: RasterImage):
    if a.data.shape != b.data.shape:
        raise ValueError(f"shape mismatch: {a.data.shape} vs {b.data.shape}")


def rmse(original: RasterImage, segmented: RasterImage) -> float:
    """Root mean squared error pooled over every sample of every channel."""
    _check_shapes(original, segmented)
    diff = original.data.astype(np.int64) - segmented.data.astype(np.int64)
    return math.sqrt(int((diff * diff).sum()) / diff.size)


def psnr_from_rmse(value: float) -> float:
    if value == 0:
        return INFINITE_PSNR
    return 20.0 * math.log10(255.0 / value)


def psnr(original: RasterImage, segmented: RasterImage) -> float:
    """``20 log10(255 / RMSE)`` in dB; ``math.inf`` for identical images."""
    return psnr_from_rmse(rmse(original, segmented))


def squared_error_from_histogram(hist: Histogram | ProbDist, th):
    """``(sum of squared errors, sample count)`` of class-mean rendering.

    Equals the pixel-wise error on any image with this histogram, since the
    rendered value depends only on the pixel intensity. Counts give an exact
    integer sum; a bare distribution gives a sample count of 1.
    """
    if isinstance(hist, Histogram):
        dist = normalize(hist)
        weights = hist.counts
        count = hist.total
    else:
        dist = hist
        weights = hist.p
        count = 1
    err = np.arange(NBINS) - level_lut(dist, th)
    if isinstance(hist, Histogram):
        return int((weights * err * err).sum()), count
    return float((weights * err * err).sum()), count


def histogram_psnr(hist: Histogram | ProbDist, th) -> float:
    sse, n = squared_error_from_histogram(hist, th)
    return psnr_from_rmse(math.sqrt(sse / n))


def pooled_psnr(parts) -> float:
    """PSNR over several channels from ``(sse, count)`` pairs."""
    sse = sum(p[0] for p in parts)
    n = sum(p[1] for p in parts)
    return psnr_from_rmse(math.sqrt(sse / n))
