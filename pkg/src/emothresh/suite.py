"""Fixed synthetic histogram suite used by the acceptance tests.

Eight discretized Gaussian mixtures plus two impulse histograms, each with
512 x 512 = 262144 pixels. The committed counts live in
``data/suite.json``; :func:`generate_suite` rebuilds them from the
definitions below and the tests check the two agree.
"""
from __future__ import annotations

import json
from importlib import resources

import numpy as np

from .image_io import NBINS, Histogram

SUITE_PIXELS = 512 * 512

# (weight, mean, std) per bump
MIXTURES = {
    "bimodal_balanced": [(0.5, 70, 18), (0.5, 180, 22)],
    "bimodal_skewed": [(0.8, 90, 25), (0.2, 200, 10)],
    "bimodal_wide_narrow": [(0.3, 70, 30), (0.7, 190, 10)],
    "trimodal": [(0.4, 60, 15), (0.35, 130, 20), (0.25, 200, 12)],
    "trimodal_overlap": [(0.3, 80, 25), (0.4, 128, 20), (0.3, 175, 25)],
    "trimodal_dark": [(0.6, 40, 12), (0.3, 110, 30), (0.1, 230, 6)],
    "quadmodal": [(0.25, 40, 10), (0.25, 100, 15), (0.25, 160, 12), (0.25, 220, 8)],
    "quadmodal_uneven": [(0.1, 30, 8), (0.45, 90, 20), (0.3, 150, 18), (0.15, 210, 15)],
}
IMPULSES = {
    "two_impulse": {50: 0.5, 200: 0.5},
    "three_impulse": {40: 1 / 3, 120: 1 / 3, 220: 1 / 3},
}


def _largest_remainder(weights, total):
    """Integer counts proportional to ``weights`` summing exactly to ``total``."""
    w = np.asarray(weights, dtype=np.float64)
    exact = w / w.sum() * total
    counts = np.floor(exact).astype(np.int64)
    short = total - int(counts.sum())
    # stable ordering so ties resolve to the lowest bin
    order = np.argsort(-(exact - counts), kind="stable")
    counts[order[:short]] += 1
    return counts


def mixture_counts(bumps, total=SUITE_PIXELS):
    bins = np.arange(NBINS, dtype=np.float64)
    density = np.zeros(NBINS)
    for weight, mean, std in bumps:
        g = np.exp(-0.5 * ((bins - mean) / std) ** 2)
        density += weight * g / g.sum()
    return _largest_remainder(density, total)


def impulse_counts(impulses, total=SUITE_PIXELS):
    density = np.zeros(NBINS)
    for b, w in impulses.items():
        density[b] = w
    return _largest_remainder(density, total)


def generate_suite() -> dict[str, Histogram]:
    out = {name: Histogram(mixture_counts(b)) for name, b in MIXTURES.items()}
    out.update({name: Histogram(impulse_counts(i)) for name, i in IMPULSES.items()})
    return out


def load_suite() -> dict[str, Histogram]:
    """The committed suite, in definition order."""
    doc = json.loads(resources.files("emothresh").joinpath("data/suite.json").read_text())
    return {name: Histogram(np.array(c, dtype=np.int64)) for name, c in doc.items()}


def write_suite(path) -> None:
    doc = {name: h.counts.tolist() for name, h in generate_suite().items()}
    with open(path, "w") as fh:
        json.dump(doc, fh)
        fh.write("\n")
