"""Otsu between-class variance and Kapur entropy for k thresholds.

Class ``i`` of a threshold vector ``th`` covers the bins
``[th[i-1], th[i] - 1]`` (with ``th[-1] = 0`` and ``th[k] = 256``), so a
pixel equal to a threshold belongs to the class above it. Empty classes
contribute nothing to either objective.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from ._backend import get_kernels
from .image_io import NBINS, ProbDist

MAX_K = NBINS - 2


class ObjectiveKind(str, enum.Enum):
    OTSU = "otsu"
    KAPUR = "kapur"

    @property
    def code(self) -> int:
        return 0 if self is ObjectiveKind.OTSU else 1

    @classmethod
    def parse(cls, value) -> "ObjectiveKind":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown objective {value!r}; use 'otsu' or 'kapur'") from None


def as_thresholds(th) -> tuple[int, ...]:
    """Validate a threshold vector: strictly increasing integers in [1, 255]."""
    out = tuple(int(t) for t in th)
    if not out:
        raise ValueError("need at least one threshold")
    if any(t != float(v) for t, v in zip(out, th)):
        raise ValueError(f"thresholds must be integers: {th!r}")
    if out[0] < 1 or out[-1] > NBINS - 1:
        raise ValueError(f"thresholds must lie in [1, {NBINS - 1}]: {out}")
    if any(b <= a for a, b in zip(out, out[1:])):
        raise ValueError(f"thresholds must be strictly increasing: {out}")
    return out


def class_bounds(th) -> list[tuple[int, int]]:
    """Inclusive ``(first_bin, last_bin)`` for each of the k+1 classes."""
    edges = (0, *th, NBINS)
    return [(edges[i], edges[i + 1] - 1) for i in range(len(edges) - 1)]


@dataclass(frozen=True)
class ClassDecomposition:
    weights: np.ndarray
    means: np.ndarray
    total_mean: float


def class_decomposition(dist: ProbDist, th) -> ClassDecomposition:
    th = as_thresholds(th)
    bins = np.arange(NBINS, dtype=np.float64)
    weights, means = [], []
    for lo, hi in class_bounds(th):
        seg = dist.p[lo : hi + 1]
        w = float(seg.sum())
        weights.append(w)
        means.append(float((bins[lo : hi + 1] * seg).sum()) / w if w > 0 else 0.0)
    return ClassDecomposition(
        weights=np.array(weights),
        means=np.array(means),
        total_mean=float((bins * dist.p).sum()),
    )


@dataclass(frozen=True, eq=False)
class ObjectiveTables:
    """Prefix sums over a distribution; every class statistic is O(1) from them."""

    weight: np.ndarray  # W[j] = sum p[:j]
    moment: np.ndarray  # M[j] = sum b * p[b], b < j
    plogp: np.ndarray  # S[j] = sum p[b] ln p[b], b < j

    @classmethod
    def from_dist(cls, dist: ProbDist) -> "ObjectiveTables":
        p = dist.p
        plogp = np.zeros(NBINS)
        nz = p > 0
        plogp[nz] = p[nz] * np.log(p[nz])

        def prefix(v):
            out = np.zeros(NBINS + 1)
            np.cumsum(v, out=out[1:])
            return out

        return cls(prefix(p), prefix(np.arange(NBINS) * p), prefix(plogp))


class HistogramObjective:
    """Batch fitness function over real positions for one distribution.

    Calling it with an ``(n, k)`` array repairs each row to a threshold
    vector and returns the ``n`` fitness values.
    """

    def __init__(self, kind, dist: ProbDist, backend=None):
        self.kind = ObjectiveKind.parse(kind)
        self.dist = dist
        self.tables = ObjectiveTables.from_dist(dist)
        self.kernels = get_kernels(backend)

    def _args(self):
        t = self.tables
        return self.kind.code, t.weight, t.moment, t.plogp

    def __call__(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        _check_k(X.shape[1])
        return self.kernels.evaluate_positions(*self._args(), X)

    def thresholds_fitness(self, T):
        T = np.atleast_2d(np.asarray(T, dtype=np.int64))
        return self.kernels.evaluate_thresholds(*self._args(), T)

    def local_search(self, Y, fy, lam, up, step, lower, upper):
        return self.kernels.local_search(*self._args(), Y, fy, lam, up, step, lower, upper)

    def exhaustive(self, k):
        return self.kernels.exhaustive(*self._args(), k)


def _check_k(k):
    if k < 1:
        raise ValueError("need at least one threshold")
    if k > MAX_K:
        raise ValueError(f"k={k} exceeds {MAX_K}: no room for distinct thresholds")


def repair(position) -> tuple[int, ...]:
    """Round, clamp to [1, 255], sort and de-duplicate a real position."""
    X = np.atleast_2d(np.asarray(position, dtype=np.float64))
    _check_k(X.shape[1])
    return tuple(int(t) for t in get_kernels().repair(X)[0])


def _objective(kind, dist, th):
    th = as_thresholds(th)
    return float(HistogramObjective(kind, dist).thresholds_fitness([th])[0])


def otsu_objective(dist: ProbDist, th) -> float:
    """Between-class variance, sum of w_i (mu_i - mu_T)^2 on the 0..255 scale."""
    return _objective(ObjectiveKind.OTSU, dist, th)


def kapur_objective(dist: ProbDist, th) -> float:
    """Sum of the Shannon entropies (nats) of the within-class distributions."""
    return _objective(ObjectiveKind.KAPUR, dist, th)


def evaluate(kind, dist: ProbDist, position) -> float:
    """Fitness of a real-valued position after integer repair."""
    return float(HistogramObjective(kind, dist)(np.atleast_2d(position))[0])
