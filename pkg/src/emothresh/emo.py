"""Electromagnetism-like optimization (EMO) for box-constrained maximization.

Each particle carries a charge derived from its fitness gap to the current
best. Better particles attract, worse ones repel; every particle except the
best moves along its normalized total force, then a coordinate-wise local
search refines it. The loop stops once the best fitness has not changed for
a fixed fraction of the iteration budget.

The fitness function takes an ``(n, k)`` array of positions and returns
``n`` values. A :class:`~emothresh.objectives.HistogramObjective` routes the
local search through the compiled kernels; any other callable uses the numpy
implementation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _pykernels
from ._backend import get_kernels
from .image_io import ProbDist
from .objectives import HistogramObjective, ObjectiveKind, repair

STALL_TOL = 1e-12
_TINY = 1e-12


@dataclass(frozen=True)
class EmoParams:
    iter_max: int = 150
    iter_local: int = 10
    delta: float = 0.025
    pop_size: int = 50
    stall_fraction: float = 0.1
    lower: float = 0.0
    upper: float = 255.0

    def __post_init__(self):
        if self.iter_max < 1:
            raise ValueError("iter_max must be >= 1")
        if self.iter_local < 0:
            raise ValueError("iter_local must be >= 0")
        if self.pop_size < 2:
            raise ValueError("pop_size must be >= 2")
        if not 0.0 < self.delta < 1.0:
            raise ValueError("delta must lie in (0, 1)")
        if not 0.0 < self.stall_fraction <= 1.0:
            raise ValueError("stall_fraction must lie in (0, 1]")
        if not np.all(np.asarray(self.lower) < np.asarray(self.upper)):
            raise ValueError("lower bound must be below upper bound")

    @property
    def stall_window(self) -> int:
        """Consecutive unchanged iterations that end the run."""
        return max(1, math.ceil(self.stall_fraction * self.iter_max - 1e-9))

    def bounds(self, k):
        lo = np.broadcast_to(np.asarray(self.lower, dtype=np.float64), (k,)).copy()
        hi = np.broadcast_to(np.asarray(self.upper, dtype=np.float64), (k,)).copy()
        return lo, hi

    def to_dict(self):
        return {
            "iter_max": self.iter_max,
            "iter_local": self.iter_local,
            "delta": self.delta,
            "pop_size": self.pop_size,
            "stall_fraction": self.stall_fraction,
        }


@dataclass
class Particle:
    position: np.ndarray
    fitness: float


@dataclass
class Population:
    positions: np.ndarray  # (N, k)
    fitness: np.ndarray  # (N,)
    iteration: int = 0

    @property
    def best_index(self) -> int:
        return int(np.argmax(self.fitness))

    @property
    def best(self) -> Particle:
        b = self.best_index
        return Particle(self.positions[b].copy(), float(self.fitness[b]))

    def __len__(self):
        return self.positions.shape[0]


@dataclass
class OptResult:
    best_position: np.ndarray
    best_thresholds: tuple
    best_fitness: float
    iterations_run: int
    stop_reason: str  # "stall" | "iter_max"
    history: list = field(default_factory=list)
    evaluations: int = 0


def _as_rng(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def initialize(params: EmoParams, k: int, seed, objective) -> Population:
    rng = _as_rng(seed)
    lo, hi = params.bounds(k)
    X = lo + (hi - lo) * rng.random((params.pop_size, k))
    return Population(X, np.asarray(objective(X), dtype=np.float64))


def compute_charges(pop, k=None) -> np.ndarray:
    """``q_i = exp(-k (f_i - f_best) / sum_j (f_j - f_best))``.

    ``pop`` may be a :class:`Population` or a fitness array (then ``k`` is
    required). All charges are 1 when every fitness is equal.
    """
    if isinstance(pop, Population):
        f, k = pop.fitness, pop.positions.shape[1]
    else:
        f = np.asarray(pop, dtype=np.float64)
        if k is None:
            raise ValueError("k is required when passing raw fitness values")
    gap = f - f.max()
    denom = gap.sum()
    if abs(denom) < _TINY:
        return np.ones_like(f)
    return np.exp(-k * gap / denom)


def compute_forces(pop: Population, charges, backend=None) -> np.ndarray:
    kern = get_kernels(backend)
    return kern.forces(
        np.ascontiguousarray(pop.positions),
        np.ascontiguousarray(pop.fitness, dtype=np.float64),
        np.ascontiguousarray(charges, dtype=np.float64),
    )


def _move(X, F, best, lam, lo, hi):
    norm = np.linalg.norm(F, axis=1)
    mobile = norm >= _TINY
    mobile[best] = False
    direction = np.zeros_like(F)
    direction[mobile] = F[mobile] / norm[mobile, None]
    room = np.where(F > 0, hi - X, np.where(F < 0, X - lo, 0.0))
    Y = X + lam * direction * room
    np.clip(Y, lo, hi, out=Y)
    Y[best] = X[best]
    return Y


def move_population(pop: Population, forces, rng, objective, params=None) -> Population:
    """Move every particle but the best along its total force."""
    params = params or EmoParams()
    rng = _as_rng(rng)
    k = pop.positions.shape[1]
    lo, hi = params.bounds(k)
    lam = rng.random(pop.positions.shape)
    Y = _move(pop.positions, np.asarray(forces), pop.best_index, lam, lo, hi)
    return Population(Y, np.asarray(objective(Y), dtype=np.float64), pop.iteration)


def _local_search_batch(objective, Y, fy, lam, up, params):
    k = Y.shape[1]
    lo, hi = params.bounds(k)
    step = params.delta * (hi - lo)
    if isinstance(objective, HistogramObjective):
        return objective.local_search(Y, fy, lam, up, step, lo, hi)
    return _pykernels.local_search_callable(objective, Y, fy, lam, up, step, lo, hi)


def _draw_local(rng, n, k, iters):
    lam = rng.random((n, k, iters))
    up = rng.random((n, k, iters)) < 0.5
    return lam, up


def local_search(point: Particle, params: EmoParams, rng, objective) -> Particle:
    """Coordinate-wise first-improvement search around one particle.

    For each dimension in turn, up to ``iter_local`` random steps of at most
    ``delta * (upper - lower)`` are tried; the first strict improvement is
    kept and the search moves on to the next dimension.
    """
    rng = _as_rng(rng)
    Y = np.atleast_2d(np.asarray(point.position, dtype=np.float64))
    k = Y.shape[1]
    if params.iter_local == 0:
        return Particle(Y[0].copy(), float(point.fitness))
    lam, up = _draw_local(rng, 1, k, params.iter_local)
    Z, fz, _ = _local_search_batch(objective, Y, np.array([point.fitness], dtype=float), lam, up, params)
    return Particle(Z[0], float(fz[0]))


def select_next(y: Particle, z: Particle) -> Particle:
    """Keep the fitter of the moved point and its refinement; ties keep ``y``."""
    return z if z.fitness > y.fitness else y


def maximize(objective, k: int, params: EmoParams | None = None, seed=0, backend=None) -> OptResult:
    """Run EMO on an arbitrary batch fitness function over ``[lower, upper]^k``."""
    params = params or EmoParams()
    rng = _as_rng(seed)
    kern = get_kernels(backend)
    lo, hi = params.bounds(k)
    n = params.pop_size

    pop = initialize(params, k, rng, objective)
    X, f = pop.positions, pop.fitness
    evals = n
    history = []
    best_f = float(f.max())
    stall = 0
    stop_reason = "iter_max"

    for t in range(1, params.iter_max + 1):
        # fixed draw layout per iteration keeps every backend on the same stream
        lam_move = rng.random((n, k))
        lam_ls, up_ls = _draw_local(rng, n, k, params.iter_local)

        best = int(np.argmax(f))
        q = compute_charges(f, k)
        F = kern.forces(X, f, q)
        Y = _move(X, F, best, lam_move, lo, hi)
        fy = np.asarray(objective(Y), dtype=np.float64)
        evals += n
        if params.iter_local:
            Z, fz, ls_evals = _local_search_batch(objective, Y, fy, lam_ls, up_ls, params)
            evals += ls_evals
            take = fz > fy
            X = np.where(take[:, None], Z, Y)
            f = np.where(take, fz, fy)
        else:
            X, f = Y, fy

        current = float(f.max())
        history.append(current)
        if abs(current - best_f) <= STALL_TOL:
            stall += 1
        else:
            stall = 0
        best_f = max(best_f, current)
        if stall >= params.stall_window:
            stop_reason = "stall"
            break

    b = int(np.argmax(f))
    best_position = X[b].copy()
    return OptResult(
        best_position=best_position,
        best_thresholds=repair(best_position) if _is_histogram(objective) else tuple(),
        best_fitness=float(f[b]),
        iterations_run=len(history),
        stop_reason=stop_reason,
        history=history,
        evaluations=evals,
    )


def _is_histogram(objective):
    return isinstance(objective, HistogramObjective)


def optimize(kind, dist: ProbDist, k: int, params: EmoParams | None = None, seed=0,
             backend=None) -> OptResult:
    """Search for ``k`` thresholds maximizing the Otsu or Kapur objective."""
    objective = HistogramObjective(ObjectiveKind.parse(kind), dist, backend=backend)
    objective(np.zeros((1, k)))  # validates k before any work
    return maximize(objective, k, params, seed, backend=backend)


__all__ = [
    "EmoParams",
    "OptResult",
    "Particle",
    "Population",
    "compute_charges",
    "compute_forces",
    "initialize",
    "local_search",
    "maximize",
    "move_population",
    "optimize",
    "select_next",
]
