"""Exhaustive ground truth: evaluate every threshold vector for k <= 3."""
from __future__ import annotations

import math
from dataclasses import dataclass

from .image_io import NBINS, ProbDist
from .objectives import HistogramObjective, ObjectiveKind

MAX_ORACLE_K = 3


@dataclass(frozen=True)
class OracleResult:
    best_thresholds: tuple
    best_fitness: float
    evaluations: int
    optima_count: int


def exhaustive_search(kind, dist: ProbDist, k: int, backend=None) -> OracleResult:
    """Enumerate all C(255, k) increasing threshold vectors.

    Ties resolve to the lexicographically smallest maximizer; ``optima_count``
    counts every vector whose fitness equals the maximum exactly.
    """
    if not 1 <= k <= MAX_ORACLE_K:
        raise ValueError(f"exhaustive search supports 1 <= k <= {MAX_ORACLE_K}, got {k}")
    objective = HistogramObjective(ObjectiveKind.parse(kind), dist, backend=backend)
    th, best, n_opt, evals = objective.exhaustive(k)
    assert evals == math.comb(NBINS - 1, k)
    return OracleResult(
        best_thresholds=tuple(int(t) for t in th),
        best_fitness=float(best),
        evaluations=int(evals),
        optima_count=int(n_opt),
    )
