"""Run statistics and the two-sided Wilcoxon rank-sum test."""
from __future__ import annotations

import math
import statistics
from dataclasses import dataclass

import numpy as np

EXACT_MAX_SIZE = 10


def _values(sample):
    vals = [float(v) for v in sample]
    if not vals:
        raise ValueError("sample is empty")
    return vals


def mean(sample) -> float:
    return statistics.fmean(_values(sample))


def run_std(sample) -> float:
    """Population standard deviation across runs (divides by the run count)."""
    return statistics.pstdev(_values(sample))


def median(sample) -> float:
    return float(statistics.median(_values(sample)))


def _rank(values):
    """Mid-ranks (1-based) and the tie-group sizes."""
    arr = np.asarray(values, dtype=np.float64)
    order = np.argsort(arr, kind="stable")
    ranks = np.empty(arr.size)
    ties = []
    i = 0
    s = arr[order]
    while i < arr.size:
        j = i
        while j + 1 < arr.size and s[j + 1] == s[i]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        if j > i:
            ties.append(j - i + 1)
        i = j + 1
    return ranks, ties


def rank_sum_distribution(n1: int, n2: int) -> np.ndarray:
    """Counts of each possible rank sum of ``n1`` items drawn from ranks 1..n1+n2.

    Index ``s`` of the result holds the number of size-``n1`` subsets whose
    rank sum is ``s``.
    """
    n = n1 + n2
    top = n1 * (2 * n - n1 + 1) // 2
    # ways[j, s]: subsets of size j with sum s, built one rank at a time
    ways = np.zeros((n1 + 1, top + 1))
    ways[0, 0] = 1.0
    for r in range(1, n + 1):
        upto = min(r, n1)
        for j in range(upto, 0, -1):
            ways[j, r:] += ways[j - 1, : top + 1 - r]
    return ways[n1]


def _exact_p(w: float, n1: int, n2: int) -> float:
    dist = rank_sum_distribution(n1, n2)
    total = dist.sum()
    s = int(round(w))
    lower = dist[: s + 1].sum() / total
    upper = dist[s:].sum() / total
    return min(1.0, 2.0 * min(lower, upper))


def _normal_p(w: float, n1: int, n2: int, ties) -> float:
    n = n1 + n2
    u = w - n1 * (n1 + 1) / 2.0
    mu = n1 * n2 / 2.0
    tie_term = sum(t**3 - t for t in ties) / (n * (n - 1)) if n > 1 else 0.0
    var = n1 * n2 / 12.0 * ((n + 1) - tie_term)
    if var <= 0:
        return 1.0
    z = max(0.0, abs(u - mu) - 0.5) / math.sqrt(var)
    return min(1.0, math.erfc(z / math.sqrt(2.0)))


@dataclass(frozen=True)
class RankSumResult:
    statistic: float  # rank sum of the first sample
    p_value: float
    method: str  # "exact" | "normal"


def rank_sum_test(a, b, method: str = "auto") -> RankSumResult:
    a, b = _values(a), _values(b)
    n1, n2 = len(a), len(b)
    ranks, ties = _rank(a + b)
    w = float(ranks[:n1].sum())
    if method == "auto":
        method = "exact" if min(n1, n2) <= EXACT_MAX_SIZE and not ties else "normal"
    if method == "exact":
        if ties:
            raise ValueError("exact rank-sum distribution requires tie-free samples")
        p = _exact_p(w, n1, n2)
    elif method == "normal":
        p = _normal_p(w, n1, n2, ties)
    else:
        raise ValueError(f"unknown method {method!r}")
    return RankSumResult(w, p, method)


def wilcoxon_rank_sum(a, b, method: str = "auto") -> float:
    """Two-sided rank-sum (Mann-Whitney) p-value for independent samples.

    Exact when both samples are tie-free and the smaller has at most 10
    values; otherwise the normal approximation with tie and continuity
    corrections.
    """
    return rank_sum_test(a, b, method).p_value


def aggregate_runs(runs) -> dict:
    """Summary of homogeneous per-run records (dicts as stored in reports).

    Each record needs ``seed``, ``thresholds``, ``fitness`` and ``psnr``
    (``math.inf`` allowed); ``iterations`` may be ``None``. Records carrying
    a ``config`` key must all agree on it.
    """
    runs = list(runs)
    if not runs:
        raise ValueError("need at least one run")
    configs = {repr(r.get("config")) for r in runs}
    if len(configs) > 1:
        raise ValueError("cannot aggregate runs from different configurations")

    fitness = [r["fitness"] for r in runs]
    psnrs = [r["psnr"] for r in runs]
    iters = [r["iterations"] for r in runs if r.get("iterations") is not None]
    infinite = any(math.isinf(p) for p in psnrs)
    best = max(runs, key=lambda r: (r["fitness"], -(r["seed"] if r["seed"] is not None else 0)))

    return {
        "runs": len(runs),
        "fitness_mean": mean(fitness),
        "fitness_std": run_std(fitness),
        "psnr_mean": math.inf if infinite else mean(psnrs),
        "psnr_std": None if infinite else run_std(psnrs),
        "psnr_infinite_runs": sum(math.isinf(p) for p in psnrs),
        "iterations_mean": mean(iters) if iters else None,
        "iterations_median": median(iters) if iters else None,
        "best_seed": best["seed"],
        "best_thresholds": list(best["thresholds"]),
        "best_fitness": best["fitness"],
        "best_psnr": best["psnr"],
    }
