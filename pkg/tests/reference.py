"""Slow, independent implementations used as test oracles.

Everything here sums over bins directly; nothing shares code with the
prefix-table kernels under test.
"""
import itertools
import math

import numpy as np


def classes(th):
    edges = [0, *th, 256]
    return [range(edges[i], edges[i + 1]) for i in range(len(edges) - 1)]


def decomposition(p, th):
    weights, means = [], []
    for cls in classes(th):
        w = math.fsum(p[b] for b in cls)
        m = math.fsum(b * p[b] for b in cls) / w if w > 0 else 0.0
        weights.append(w)
        means.append(m)
    total = math.fsum(b * p[b] for b in range(256))
    return weights, means, total


def otsu(p, th):
    w, m, mu = decomposition(p, th)
    return math.fsum(wi * (mi - mu) ** 2 for wi, mi in zip(w, m) if wi > 0)


def kapur(p, th):
    total = 0.0
    for cls in classes(th):
        w = math.fsum(p[b] for b in cls)
        if w <= 0:
            continue
        total -= math.fsum((p[b] / w) * math.log(p[b] / w) for b in cls if p[b] > 0)
    return total


OBJECTIVES = {"otsu": otsu, "kapur": kapur}


def brute_force(kind, p, k):
    """Lexicographically first maximizer over all increasing integer vectors."""
    fn = OBJECTIVES[kind]
    best, best_th = -math.inf, None
    for th in itertools.combinations(range(1, 256), k):
        v = fn(p, th)
        if v > best:
            best, best_th = v, th
    return best_th, best


def rank_sum_by_enumeration(a, b):
    """Two-sided exact p-value by listing every assignment of ranks to ``a``."""
    pooled = sorted(a + b)
    rank = {v: i + 1 for i, v in enumerate(pooled)}
    w = sum(rank[v] for v in a)
    n = len(pooled)
    sums = [sum(c) for c in itertools.combinations(range(1, n + 1), len(a))]
    lo = sum(s <= w for s in sums) / len(sums)
    hi = sum(s >= w for s in sums) / len(sums)
    return min(1.0, 2 * min(lo, hi))


def psnr(a, b):
    d = np.asarray(a, dtype=np.int64) - np.asarray(b, dtype=np.int64)
    mse = float((d * d).mean())
    return math.inf if mse == 0 else 10 * math.log10(255.0**2 / mse)
