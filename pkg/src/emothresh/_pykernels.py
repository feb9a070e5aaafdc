"""Pure numpy implementation of the hot kernels.

Mirrors ``_ckernels.pyx`` function for function. Both consume the same
pre-drawn random arrays, so a given seed produces the same search on either
backend up to last-ulp differences in ``log``.

Prefix tables (length 257) are ``W[j] = sum(p[:j])``, ``M[j] = sum(b * p[b]
for b < j)`` and ``S[j] = sum(p[b] * ln p[b] for b < j)``; ``kind`` is 0 for
Otsu and 1 for Kapur.
"""
import numpy as np

OTSU = 0
KAPUR = 1
NBINS = 256


def repair(X):
    """Map real positions (n, k) onto strictly increasing integer thresholds."""
    X = np.asarray(X, dtype=np.float64)
    T = np.floor(X + 0.5).astype(np.int64)
    np.clip(T, 1, NBINS - 1, out=T)
    T.sort(axis=1)
    k = T.shape[1]
    for i in range(1, k):
        np.maximum(T[:, i], T[:, i - 1] + 1, out=T[:, i])
    np.minimum(T[:, k - 1], NBINS - 1, out=T[:, k - 1])
    for i in range(k - 2, -1, -1):
        np.minimum(T[:, i], T[:, i + 1] - 1, out=T[:, i])
    return T


def evaluate_thresholds(kind, W, M, S, T):
    T = np.asarray(T, dtype=np.int64)
    n, k = T.shape
    acc = np.zeros(n)
    mu_t = M[NBINS]
    lo = np.zeros(n, dtype=np.int64)
    for i in range(k + 1):
        hi = T[:, i] if i < k else np.full(n, NBINS, dtype=np.int64)
        w = W[hi] - W[lo]
        nz = w > 0.0
        safe_w = np.where(nz, w, 1.0)
        if kind == OTSU:
            d = (M[hi] - M[lo]) / safe_w - mu_t
            term = w * (d * d)
        else:
            # a class entropy is never negative; clamp prefix-difference roundoff
            term = np.maximum(np.log(safe_w) - (S[hi] - S[lo]) / safe_w, 0.0)
        acc += np.where(nz, term, 0.0)
        lo = hi
    return acc


def evaluate_positions(kind, W, M, S, X):
    return evaluate_thresholds(kind, W, M, S, repair(X))


def forces(X, f, q):
    X = np.asarray(X, dtype=np.float64)
    diff = X[None, :, :] - X[:, None, :]  # diff[i, j] = x_j - x_i
    dist2 = np.einsum("ijd,ijd->ij", diff, diff)
    valid = dist2 >= 1e-24
    np.fill_diagonal(valid, False)
    sign = np.where(f[None, :] > f[:, None], 1.0, -1.0)
    weight = np.zeros_like(dist2)
    weight[valid] = (np.outer(q, q)[valid] / dist2[valid]) * sign[valid]
    return np.einsum("ij,ijd->id", weight, diff)


def local_search(kind, W, M, S, Y, fy, lam, up, step, lower, upper):
    return local_search_callable(
        lambda X: evaluate_positions(kind, W, M, S, X), Y, fy, lam, up, step, lower, upper
    )


def local_search_callable(fitness, Y, fy, lam, up, step, lower, upper):
    """First-improvement coordinate search, vectorized across particles.

    ``lam`` and ``up`` have shape (n, k, iter_local). For each dimension a
    particle tries up to ``iter_local`` perturbations of that coordinate and
    keeps the first strict improvement. Returns ``(Z, fz, evaluations)``.
    """
    Z = np.array(Y, dtype=np.float64, copy=True)
    fz = np.array(fy, dtype=np.float64, copy=True)
    n, k, iters = lam.shape
    evals = 0
    for d in range(k):
        active = np.ones(n, dtype=bool)
        for t in range(iters):
            idx = np.flatnonzero(active)
            if idx.size == 0:
                break
            cand = Z[idx]
            shift = lam[idx, d, t] * step[d]
            col = np.where(up[idx, d, t], cand[:, d] + shift, cand[:, d] - shift)
            cand[:, d] = np.minimum(np.maximum(col, lower[d]), upper[d])
            fc = np.asarray(fitness(cand), dtype=np.float64)
            evals += idx.size
            better = fc > fz[idx]
            hit = idx[better]
            Z[hit] = cand[better]
            fz[hit] = fc[better]
            active[hit] = False
    return Z, fz, evals


def _lex_combinations(first, k):
    """All increasing (k)-vectors in [1, 255] starting with ``first``, lex order."""
    if k == 1:
        return np.array([[first]], dtype=np.int64)
    rest = np.arange(first + 1, NBINS, dtype=np.int64)
    if k == 2:
        return np.column_stack([np.full(rest.size, first), rest])
    a, b = np.triu_indices(rest.size, 1)
    return np.column_stack([np.full(a.size, first), rest[a], rest[b]])


def exhaustive(kind, W, M, S, k):
    if not 1 <= k <= 3:
        raise ValueError("exhaustive search supports 1 <= k <= 3")
    best_f = -np.inf
    best_th = None
    n_opt = 0
    evals = 0
    if k == 1:
        chunks = [np.arange(1, NBINS, dtype=np.int64)[:, None]]
    else:
        chunks = (_lex_combinations(t1, k) for t1 in range(1, NBINS - k + 1))
    for T in chunks:
        f = evaluate_thresholds(kind, W, M, S, T)
        evals += f.size
        m = f.max()
        if m > best_f:
            best_f = m
            best_th = T[int(np.argmax(f))].copy()
            n_opt = int(np.count_nonzero(f == m))
        elif m == best_f:
            n_opt += int(np.count_nonzero(f == m))
    return best_th, float(best_f), n_opt, evals
