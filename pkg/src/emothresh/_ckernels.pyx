# cython: language_level=3
"""Compiled hot kernels. Same signatures and semantics as ``_pykernels``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport log, floor

cnp.import_array()

cdef enum:
    NBINS = 256
    MAXK = 256


cdef inline double _fitness(int kind, const double[::1] W, const double[::1] M,
                            const double[::1] S, const long* th, int k) noexcept nogil:
    cdef double acc = 0.0
    cdef double mu_t = M[NBINS]
    cdef double w, d, h
    cdef long lo = 0, hi
    cdef int i
    for i in range(k + 1):
        hi = th[i] if i < k else NBINS
        w = W[hi] - W[lo]
        if w > 0.0:
            if kind == 0:
                d = (M[hi] - M[lo]) / w - mu_t
                acc += w * (d * d)
            else:
                h = log(w) - (S[hi] - S[lo]) / w
                if h > 0.0:
                    acc += h
        lo = hi
    return acc


cdef inline void _repair(const double* x, long* t, int k) noexcept nogil:
    cdef int i, j
    cdef long v
    for i in range(k):
        v = <long>floor(x[i] + 0.5)
        if v < 1:
            v = 1
        elif v > NBINS - 1:
            v = NBINS - 1
        # insertion sort; k is small
        j = i
        while j > 0 and t[j - 1] > v:
            t[j] = t[j - 1]
            j -= 1
        t[j] = v
    for i in range(1, k):
        if t[i] < t[i - 1] + 1:
            t[i] = t[i - 1] + 1
    if t[k - 1] > NBINS - 1:
        t[k - 1] = NBINS - 1
    for i in range(k - 2, -1, -1):
        if t[i] > t[i + 1] - 1:
            t[i] = t[i + 1] - 1


def repair(X):
    cdef double[:, ::1] x = np.ascontiguousarray(X, dtype=np.float64)
    cdef Py_ssize_t n = x.shape[0], r
    cdef int k = <int>x.shape[1]
    out = np.empty((n, k), dtype=np.int64)
    cdef long[:, ::1] t = out
    with nogil:
        for r in range(n):
            _repair(&x[r, 0], &t[r, 0], k)
    return out


def evaluate_thresholds(int kind, const double[::1] W, const double[::1] M,
                        const double[::1] S, T):
    cdef long[:, ::1] t = np.ascontiguousarray(T, dtype=np.int64)
    cdef Py_ssize_t n = t.shape[0], r
    cdef int k = <int>t.shape[1]
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] f = out
    with nogil:
        for r in range(n):
            f[r] = _fitness(kind, W, M, S, &t[r, 0], k)
    return out


def evaluate_positions(int kind, const double[::1] W, const double[::1] M,
                       const double[::1] S, X):
    cdef double[:, ::1] x = np.ascontiguousarray(X, dtype=np.float64)
    cdef Py_ssize_t n = x.shape[0], r
    cdef int k = <int>x.shape[1]
    cdef long th[MAXK]
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] f = out
    with nogil:
        for r in range(n):
            _repair(&x[r, 0], th, k)
            f[r] = _fitness(kind, W, M, S, th, k)
    return out


def forces(X, const double[::1] f, const double[::1] q):
    cdef double[:, ::1] x = np.ascontiguousarray(X, dtype=np.float64)
    cdef Py_ssize_t n = x.shape[0], i, j, d
    cdef Py_ssize_t k = x.shape[1]
    out = np.zeros((n, k), dtype=np.float64)
    cdef double[:, ::1] F = out
    cdef double dist2, diff, w
    with nogil:
        for i in range(n):
            for j in range(n):
                if j == i:
                    continue
                dist2 = 0.0
                for d in range(k):
                    diff = x[j, d] - x[i, d]
                    dist2 += diff * diff
                if dist2 < 1e-24:
                    continue
                w = q[i] * q[j] / dist2
                if not f[j] > f[i]:
                    w = -w
                for d in range(k):
                    F[i, d] += w * (x[j, d] - x[i, d])
    return out


def local_search(int kind, const double[::1] W, const double[::1] M,
                 const double[::1] S, Y, fy, lam, up, step, lower, upper):
    Z_arr = np.array(Y, dtype=np.float64, order="C", copy=True)
    fz_arr = np.array(fy, dtype=np.float64, copy=True)
    cdef double[:, ::1] Z = Z_arr
    cdef double[::1] fz = fz_arr
    cdef double[:, :, ::1] lm = np.ascontiguousarray(lam, dtype=np.float64)
    cdef cnp.uint8_t[:, :, ::1] u = np.ascontiguousarray(up, dtype=np.uint8)
    cdef double[::1] st = np.ascontiguousarray(step, dtype=np.float64)
    cdef double[::1] lb = np.ascontiguousarray(lower, dtype=np.float64)
    cdef double[::1] ub = np.ascontiguousarray(upper, dtype=np.float64)
    cdef Py_ssize_t n = lm.shape[0], r
    cdef int k = <int>lm.shape[1], iters = <int>lm.shape[2], d, t
    cdef long th[MAXK]
    cdef double old, val, fc
    cdef long evals = 0
    with nogil:
        for r in range(n):
            for d in range(k):
                for t in range(iters):
                    old = Z[r, d]
                    if u[r, d, t]:
                        val = old + lm[r, d, t] * st[d]
                    else:
                        val = old - lm[r, d, t] * st[d]
                    if val < lb[d]:
                        val = lb[d]
                    if val > ub[d]:
                        val = ub[d]
                    Z[r, d] = val
                    _repair(&Z[r, 0], th, k)
                    fc = _fitness(kind, W, M, S, th, k)
                    evals += 1
                    if fc > fz[r]:
                        fz[r] = fc
                        break
                    Z[r, d] = old
    return Z_arr, fz_arr, evals


def exhaustive(int kind, const double[::1] W, const double[::1] M,
               const double[::1] S, int k):
    if not 1 <= k <= 3:
        raise ValueError("exhaustive search supports 1 <= k <= 3")
    cdef long th[3]
    cdef long best[3]
    cdef double f, best_f = -1.0e308
    cdef long n_opt = 0, evals = 0
    cdef long a, b, c
    cdef long a_hi = NBINS - k
    with nogil:
        for a in range(1, a_hi + 1):
            th[0] = a
            if k == 1:
                f = _fitness(kind, W, M, S, th, 1)
                evals += 1
                if f > best_f:
                    best_f = f; best[0] = a; n_opt = 1
                elif f == best_f:
                    n_opt += 1
                continue
            for b in range(a + 1, NBINS - k + 2):
                th[1] = b
                if k == 2:
                    f = _fitness(kind, W, M, S, th, 2)
                    evals += 1
                    if f > best_f:
                        best_f = f; best[0] = a; best[1] = b; n_opt = 1
                    elif f == best_f:
                        n_opt += 1
                    continue
                for c in range(b + 1, NBINS):
                    th[2] = c
                    f = _fitness(kind, W, M, S, th, 3)
                    evals += 1
                    if f > best_f:
                        best_f = f; best[0] = a; best[1] = b; best[2] = c; n_opt = 1
                    elif f == best_f:
                        n_opt += 1
    best_th = np.array([best[i] for i in range(k)], dtype=np.int64)
    return best_th, float(best_f), int(n_opt), int(evals)
