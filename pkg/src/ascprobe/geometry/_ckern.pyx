# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernel backend.

pairwise_sq_dists accumulates each pair's squared per-dimension
differences with exactly rounded summation (the Shewchuk partials
algorithm used by math.fsum), so the result is the correctly rounded
sum and therefore independent of dimension order. tsne_grad is a
typed-loop version of the numpy fallback with the same semantics.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, log

cnp.import_array()

BACKEND_NAME = "c"

DEF MAX_PARTIALS = 64


cdef double _exact_sq_dist(const double* a, const double* b, Py_ssize_t d) nogil:
    cdef double partials[MAX_PARTIALS]
    cdef Py_ssize_t n = 0, i, j
    cdef Py_ssize_t k
    cdef double x, y, hi, lo, yr, diff, tmp
    for k in range(d):
        diff = a[k] - b[k]
        x = diff * diff
        i = 0
        for j in range(n):
            y = partials[j]
            if fabs(x) < fabs(y):
                tmp = x
                x = y
                y = tmp
            hi = x + y
            yr = hi - x
            lo = y - yr
            if lo != 0.0:
                partials[i] = lo
                i += 1
            x = hi
        if i == MAX_PARTIALS:
            return -1.0  # unreachable for squares; guarded in the caller
        partials[i] = x
        n = i + 1
    if n == 0:
        return 0.0
    # round the partials to one double, half-even at the boundary
    n -= 1
    hi = partials[n]
    lo = 0.0
    while n > 0:
        x = hi
        n -= 1
        y = partials[n]
        hi = x + y
        yr = hi - x
        lo = y - yr
        if lo != 0.0:
            break
    if n > 0 and ((lo < 0.0 and partials[n - 1] < 0.0)
                  or (lo > 0.0 and partials[n - 1] > 0.0)):
        y = lo * 2.0
        x = hi + y
        yr = x - hi
        if y == yr:
            hi = x
    return hi


def exact_sq_dist(a, b):
    """Exactly rounded squared distance of two vectors; test hook."""
    a = np.ascontiguousarray(a, dtype=np.float64)
    b = np.ascontiguousarray(b, dtype=np.float64)
    if a.ndim != 1 or a.shape[0] != b.shape[0]:
        raise ValueError("expected two 1-D vectors of equal length")
    cdef double[::1] av = a
    cdef double[::1] bv = b
    cdef double s = _exact_sq_dist(&av[0], &bv[0], av.shape[0]) if av.shape[0] else 0.0
    if s < 0.0:
        raise RuntimeError("partials buffer overflow")
    return s


def pairwise_sq_dists(x):
    """Squared Euclidean distance matrix, exactly symmetric, zero diagonal."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError("expected a 2-D array")
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t d = x.shape[1]
    out = np.zeros((n, n), dtype=np.float64)
    cdef double[:, ::1] xv = x
    cdef double[:, ::1] ov = out
    cdef Py_ssize_t i, j
    cdef double s
    cdef bint bad = False
    with nogil:
        for i in range(n):
            if bad:
                break
            for j in range(i + 1, n):
                s = _exact_sq_dist(&xv[i, 0], &xv[j, 0], d) if d else 0.0
                if s < 0.0:
                    bad = True
                    break
                ov[i, j] = s
                ov[j, i] = s
    if bad:
        raise RuntimeError("partials buffer overflow")
    return out


def tsne_grad(y, p, bint want_kl=False, double min_prob=1e-12):
    """Kullback-Leibler gradient of a 2-D Student-t embedding.

    y (N, 2) embedding, p (N, N) symmetric affinities with zero diagonal.
    Returns (grad, kl); kl is None unless requested.
    """
    y = np.ascontiguousarray(y, dtype=np.float64)
    p = np.ascontiguousarray(p, dtype=np.float64)
    if y.ndim != 2 or y.shape[1] != 2:
        raise ValueError("embedding must have shape (N, 2)")
    cdef Py_ssize_t n = y.shape[0]
    if p.shape[0] != n or p.shape[1] != n:
        raise ValueError("affinity matrix shape must match the embedding")
    num = np.zeros((n, n), dtype=np.float64)
    grad = np.zeros((n, 2), dtype=np.float64)
    cdef double[:, ::1] yv = y
    cdef double[:, ::1] pv = p
    cdef double[:, ::1] nv = num
    cdef double[:, ::1] gv = grad
    cdef Py_ssize_t i, j
    cdef double ddx, ddy, v, z = 0.0
    cdef double q, w, gx, gy, kl = 0.0
    with nogil:
        for i in range(n):
            for j in range(i + 1, n):
                ddx = yv[i, 0] - yv[j, 0]
                ddy = yv[i, 1] - yv[j, 1]
                v = 1.0 / (1.0 + (ddx * ddx + ddy * ddy))
                nv[i, j] = v
                nv[j, i] = v
                z += 2.0 * v
        for i in range(n):
            gx = 0.0
            gy = 0.0
            for j in range(n):
                if i == j:
                    continue
                q = nv[i, j] / z
                if q < min_prob:
                    q = min_prob
                w = (pv[i, j] - q) * nv[i, j]
                gx += w * (yv[i, 0] - yv[j, 0])
                gy += w * (yv[i, 1] - yv[j, 1])
                if want_kl and pv[i, j] > 0.0:
                    kl += pv[i, j] * (log(pv[i, j]) - log(q))
            gv[i, 0] = 4.0 * gx
            gv[i, 1] = 4.0 * gy
    return grad, (kl if want_kl else None)
