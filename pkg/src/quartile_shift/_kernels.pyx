# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels.  Same contracts as ``_pykernels``."""
import numpy as np

from libc.math cimport exp
from libc.stdint cimport int64_t


def sweep_counts(treated, offsets, Py_ssize_t n, Py_ssize_t m, q):
    cdef const int64_t[::1] tr = np.ascontiguousarray(treated, dtype=np.int64)
    cdef const int64_t[::1] off = np.ascontiguousarray(offsets, dtype=np.int64)
    cdef int64_t q1 = q[0], q2 = q[1], q3 = q[2]
    cdef Py_ssize_t nbp = off.shape[0] - 1
    out = np.zeros((nbp + 1, 4), dtype=np.int64)
    cdef int64_t[:, ::1] o = out
    posarr = np.arange(m + 1, m + n + 1, dtype=np.int64)
    cdef int64_t[::1] pos = posarr
    cdef int64_t a0 = 0, a1 = 0, a2 = 0, a3 = 0, p, r
    cdef Py_ssize_t t, i
    for i in range(n):
        p = pos[i]
        if p <= q1:
            a0 += 1
        elif p <= q2:
            a1 += 1
        elif p <= q3:
            a2 += 1
        else:
            a3 += 1
    o[0, 0] = a0; o[0, 1] = a1; o[0, 2] = a2; o[0, 3] = a3
    for t in range(nbp):
        for i in range(off[t], off[t + 1]):
            r = tr[i]
            pos[r] -= 1
            p = pos[r]
            if p == q1:
                a0 += 1
                a1 -= 1
            elif p == q2:
                a1 += 1
                a2 -= 1
            elif p == q3:
                a2 += 1
                a3 -= 1
        o[t + 1, 0] = a0; o[t + 1, 1] = a1; o[t + 1, 2] = a2; o[t + 1, 3] = a3
    return out


def enumerate_tables(k, Py_ssize_t n, logc, double log_total):
    cdef Py_ssize_t k1 = k[0], k2 = k[1], k3 = k[2], k4 = k[3]
    cdef const double[::1] c1 = np.ascontiguousarray(logc[0], dtype=np.float64)
    cdef const double[::1] c2 = np.ascontiguousarray(logc[1], dtype=np.float64)
    cdef const double[::1] c3 = np.ascontiguousarray(logc[2], dtype=np.float64)
    cdef const double[::1] c4 = np.ascontiguousarray(logc[3], dtype=np.float64)
    cdef Py_ssize_t cap = (k2 + 1) * (k3 + 1) * (k4 + 1)
    tables = np.empty((cap, 4), dtype=np.int64)
    probs = np.empty(cap, dtype=np.float64)
    cdef int64_t[:, ::1] tb = tables
    cdef double[::1] pr = probs
    cdef Py_ssize_t x2, x3, x4, x1, cnt = 0
    for x2 in range(k2 + 1):
        for x3 in range(k3 + 1):
            for x4 in range(k4 + 1):
                x1 = n - x2 - x3 - x4
                if x1 < 0 or x1 > k1:
                    continue
                tb[cnt, 0] = x1; tb[cnt, 1] = x2; tb[cnt, 2] = x3; tb[cnt, 3] = x4
                pr[cnt] = exp(c1[x1] + c2[x2] + c3[x3] + c4[x4] - log_total)
                cnt += 1
    return tables[:cnt].copy(), probs[:cnt].copy()


def mw_frequencies(Py_ssize_t n, Py_ssize_t m):
    cdef Py_ssize_t s = min(n, m), l = max(n, m)
    cdef Py_ssize_t total = s * l
    buf_a = np.zeros(total + 1)
    buf_b = np.zeros(total + 1)
    cdef double[::1] c = buf_a
    cdef double[::1] nxt = buf_b
    cdef double[::1] tmp
    cdef Py_ssize_t j, v, deg, half, shift, prev_deg = 0
    cdef double mid
    c[0] = 1.0
    for j in range(1, s + 1):
        deg = l * j
        half = deg // 2
        shift = l + j
        for v in range(half + 1):
            nxt[v] = c[v] if v <= prev_deg else 0.0
            if v >= shift:
                nxt[v] -= c[v - shift]
        for v in range(j, half + 1):
            nxt[v] += nxt[v - j]
        for v in range(half + 1):
            nxt[deg - v] = nxt[v]
        mid = nxt[half]
        for v in range(deg + 1):
            nxt[v] /= mid
        tmp = c
        c = nxt
        nxt = tmp
        prev_deg = deg
    out = np.asarray(c)[: total + 1].copy()
    return out / out.sum()
