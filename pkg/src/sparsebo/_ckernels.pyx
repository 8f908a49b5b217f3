# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops: 2-D hypervolume sweeps and the sourcing simulator.

Inputs are validated and canonicalized by :mod:`sparsebo.kernels`; these
functions assume contiguous float64 / int64 arrays.
"""
import numpy as np
cimport numpy as cnp

cnp.import_array()


def hypervolume_2d(const double[:, ::1] points, double ref0, double ref1):
    cdef Py_ssize_t n = points.shape[0]
    cdef Py_ssize_t i
    cdef double area = 0.0
    cdef double best1 = ref1
    cdef double p0, p1
    if n == 0:
        return 0.0
    order = np.lexsort((-np.asarray(points[:, 1]), -np.asarray(points[:, 0])))
    cdef cnp.int64_t[::1] idx = order.astype(np.int64)
    # sweep from largest first coordinate; each point adds the strip above the running max
    for i in range(n):
        p0 = points[idx[i], 0]
        p1 = points[idx[i], 1]
        if p0 <= ref0:
            break
        if p1 > best1:
            area += (p0 - ref0) * (p1 - best1)
            best1 = p1
    return area


def hvi_batch(const double[::1] front0, const double[::1] front1,
              double ref0, double ref1,
              const double[::1] a, const double[::1] b):
    """front0 strictly decreasing, front1 strictly increasing (pruned staircase)."""
    cdef Py_ssize_t m = front0.shape[0]
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t i, k
    cdef double ai, bi, hi, lo, level, width, val, da, db
    cdef bint found
    out = np.zeros(n, dtype=np.float64)
    out_da = np.zeros(n, dtype=np.float64)
    out_db = np.zeros(n, dtype=np.float64)
    cdef double[::1] v = out
    cdef double[::1] ga = out_da
    cdef double[::1] gb = out_db
    for i in range(n):
        ai = a[i]
        bi = b[i]
        if ai <= ref0 or bi <= ref1:
            continue
        val = 0.0
        da = 0.0
        db = 0.0
        found = False
        # segment k spans (lo, hi] with covered level `level`
        for k in range(m + 1):
            if k == 0:
                level = ref1
            else:
                level = front1[k - 1]
            lo = front0[k] if k < m else ref0
            if k > 0 and front0[k - 1] < ai:
                hi = front0[k - 1]
            else:
                hi = ai
            width = hi - lo
            if width <= 0.0:
                continue
            if not found:
                found = True
                if bi > level:
                    da = bi - level
            if bi > level:
                val += width * (bi - level)
                db += width
        v[i] = val
        ga[i] = da
        gb[i] = db
    return out, out_da, out_db


def sourcing_relevance(const double[:, ::1] theta_cum, const double[:, ::1] phi_cum,
                       const double[::1] m, const cnp.int64_t[::1] policy,
                       const double[:, ::1] u_topic, const double[:, ::1] u_item):
    cdef Py_ssize_t S = theta_cum.shape[0]
    cdef Py_ssize_t T = theta_cum.shape[1]
    cdef Py_ssize_t K = phi_cum.shape[1]
    cdef Py_ssize_t R = u_topic.shape[0]
    cdef Py_ssize_t r, s, d, col, lo, hi, mid, topic, item
    cdef double u, rs
    out = np.zeros(R, dtype=np.float64)
    cdef double[::1] res = out
    seen_arr = np.zeros(K, dtype=np.uint8)
    cdef unsigned char[::1] seen = seen_arr
    for r in range(R):
        for item in range(K):
            seen[item] = 0
        col = 0
        for s in range(S):
            for d in range(policy[s]):
                u = u_topic[r, col]
                lo = 0
                hi = T - 1
                while lo < hi:
                    mid = (lo + hi) >> 1
                    if theta_cum[s, mid] > u:
                        hi = mid
                    else:
                        lo = mid + 1
                topic = lo
                u = u_item[r, col]
                lo = 0
                hi = K - 1
                while lo < hi:
                    mid = (lo + hi) >> 1
                    if phi_cum[topic, mid] > u:
                        hi = mid
                    else:
                        lo = mid + 1
                seen[lo] = 1
                col += 1
        rs = 0.0
        for item in range(K):
            if seen[item]:
                rs += m[item]
        res[r] = rs
    return out
