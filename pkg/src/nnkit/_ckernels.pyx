# cython: language_level=3, boundscheck=False, wraparound=False, initializedcheck=False
"""Compiled query kernels (hot path).

Twin of nnkit._pykernels: same traversal order, same IEEE arithmetic
(sequential accumulation, libm sqrt/pow, no FMA contraction - see
setup.py), same (distance, index) tie-breaking.  Results from the two
backends are bit-identical; tests/test_backends.py enforces this.
"""

from libc.math cimport fabs, pow, sqrt

from libc.stdint cimport int64_t

import numpy as np

COMPILED = True


cdef inline double _dist(const double[:, ::1] pts, Py_ssize_t i,
                         const double[::1] q, int mcode, double p) noexcept nogil:
    cdef Py_ssize_t j, dim = pts.shape[1]
    cdef double s = 0.0
    cdef double d
    if mcode == 0:  # euclidean
        for j in range(dim):
            d = q[j] - pts[i, j]
            s += d * d
        return sqrt(s)
    elif mcode == 1:  # manhattan
        for j in range(dim):
            s += fabs(q[j] - pts[i, j])
        return s
    elif mcode == 2:  # chebyshev
        for j in range(dim):
            d = fabs(q[j] - pts[i, j])
            if d > s:
                s = d
        return s
    else:  # minkowski
        for j in range(dim):
            s += pow(fabs(q[j] - pts[i, j]), p)
        return pow(s, 1.0 / p)


cdef inline double _gap_key(double g, int mcode, double p) noexcept nogil:
    # Plane gap rounded exactly like a single-axis candidate distance.
    if mcode == 0:
        return sqrt(g * g)
    elif mcode == 3:
        return pow(pow(g, p), 1.0 / p)
    return g


cdef inline bint _gt(double d1, int64_t i1, double d2, int64_t i2) noexcept nogil:
    # lexicographic (distance, index) comparison; heap top is the worst pair
    return d1 > d2 or (d1 == d2 and i1 > i2)


cdef inline void _heap_push(double[::1] hd, int64_t[::1] hi,
                            Py_ssize_t* size, double d, int64_t i) noexcept nogil:
    cdef Py_ssize_t c = size[0]
    cdef Py_ssize_t par
    cdef double td
    cdef int64_t ti
    hd[c] = d
    hi[c] = i
    size[0] = c + 1
    while c > 0:
        par = (c - 1) >> 1
        if _gt(hd[c], hi[c], hd[par], hi[par]):
            td = hd[c]; hd[c] = hd[par]; hd[par] = td
            ti = hi[c]; hi[c] = hi[par]; hi[par] = ti
            c = par
        else:
            break


cdef inline void _heap_replace(double[::1] hd, int64_t[::1] hi,
                               Py_ssize_t size, double d, int64_t i) noexcept nogil:
    cdef Py_ssize_t c = 0
    cdef Py_ssize_t l, r, m
    cdef double td
    cdef int64_t ti
    hd[0] = d
    hi[0] = i
    while True:
        l = 2 * c + 1
        r = l + 1
        m = c
        if l < size and _gt(hd[l], hi[l], hd[m], hi[m]):
            m = l
        if r < size and _gt(hd[r], hi[r], hd[m], hi[m]):
            m = r
        if m == c:
            break
        td = hd[c]; hd[c] = hd[m]; hd[m] = td
        ti = hi[c]; hi[c] = hi[m]; hi[m] = ti
        c = m


def knn_query(const double[:, ::1] pts, const int64_t[::1] node_pt,
              const int64_t[::1] left, const int64_t[::1] right,
              const int64_t[::1] naxis, Py_ssize_t root, Py_ssize_t cap,
              const double[::1] q, Py_ssize_t k, double eps, int mcode, double p):
    """k nearest neighbors with optional (1+eps) slack; unsorted output."""
    heap_d_arr = np.empty(k, dtype=np.float64)
    heap_i_arr = np.empty(k, dtype=np.int64)
    stack_n_arr = np.empty(cap, dtype=np.int64)
    stack_g_arr = np.empty(cap, dtype=np.float64)
    cdef double[::1] heap_d = heap_d_arr
    cdef int64_t[::1] heap_i = heap_i_arr
    cdef int64_t[::1] stack_n = stack_n_arr
    cdef double[::1] stack_g = stack_g_arr
    cdef Py_ssize_t size = 0
    cdef Py_ssize_t top, node, i, ax, near, far
    cdef Py_ssize_t visited = 0
    cdef double one_plus_eps = 1.0 + eps
    cdef double gap, d, diff, g, wd

    stack_n[0] = root
    stack_g[0] = 0.0
    top = 1
    with nogil:
        while top > 0:
            top -= 1
            node = stack_n[top]
            gap = stack_g[top]
            if size == k and gap > heap_d[0] / one_plus_eps:
                continue
            visited += 1
            i = node_pt[node]
            d = _dist(pts, i, q, mcode, p)
            if size < k:
                _heap_push(heap_d, heap_i, &size, d, i)
            else:
                wd = heap_d[0]
                if d < wd or (d == wd and i < heap_i[0]):
                    _heap_replace(heap_d, heap_i, size, d, i)
            ax = naxis[node]
            diff = q[ax] - pts[i, ax]
            if diff < 0.0:
                near = left[node]
                far = right[node]
            else:
                near = right[node]
                far = left[node]
            if far >= 0:
                g = _gap_key(fabs(diff), mcode, p)
                if g < gap:
                    g = gap
                stack_n[top] = far
                stack_g[top] = g
                top += 1
            if near >= 0:
                stack_n[top] = near
                stack_g[top] = gap
                top += 1
    return heap_i_arr[:size].copy(), heap_d_arr[:size].copy(), visited


def radius_query(const double[:, ::1] pts, const int64_t[::1] node_pt,
                 const int64_t[::1] left, const int64_t[::1] right,
                 const int64_t[::1] naxis, Py_ssize_t root, Py_ssize_t cap,
                 const double[::1] q, double rho, int mcode, double p):
    """All points within the closed ball of radius rho; unsorted output."""
    cdef Py_ssize_t n = node_pt.shape[0]
    out_i_arr = np.empty(n, dtype=np.int64)
    out_d_arr = np.empty(n, dtype=np.float64)
    stack_n_arr = np.empty(cap, dtype=np.int64)
    stack_g_arr = np.empty(cap, dtype=np.float64)
    cdef int64_t[::1] out_i = out_i_arr
    cdef double[::1] out_d = out_d_arr
    cdef int64_t[::1] stack_n = stack_n_arr
    cdef double[::1] stack_g = stack_g_arr
    cdef Py_ssize_t m = 0
    cdef Py_ssize_t top, node, i, ax, near, far
    cdef Py_ssize_t visited = 0
    cdef double gap, d, diff, g

    stack_n[0] = root
    stack_g[0] = 0.0
    top = 1
    with nogil:
        while top > 0:
            top -= 1
            node = stack_n[top]
            gap = stack_g[top]
            if gap > rho:
                continue
            visited += 1
            i = node_pt[node]
            d = _dist(pts, i, q, mcode, p)
            if d <= rho:
                out_i[m] = i
                out_d[m] = d
                m += 1
            ax = naxis[node]
            diff = q[ax] - pts[i, ax]
            if diff < 0.0:
                near = left[node]
                far = right[node]
            else:
                near = right[node]
                far = left[node]
            if far >= 0:
                g = _gap_key(fabs(diff), mcode, p)
                if g < gap:
                    g = gap
                stack_n[top] = far
                stack_g[top] = g
                top += 1
            if near >= 0:
                stack_n[top] = near
                stack_g[top] = gap
                top += 1
    return out_i_arr[:m].copy(), out_d_arr[:m].copy(), visited
