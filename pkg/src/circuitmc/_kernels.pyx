# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels for minor enumeration and hole determinants.

Mirrors ``circuitmc._fallback`` exactly; ``circuitmc._backend`` picks one at
import time.
"""
import numpy as np

from libc.math cimport fabs
from libc.stdlib cimport free, malloc


cdef double _lu_det(double* a, Py_ssize_t s) noexcept nogil:
    # In-place LU with partial pivoting on a row-major s x s buffer.
    cdef Py_ssize_t i, j, k, p
    cdef double det = 1.0
    cdef double piv, tmp, f
    for k in range(s):
        p = k
        piv = fabs(a[k * s + k])
        for i in range(k + 1, s):
            if fabs(a[i * s + k]) > piv:
                piv = fabs(a[i * s + k])
                p = i
        if piv == 0.0:
            return 0.0
        if p != k:
            for j in range(s):
                tmp = a[k * s + j]
                a[k * s + j] = a[p * s + j]
                a[p * s + j] = tmp
            det = -det
        det *= a[k * s + k]
        for i in range(k + 1, s):
            f = a[i * s + k] / a[k * s + k]
            if f != 0.0:
                for j in range(k + 1, s):
                    a[i * s + j] -= f * a[k * s + j]
    return det


def hole_dets(const double[:, :, ::1] blocks):
    """Determinants of each block with its bottom-right entry set to 0 and to 1."""
    cdef Py_ssize_t K = blocks.shape[0]
    cdef Py_ssize_t s = blocks.shape[1]
    cdef Py_ssize_t k, i, j
    a0_arr = np.empty(K, dtype=np.float64)
    a1_arr = np.empty(K, dtype=np.float64)
    cdef double[::1] a0 = a0_arr
    cdef double[::1] a1 = a1_arr
    cdef double* buf = <double*> malloc(s * s * sizeof(double))
    if buf == NULL:
        raise MemoryError()
    try:
        with nogil:
            for k in range(K):
                for i in range(s):
                    for j in range(s):
                        buf[i * s + j] = blocks[k, i, j]
                buf[s * s - 1] = 0.0
                a0[k] = _lu_det(buf, s)
                for i in range(s):
                    for j in range(s):
                        buf[i * s + j] = blocks[k, i, j]
                buf[s * s - 1] = 1.0
                a1[k] = _lu_det(buf, s)
    finally:
        free(buf)
    return a0_arr, a1_arr


cdef bint _next_comb(Py_ssize_t* idx, Py_ssize_t r, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t i = r - 1
    cdef Py_ssize_t j
    while i >= 0 and idx[i] == n - r + i:
        i -= 1
    if i < 0:
        return False
    idx[i] += 1
    for j in range(i + 1, r):
        idx[j] = idx[j - 1] + 1
    return True


cdef Py_ssize_t _comb(Py_ssize_t n, Py_ssize_t k) noexcept nogil:
    cdef Py_ssize_t out = 1
    cdef Py_ssize_t i
    if k < 0 or k > n:
        return 0
    for i in range(k):
        out = out * (n - i) // (i + 1)
    return out


def enumerate_minors(const unsigned char[:, ::1] mask,
                     const Py_ssize_t[::1] rows,
                     const Py_ssize_t[::1] cols,
                     Py_ssize_t r):
    """All (row r-subset, col r-subset) pairs whose cross block is fully observed.

    Ordered lexicographically by row subset, then column subset.
    """
    cdef Py_ssize_t nr = rows.shape[0]
    cdef Py_ssize_t nc = cols.shape[0]
    cdef Py_ssize_t total = 0
    cdef Py_ssize_t t, a, b, nvalid, pos
    cdef bint ok
    empty = (np.empty((0, r), dtype=np.intp), np.empty((0, r), dtype=np.intp))
    if r < 1 or nr < r or nc < r:
        return empty

    cdef Py_ssize_t* ridx = <Py_ssize_t*> malloc(r * sizeof(Py_ssize_t))
    cdef Py_ssize_t* cidx = <Py_ssize_t*> malloc(r * sizeof(Py_ssize_t))
    cdef Py_ssize_t* valid = <Py_ssize_t*> malloc(nc * sizeof(Py_ssize_t))
    cdef Py_ssize_t[:, ::1] out_r
    cdef Py_ssize_t[:, ::1] out_c
    if ridx == NULL or cidx == NULL or valid == NULL:
        free(ridx); free(cidx); free(valid)
        raise MemoryError()
    try:
        # Pass 1: count.
        for t in range(r):
            ridx[t] = t
        while True:
            nvalid = 0
            for b in range(nc):
                ok = True
                for t in range(r):
                    if not mask[rows[ridx[t]], cols[b]]:
                        ok = False
                        break
                if ok:
                    nvalid += 1
            total += _comb(nvalid, r)
            if not _next_comb(ridx, r, nr):
                break
        rr = np.empty((total, r), dtype=np.intp)
        cc = np.empty((total, r), dtype=np.intp)
        if total == 0:
            return rr, cc
        out_r = rr
        out_c = cc
        # Pass 2: fill.
        pos = 0
        for t in range(r):
            ridx[t] = t
        while True:
            nvalid = 0
            for b in range(nc):
                ok = True
                for t in range(r):
                    if not mask[rows[ridx[t]], cols[b]]:
                        ok = False
                        break
                if ok:
                    valid[nvalid] = b
                    nvalid += 1
            if nvalid >= r:
                for t in range(r):
                    cidx[t] = t
                while True:
                    for t in range(r):
                        out_r[pos, t] = rows[ridx[t]]
                        out_c[pos, t] = cols[valid[cidx[t]]]
                    pos += 1
                    if not _next_comb(cidx, r, nvalid):
                        break
            if not _next_comb(ridx, r, nr):
                break
        return rr, cc
    finally:
        free(ridx)
        free(cidx)
        free(valid)
