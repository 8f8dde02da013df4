# cython: boundscheck=False, wraparound=False, cdivision=True
# cython: language_level=3
"""Compiled bivariate likelihood kernel.

Same contract as the reference module: per-row Bernstein evaluation of the
Pickands polynomial and its derivatives, assembled into the simple
max-stable log density.  Uses a two-sided O(k) basis recurrence per row.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY, isfinite, log, pow
from libc.stdlib cimport free, malloc

cnp.import_array()

NAME = "fast"

cdef double _FLOOR = 1e-300


cdef void _basis(double t, int m, double* out) noexcept nogil:
    cdef int j
    cdef double ratio
    if m == 0:
        out[0] = 1.0
        return
    if t <= 0.5:
        ratio = t / (1.0 - t)
        out[0] = pow(1.0 - t, m)
        for j in range(m):
            out[j + 1] = out[j] * ratio * (m - j) / (j + 1.0)
    else:
        ratio = (1.0 - t) / t
        out[m] = pow(t, m)
        for j in range(m, 0, -1):
            out[j - 1] = out[j] * ratio * j / (m - j + 1.0)


cdef double _dot(const double* coeffs, const double* basis, int n) noexcept nogil:
    cdef int j
    cdef double acc = 0.0
    for j in range(n):
        acc += coeffs[j] * basis[j]
    return acc


def simple_logpdf2(const double[::1] beta, const double[:, ::1] rows):
    """Per-row log density of the simple bivariate max-stable law."""
    cdef Py_ssize_t n = rows.shape[0]
    cdef int k = <int> beta.shape[0] - 1
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n, dtype=np.float64)
    cdef double[::1] out_v = out
    cdef double* d1 = <double*> malloc((k if k > 0 else 1) * sizeof(double))
    cdef double* d2 = <double*> malloc((k - 1 if k > 1 else 1) * sizeof(double))
    cdef double* scratch = <double*> malloc((k + 1) * sizeof(double))
    if d1 == NULL or d2 == NULL or scratch == NULL:
        free(d1); free(d2); free(scratch)
        raise MemoryError()
    cdef Py_ssize_t i
    cdef int j
    cdef double y1, y2, s, t, a, a1, a2, big_v, m1, m2, m12, bracket
    try:
        for j in range(k):
            d1[j] = k * (beta[j + 1] - beta[j])
        for j in range(k - 1):
            d2[j] = (k - 1) * (d1[j + 1] - d1[j])
        with nogil:
            for i in range(n):
                y1 = rows[i, 0]
                y2 = rows[i, 1]
                s = y1 + y2
                t = y1 / s
                _basis(t, k, scratch)
                a = _dot(&beta[0], scratch, k + 1)
                if k >= 1:
                    _basis(t, k - 1, scratch)
                    a1 = _dot(d1, scratch, k)
                else:
                    a1 = 0.0
                if k >= 2:
                    _basis(t, k - 2, scratch)
                    a2 = _dot(d2, scratch, k - 1)
                else:
                    a2 = 0.0
                big_v = a * s / (y1 * y2)
                m1 = (a - t * a1) / (y1 * y1)
                m2 = (a + (1.0 - t) * a1) / (y2 * y2)
                m12 = a2 / (s * s * s)
                if m1 < 0.0:
                    m1 = 0.0
                if m2 < 0.0:
                    m2 = 0.0
                if m12 < 0.0:
                    m12 = 0.0
                bracket = m1 * m2 + m12
                if bracket < _FLOOR:
                    bracket = _FLOOR
                out_v[i] = -big_v + log(bracket)
    finally:
        free(d1)
        free(d2)
        free(scratch)
    return out


def simple_loglik2(const double[::1] beta, const double[:, ::1] rows):
    """Summed log density over rows, with a finiteness flag."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] values = simple_logpdf2(beta, rows)
    cdef double total = 0.0
    cdef Py_ssize_t i
    for i in range(values.shape[0]):
        total += values[i]
    return total, bool(isfinite(total))
