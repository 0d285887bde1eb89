# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops. Contracts mirror ``_kernels_py``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs

cnp.import_array()


cdef inline void _neumaier(double* s, double* c, double x) noexcept nogil:
    cdef double t = s[0] + x
    if fabs(s[0]) >= fabs(x):
        c[0] += (s[0] - t) + x
    else:
        c[0] += (x - t) + s[0]
    s[0] = t


def convolve(a, b):
    cdef const double[::1] av = np.ascontiguousarray(a, dtype=np.float64)
    cdef const double[::1] bv = np.ascontiguousarray(b, dtype=np.float64)
    cdef Py_ssize_t na = av.shape[0], nb = bv.shape[0]
    if na == 0 or nb == 0:
        return np.zeros(0)
    out = np.empty(na + nb - 1)
    cdef double[::1] ov = out
    cdef Py_ssize_t k, j, lo, hi
    cdef double s, c
    with nogil:
        for k in range(na + nb - 1):
            lo = k - nb + 1 if k - nb + 1 > 0 else 0
            hi = k if k < na - 1 else na - 1
            s = 0.0
            c = 0.0
            for j in range(lo, hi + 1):
                _neumaier(&s, &c, av[j] * bv[k - j])
            ov[k] = s + c
    return out


def stein_series(w, double m):
    cdef const double[::1] wv = np.ascontiguousarray(w, dtype=np.float64)
    cdef Py_ssize_t n = wv.shape[0], k
    cdef double s = 0.0, c = 0.0
    with nogil:
        for k in range(1, n - 1):
            _neumaier(&s, &c, k * fabs(m * wv[k] - (k + 1) * wv[k + 1]))
    return s + c


def stein_solve_batch(ind, p, double lam, Py_ssize_t m_ext):
    cdef const cnp.uint8_t[:, ::1] iv = np.ascontiguousarray(ind, dtype=np.uint8)
    cdef const double[::1] pv = np.ascontiguousarray(p, dtype=np.float64)
    cdef Py_ssize_t nrows = iv.shape[0], kp1 = iv.shape[1]
    cdef Py_ssize_t big_k = kp1 - 1
    cdef Py_ssize_t r, k

    s_arr = np.zeros(m_ext + 1)
    cdf_arr = np.zeros(kp1)
    ahi_arr = np.zeros(kp1)
    g = np.zeros((nrows, kp1))
    pa = np.zeros(nrows)
    cdef double[::1] s_ratio = s_arr
    cdef double[::1] cdf = cdf_arr
    cdef double[::1] a_hi = ahi_arr
    cdef double[:, ::1] gv = g
    cdef double[::1] pav = pa
    cdef double acc, comp, a_lo

    with nogil:
        for k in range(m_ext - 1, -1, -1):
            s_ratio[k] = lam / (k + 1) * (1.0 + s_ratio[k + 1])
        acc = 0.0
        comp = 0.0
        for k in range(kp1):
            _neumaier(&acc, &comp, pv[k])
            cdf[k] = acc + comp
        for r in range(nrows):
            a_hi[big_k] = 0.0
            for k in range(big_k - 1, -1, -1):
                a_hi[k] = lam / (k + 1) * (iv[r, k + 1] + a_hi[k + 1])
            acc = 0.0
            comp = 0.0
            for k in range(big_k):
                if iv[r, k]:
                    _neumaier(&acc, &comp, pv[k])
                a_lo = acc + comp
                gv[r, k + 1] = (a_lo * s_ratio[k] - a_hi[k] * cdf[k]) / lam
            if iv[r, big_k]:
                _neumaier(&acc, &comp, pv[big_k])
            pav[r] = acc + comp
    return g, pa
