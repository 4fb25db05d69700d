# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot loops in ``_pykernels``."""
import numpy as np

from libc.math cimport sqrt


def criterion_values(dirs, a, T):
    cdef double[:, ::1] d = np.ascontiguousarray(dirs, dtype=np.float64)
    cdef double[::1] av = np.ascontiguousarray(a, dtype=np.float64)
    cdef double[:, ::1] tm = np.ascontiguousarray(T, dtype=np.float64)
    cdef Py_ssize_t n = d.shape[0], i
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    cdef double x, y, z, p, u, v, w
    with nogil:
        for i in range(n):
            x = d[i, 0]
            y = d[i, 1]
            z = d[i, 2]
            p = av[0] * x + av[1] * y + av[2] * z
            u = tm[0, 0] * x + tm[0, 1] * y + tm[0, 2] * z
            v = tm[1, 0] * x + tm[1, 1] * y + tm[1, 2] * z
            w = tm[2, 0] * x + tm[2, 1] * y + tm[2, 2] * z
            o[i] = p * p + 2.0 * sqrt(u * u + v * v + w * w)
    return out


def cap_accumulate(lams, s, double c):
    cdef double[:, ::1] lv = np.ascontiguousarray(lams, dtype=np.float64)
    cdef double[::1] sv = np.ascontiguousarray(s, dtype=np.float64)
    cdef Py_ssize_t n = lv.shape[0], i
    cdef long count = 0
    cdef double sx = 0.0, sy = 0.0, sz = 0.0
    cdef double x, y, z
    with nogil:
        for i in range(n):
            x = lv[i, 0]
            y = lv[i, 1]
            z = lv[i, 2]
            if sv[0] * x + sv[1] * y + sv[2] * z - c >= 0.0:
                count += 1
                sx += x
                sy += y
                sz += z
    return count, sx, sy, sz
