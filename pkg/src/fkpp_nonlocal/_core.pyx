# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: tridiagonal solve, edge fluxes, direct convolution.

Signatures mirror ``_pycore``; results agree with it to round-off.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport floor, fabs

cnp.import_array()

NAME = "cython"


def tridiag_solve(double[::1] lower, double[::1] diag, double[::1] upper, double[::1] rhs):
    cdef Py_ssize_t n = rhs.shape[0]
    cdef Py_ssize_t i
    cdef double m
    out = np.empty(n)
    cdef double[::1] x = out
    cdef double[::1] cp = np.empty(n)
    cp[0] = upper[0] / diag[0] if n > 1 else 0.0
    x[0] = rhs[0] / diag[0]
    for i in range(1, n):
        m = diag[i] - lower[i - 1] * cp[i - 1]
        if i < n - 1:
            cp[i] = upper[i] / m
        x[i] = (rhs[i] - lower[i - 1] * x[i - 1]) / m
    for i in range(n - 2, -1, -1):
        x[i] -= cp[i] * x[i + 1]
    return out


def direct_convolve(double[::1] a, double[::1] b):
    cdef Py_ssize_t na = a.shape[0], nb = b.shape[0]
    cdef Py_ssize_t q, j
    cdef double aq
    out = np.zeros(na + nb - 1)
    cdef double[::1] o = out
    # scatter form: the inner loop is contiguous in both o and b
    for q in range(na):
        aq = a[q]
        for j in range(nb):
            o[q + j] += aq * b[j]
    return out


cdef inline double _interp(double xi, double[::1] table, Py_ssize_t n) nogil:
    # piecewise-linear interpolation of table on the integer knots 0..n
    cdef Py_ssize_t k
    cdef double f
    if xi <= 0.0:
        return table[0]
    if xi >= n:
        return table[n]
    k = <Py_ssize_t> floor(xi)
    f = xi - k
    if f == 0.0:
        return table[k]
    return table[k] + f * (table[k + 1] - table[k])


def upwind_fluxes(double[::1] u, double[::1] courant):
    cdef Py_ssize_t n = u.shape[0]
    cdef Py_ssize_t e
    cdef double c, cmax = 0.0
    out = np.empty(n + 1)
    cdef double[::1] f = out
    for e in range(n + 1):
        if fabs(courant[e]) > cmax:
            cmax = fabs(courant[e])
    if cmax <= 1.0:
        for e in range(n + 1):
            c = courant[e]
            if c > 0.0:
                f[e] = c * u[e - 1] if e > 0 else 0.0
            else:
                f[e] = c * u[e] if e < n else 0.0
        return out
    cdef double[::1] lo = np.empty(n + 1)
    cdef double[::1] hi = np.empty(n + 1)
    lo[0] = 0.0
    for e in range(n):
        lo[e + 1] = lo[e] + u[e]
    hi[n] = 0.0
    for e in range(n - 1, -1, -1):
        hi[e] = hi[e + 1] + u[e]
    cdef Py_ssize_t half = (n + 1) // 2
    for e in range(half):
        f[e] = lo[e] - _interp(e - courant[e], lo, n)
    for e in range(half, n + 1):
        f[e] = _interp(e - courant[e], hi, n) - hi[e]
    return out


def remap_fluxes(double[::1] u, double[::1] courant):
    cdef Py_ssize_t n = u.shape[0]
    cdef Py_ssize_t e, k
    cdef double x, w
    out = np.empty(n + 1)
    cdef double[::1] f = out
    cdef double[::1] lo = np.empty(n + 1)
    cdef double[::1] hi = np.empty(n + 1)
    cdef double[::1] knot = np.empty(n + 1)
    lo[0] = 0.0
    for e in range(n):
        lo[e + 1] = lo[e] + u[e]
    hi[n] = 0.0
    for e in range(n - 1, -1, -1):
        hi[e] = hi[e + 1] + u[e]
    for e in range(n + 1):
        knot[e] = e + courant[e]
    cdef Py_ssize_t half = (n + 1) // 2
    # edges and knots both increase, so one forward sweep finds every bracket
    k = 0
    for e in range(n + 1):
        x = <double> e
        while k < n and knot[k + 1] <= x:
            k += 1
        if x <= knot[0]:
            w = -1.0
        elif x >= knot[n]:
            w = 2.0
        else:
            w = (x - knot[k]) / (knot[k + 1] - knot[k])
        if e < half:
            if w < 0.0:
                f[e] = lo[e]
            elif w > 1.0:
                f[e] = lo[e] - lo[n]
            else:
                f[e] = lo[e] - (lo[k] + w * (lo[k + 1] - lo[k]))
        else:
            if w < 0.0:
                f[e] = hi[0] - hi[e]
            elif w > 1.0:
                f[e] = -hi[e]
            else:
                f[e] = hi[k] + w * (hi[k + 1] - hi[k]) - hi[e]
    return out
