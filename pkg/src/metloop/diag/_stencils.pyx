# cython: language_level=3
"""Compiled stencil kernels.

Hot loops for the diagnostics library: centered/one-sided differences and
trapezoidal column integration on non-uniform coordinates. Point-for-point
the same arithmetic as the pure-NumPy fallback in _stencils_py.
"""

NAME = "compiled"


def diff_last(double[:, ::1] a, double[::1] x, double[:, ::1] out):
    """d(a)/d(x) along the last axis of a 2-D array."""
    cdef Py_ssize_t m = a.shape[0], n = a.shape[1]
    cdef Py_ssize_t i, j
    for i in range(m):
        for j in range(1, n - 1):
            out[i, j] = (a[i, j + 1] - a[i, j - 1]) / (x[j + 1] - x[j - 1])
        out[i, 0] = (a[i, 1] - a[i, 0]) / (x[1] - x[0])
        out[i, n - 1] = (a[i, n - 1] - a[i, n - 2]) / (x[n - 1] - x[n - 2])


def diff_mid(double[:, :, ::1] a, double[::1] x, double[:, :, ::1] out):
    """d(a)/d(x) along the middle axis of a 3-D array."""
    cdef Py_ssize_t m = a.shape[0], n = a.shape[1], l = a.shape[2]
    cdef Py_ssize_t i, j, k
    for i in range(m):
        for j in range(1, n - 1):
            for k in range(l):
                out[i, j, k] = (a[i, j + 1, k] - a[i, j - 1, k]) / (x[j + 1] - x[j - 1])
        for k in range(l):
            out[i, 0, k] = (a[i, 1, k] - a[i, 0, k]) / (x[1] - x[0])
            out[i, n - 1, k] = (a[i, n - 1, k] - a[i, n - 2, k]) / (x[n - 1] - x[n - 2])


def trapz_mid(double[:, :, ::1] a, double[::1] x, double[:, ::1] out):
    """Trapezoidal integral of a over x along the middle axis."""
    cdef Py_ssize_t m = a.shape[0], n = a.shape[1], l = a.shape[2]
    cdef Py_ssize_t i, j, k
    cdef double dx
    for i in range(m):
        for k in range(l):
            out[i, k] = 0.0
    for j in range(n - 1):
        dx = x[j + 1] - x[j]
        for i in range(m):
            for k in range(l):
                out[i, k] += 0.5 * (a[i, j, k] + a[i, j + 1, k]) * dx
