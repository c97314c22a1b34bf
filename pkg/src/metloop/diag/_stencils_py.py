"""Pure-NumPy stencil kernels.

Fallback implementation of the hot loops; selected at import time when the
compiled extension (``metloop.diag._stencils``) is unavailable or when
METLOOP_DIAG_BACKEND=python is set. The arithmetic per grid point is the
same expression the compiled kernels evaluate: second-order centered
differences in the interior, first-order one-sided differences at the
boundaries, both on a possibly non-uniform coordinate.
"""

import numpy as np

NAME = "python"


def diff_last(a, x, out):
    """d(a)/d(x) along the last axis of a 2-D array.

    a: (m, n) float64, x: (n,) float64, out: (m, n) float64.
    """
    out[:, 1:-1] = (a[:, 2:] - a[:, :-2]) / (x[2:] - x[:-2])
    out[:, 0] = (a[:, 1] - a[:, 0]) / (x[1] - x[0])
    out[:, -1] = (a[:, -1] - a[:, -2]) / (x[-1] - x[-2])


def diff_mid(a, x, out):
    """d(a)/d(x) along the middle axis of a 3-D array.

    a: (m, n, l) float64, x: (n,) float64, out: (m, n, l) float64.
    """
    dx = (x[2:] - x[:-2])[None, :, None]
    out[:, 1:-1, :] = (a[:, 2:, :] - a[:, :-2, :]) / dx
    out[:, 0, :] = (a[:, 1, :] - a[:, 0, :]) / (x[1] - x[0])
    out[:, -1, :] = (a[:, -1, :] - a[:, -2, :]) / (x[-1] - x[-2])


def trapz_mid(a, x, out):
    """Trapezoidal integral of a over x along the middle axis.

    a: (m, n, l) float64, x: (n,) float64, out: (m, l) float64.
    Accumulates layer by layer in index order so results are reproducible.
    """
    out[:, :] = 0.0
    for k in range(len(x) - 1):
        out += 0.5 * (a[:, k, :] + a[:, k + 1, :]) * (x[k + 1] - x[k])
