"""Backend selection and N-dimensional wrappers for the stencil kernels.

The compiled extension is preferred when importable; METLOOP_DIAG_BACKEND
(``compiled`` or ``python``) overrides the choice. Wrappers reshape arbitrary
N-D inputs into the 2-D/3-D layouts the kernels operate on.
"""

from __future__ import annotations

import os

import numpy as np

from metloop.diag import _stencils_py


def _select_backend():
    requested = os.environ.get("METLOOP_DIAG_BACKEND", "")
    compiled = None
    try:
        from metloop.diag import _stencils as compiled  # noqa: F401
    except ImportError:
        compiled = None
    if requested == "python":
        return _stencils_py
    if requested == "compiled":
        if compiled is None:
            raise ImportError(
                "METLOOP_DIAG_BACKEND=compiled but the extension is not built; "
                "reinstall without METLOOP_NO_EXT or unset the variable"
            )
        return compiled
    if requested:
        raise ValueError(f"unknown METLOOP_DIAG_BACKEND {requested!r}")
    return compiled if compiled is not None else _stencils_py


_impl = _select_backend()
BACKEND = _impl.NAME


def _as_3d(values: np.ndarray, axis: int):
    """View `values` as (before, n, after) with `axis` in the middle."""
    before = int(np.prod(values.shape[:axis], dtype=np.int64))
    after = int(np.prod(values.shape[axis + 1:], dtype=np.int64))
    return values.reshape(before, values.shape[axis], after)


def derivative(values: np.ndarray, coord: np.ndarray, axis: int) -> np.ndarray:
    """Finite-difference d(values)/d(coord) along `axis`.

    Second-order centered stencil in the interior, first-order one-sided at
    the two boundary planes; coord may be non-uniform but must be strictly
    monotone with at least 3 points.
    """
    values = np.ascontiguousarray(values, dtype=np.float64)
    coord = np.ascontiguousarray(coord, dtype=np.float64)
    axis = axis % values.ndim
    n = values.shape[axis]
    if coord.ndim != 1 or coord.shape[0] != n:
        raise ValueError("coordinate length does not match the derivative axis")
    if n < 3:
        raise ValueError("derivative needs at least 3 points along the axis")
    d = np.diff(coord)
    if not (np.all(d > 0) or np.all(d < 0)):
        raise ValueError("coordinate must be strictly monotone")
    out = np.empty_like(values)
    if axis == values.ndim - 1:
        flat = values.reshape(-1, n)
        _impl.diff_last(flat, coord, out.reshape(-1, n))
    else:
        _impl.diff_mid(_as_3d(values, axis), coord, _as_3d(out, axis))
    return out


def integrate_trapezoid(values: np.ndarray, coord: np.ndarray, axis: int) -> np.ndarray:
    """Trapezoidal integral of values over coord along `axis` (axis removed)."""
    values = np.ascontiguousarray(values, dtype=np.float64)
    coord = np.ascontiguousarray(coord, dtype=np.float64)
    axis = axis % values.ndim
    n = values.shape[axis]
    if coord.ndim != 1 or coord.shape[0] != n:
        raise ValueError("coordinate length does not match the integration axis")
    if n < 2:
        raise ValueError("integration needs at least 2 points along the axis")
    out_shape = values.shape[:axis] + values.shape[axis + 1:]
    out = np.empty(out_shape, dtype=np.float64)
    a3 = _as_3d(values, axis)
    _impl.trapz_mid(a3, coord, out.reshape(a3.shape[0], a3.shape[2]))
    return out
