"""Backend selection for the rectangular min-cost assignment kernel.

The compiled Cython kernel is preferred; the pure NumPy twin is used when the
extension is unavailable or when ``BOXPROP_PURE_PYTHON`` is set in the
environment. Both produce identical matchings.
"""

import os

import numpy as np

from . import _lsap_py

try:
    from . import _lsap_cy
except ImportError:  # extension not built on this install
    _lsap_cy = None

if _lsap_cy is not None and not os.environ.get("BOXPROP_PURE_PYTHON"):
    _default_kernel = _lsap_cy.solve_lsap_kernel
    BACKEND = "cython"
else:
    _default_kernel = _lsap_py.solve_lsap_kernel
    BACKEND = "python"


def available_backends() -> list[str]:
    out = ["python"]
    if _lsap_cy is not None:
        out.insert(0, "cython")
    return out


def _kernel_for(backend):
    if backend is None:
        return _default_kernel
    if backend == "python":
        return _lsap_py.solve_lsap_kernel
    if backend == "cython":
        if _lsap_cy is None:
            raise RuntimeError("compiled assignment kernel is not available")
        return _lsap_cy.solve_lsap_kernel
    raise ValueError(f"unknown assignment backend {backend!r}")


def linear_assignment(cost, backend: str | None = None):
    """Solve min-cost one-to-one assignment on an arbitrary rectangular
    matrix of finite costs.

    Returns ``(row_ind, col_ind)`` with rows ascending; the matching has
    cardinality ``min(rows, cols)``.
    """
    kernel = _kernel_for(backend)
    cost = np.ascontiguousarray(cost, dtype=np.float64)
    if cost.ndim != 2:
        raise ValueError(f"expected a 2-D cost matrix, got shape {cost.shape}")
    nr, nc = cost.shape
    if nr == 0 or nc == 0:
        raise ValueError("cost matrix must have at least one row and column")
    if not np.all(np.isfinite(cost)):
        raise ValueError("cost matrix contains non-finite entries")

    if nr <= nc:
        col4row = kernel(cost)
        rows = np.arange(nr, dtype=np.intp)
        return rows, np.asarray(col4row, dtype=np.intp)
    row4col = kernel(np.ascontiguousarray(cost.T))
    row4col = np.asarray(row4col, dtype=np.intp)
    order = np.argsort(row4col, kind="stable")
    return row4col[order], np.arange(nc, dtype=np.intp)[order]
