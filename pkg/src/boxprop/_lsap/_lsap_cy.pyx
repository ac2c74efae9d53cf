# cython: boundscheck=False, wraparound=False, initializedcheck=False, cdivision=True
"""Compiled shortest-augmenting-path kernel for rectangular min-cost
assignment. Hot loop of the propagation pipeline; semantics identical to the
pure NumPy twin in ``_lsap_py``."""

import numpy as np

cimport numpy as cnp

cnp.import_array()

INF = float("inf")


def solve_lsap_kernel(cnp.ndarray[cnp.float64_t, ndim=2] cost_arr):
    """Minimum-cost one-to-one assignment for a matrix with rows <= cols.

    Returns ``col4row`` where ``col4row[i]`` is the column matched to row
    ``i``. Rows are processed in ascending order; ties resolve to the lowest
    column index.
    """
    cdef Py_ssize_t nr = cost_arr.shape[0]
    cdef Py_ssize_t nc = cost_arr.shape[1]
    if nr > nc:
        raise ValueError("kernel requires rows <= cols; transpose first")

    cdef double[:, ::1] cost = np.ascontiguousarray(cost_arr)

    u_arr = np.zeros(nr, dtype=np.float64)
    v_arr = np.zeros(nc, dtype=np.float64)
    shortest_arr = np.empty(nc, dtype=np.float64)
    path_arr = np.empty(nc, dtype=np.intp)
    sr_arr = np.empty(nr, dtype=np.uint8)
    sc_arr = np.empty(nc, dtype=np.uint8)
    col4row_arr = np.full(nr, -1, dtype=np.intp)
    row4col_arr = np.full(nc, -1, dtype=np.intp)

    cdef double[::1] u = u_arr
    cdef double[::1] v = v_arr
    cdef double[::1] shortest = shortest_arr
    cdef cnp.intp_t[::1] path = path_arr
    cdef cnp.uint8_t[::1] scanned_rows = sr_arr
    cdef cnp.uint8_t[::1] scanned_cols = sc_arr
    cdef cnp.intp_t[::1] col4row = col4row_arr
    cdef cnp.intp_t[::1] row4col = row4col_arr

    cdef Py_ssize_t cur_row, i, j, jmin, sink, tmp
    cdef double min_val, reduced, best
    cdef double inf = INF

    for cur_row in range(nr):
        for j in range(nc):
            shortest[j] = inf
            path[j] = -1
            scanned_cols[j] = 0
        for i in range(nr):
            scanned_rows[i] = 0

        min_val = 0.0
        i = cur_row
        sink = -1
        while sink == -1:
            scanned_rows[i] = 1
            for j in range(nc):
                if scanned_cols[j]:
                    continue
                reduced = ((min_val + cost[i, j]) - u[i]) - v[j]
                if reduced < shortest[j]:
                    shortest[j] = reduced
                    path[j] = i

            jmin = -1
            best = inf
            for j in range(nc):
                if scanned_cols[j]:
                    continue
                if shortest[j] < best:
                    best = shortest[j]
                    jmin = j
            if jmin == -1 or best == inf:
                raise ValueError("cost matrix is infeasible")
            min_val = best
            scanned_cols[jmin] = 1
            if row4col[jmin] == -1:
                sink = jmin
            else:
                i = row4col[jmin]

        u[cur_row] = u[cur_row] + min_val
        for i in range(nr):
            if scanned_rows[i] and i != cur_row:
                u[i] = u[i] + (min_val - shortest[col4row[i]])
        for j in range(nc):
            if scanned_cols[j]:
                v[j] = v[j] - (min_val - shortest[j])

        j = sink
        while True:
            i = path[j]
            row4col[j] = i
            tmp = col4row[i]
            col4row[i] = j
            j = tmp
            if i == cur_row:
                break

    return col4row_arr
