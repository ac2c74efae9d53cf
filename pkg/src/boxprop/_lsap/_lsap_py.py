"""Pure NumPy shortest-augmenting-path kernel for rectangular min-cost
assignment. Fallback twin of the compiled kernel in ``_lsap_cy``; both follow
the identical operation order so results match bit for bit."""

import numpy as np


def solve_lsap_kernel(cost: np.ndarray) -> np.ndarray:
    """Minimum-cost one-to-one assignment for a matrix with rows <= cols.

    Returns ``col4row`` where ``col4row[i]`` is the column matched to row
    ``i``. Rows are processed in ascending order; ties resolve to the lowest
    column index, so output is deterministic for a given input.
    """
    nr, nc = cost.shape
    if nr > nc:
        raise ValueError("kernel requires rows <= cols; transpose first")

    u = np.zeros(nr)
    v = np.zeros(nc)
    col4row = np.full(nr, -1, dtype=np.intp)
    row4col = np.full(nc, -1, dtype=np.intp)

    for cur_row in range(nr):
        shortest = np.full(nc, np.inf)
        path = np.full(nc, -1, dtype=np.intp)
        scanned_rows = np.zeros(nr, dtype=bool)
        scanned_cols = np.zeros(nc, dtype=bool)
        min_val = 0.0
        i = cur_row
        sink = -1
        while sink == -1:
            scanned_rows[i] = True
            reduced = ((min_val + cost[i]) - u[i]) - v
            better = (~scanned_cols) & (reduced < shortest)
            shortest[better] = reduced[better]
            path[better] = i
            masked = np.where(scanned_cols, np.inf, shortest)
            j = int(masked.argmin())
            min_val = float(masked[j])
            if not np.isfinite(min_val):
                raise ValueError("cost matrix is infeasible")
            scanned_cols[j] = True
            if row4col[j] == -1:
                sink = j
            else:
                i = int(row4col[j])

        u[cur_row] += min_val
        others = scanned_rows.copy()
        others[cur_row] = False
        idx = np.nonzero(others)[0]
        u[idx] += min_val - shortest[col4row[idx]]
        v[scanned_cols] -= min_val - shortest[scanned_cols]

        j = sink
        while True:
            i = int(path[j])
            row4col[j] = i
            col4row[i], j = j, col4row[i]
            if i == cur_row:
                break

    return col4row
