"""Cost-matrix construction and exact min-cost one-to-one matching between
candidate and confirmed boxes.

The matching minimizes the total feature distance over binary flows subject
to: each candidate matched at most once, each confirmed box matched at most
once, and exactly ``min(candidates, confirmed)`` matches in total.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.spatial.distance import cdist

from . import _lsap


@dataclass
class CostMatrix:
    """Pairwise feature distances: rows are candidates, columns confirmed."""

    cost: np.ndarray  # (a, m) float64, finite, >= 0
    row_ids: list[str]
    col_ids: list[str]
    col_classes: list[str]

    @property
    def shape(self) -> tuple[int, int]:
        return self.cost.shape


@dataclass
class MatchFlow:
    """A binary matching: (row, col) index pairs plus their summed cost."""

    pairs: list[tuple[int, int]]
    total_cost: float


def build_cost_matrix(
    candidates: Sequence[tuple[str, np.ndarray]],
    confirmed: Sequence[tuple[str, str, np.ndarray]],
) -> CostMatrix:
    """Euclidean feature distances between every candidate and confirmed box.

    ``candidates`` holds (box_id, vector); ``confirmed`` holds
    (box_id, class, vector). Raises ValueError on an empty side or a
    dimension mismatch.
    """
    if not candidates:
        raise ValueError("no candidate boxes to match")
    if not confirmed:
        raise ValueError("no confirmed boxes to match against")
    cand = np.stack([vec for _, vec in candidates]).astype(np.float64)
    conf = np.stack([vec for _, _, vec in confirmed]).astype(np.float64)
    if cand.shape[1] != conf.shape[1]:
        raise ValueError(
            f"feature dimension mismatch: candidates {cand.shape[1]}, "
            f"confirmed {conf.shape[1]}"
        )
    cost = cdist(cand, conf, metric="euclidean")
    return CostMatrix(
        cost=cost,
        row_ids=[bid for bid, _ in candidates],
        col_ids=[bid for bid, _, _ in confirmed],
        col_classes=[cls for _, cls, _ in confirmed],
    )


def solve_matching(costs: CostMatrix, backend: str | None = None) -> MatchFlow:
    """Exact minimum-cost matching of cardinality min(rows, cols).

    Deterministic for a given matrix: rows are processed in ascending order
    with ascending-index column scans, so equal-cost optima resolve the same
    way on every run.
    """
    rows, cols = _lsap.linear_assignment(costs.cost, backend=backend)
    total = float(costs.cost[rows, cols].sum())
    return MatchFlow(pairs=list(zip(rows.tolist(), cols.tolist())), total_cost=total)
