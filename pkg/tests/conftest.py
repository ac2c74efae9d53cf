"""Shared test helpers.

The assignment oracle here is intentionally independent of the library: it
enumerates every injective assignment directly, so solver tests compare
against first principles rather than against the code under test.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from boxprop import BoundingBox, DetectionRecord, FeatureStore


def brute_force_assignment(cost) -> tuple[float, set[tuple[int, int]]]:
    """Minimum-cost injective assignment of cardinality min(rows, cols), by
    exhaustive enumeration. Returns (best total cost, one optimal pair set).

    Only usable for small matrices; it exists as an oracle, not a solver.
    """
    cost = np.asarray(cost, dtype=np.float64)
    nr, nc = cost.shape
    best_total = math.inf
    best_pairs: set[tuple[int, int]] = set()
    if nr <= nc:
        for cols in itertools.permutations(range(nc), nr):
            total = sum(cost[i, j] for i, j in enumerate(cols))
            if total < best_total:
                best_total = total
                best_pairs = set(enumerate(cols))
    else:
        for rows in itertools.permutations(range(nr), nc):
            total = sum(cost[i, j] for j, i in enumerate(rows))
            if total < best_total:
                best_total = total
                best_pairs = {(i, j) for j, i in enumerate(rows)}
    return best_total, best_pairs


def make_record(
    box_id: str,
    cls: str = "c1",
    confidence: float = 0.9,
    image_id: str = "img0",
    u: float = 0.0,
    v: float = 0.0,
    w: float = 10.0,
    h: float = 10.0,
    feature_id: str | None = None,
) -> DetectionRecord:
    return DetectionRecord(
        image_id=image_id,
        box_id=box_id,
        box=BoundingBox(u, v, w, h),
        class_label=cls,
        confidence=confidence,
        feature_id=feature_id if feature_id is not None else box_id,
    )


def store_from(vectors: dict[str, list[float]]) -> FeatureStore:
    dim = len(next(iter(vectors.values())))
    store = FeatureStore(dim)
    for fid, values in vectors.items():
        store.add(fid, values)
    return store
