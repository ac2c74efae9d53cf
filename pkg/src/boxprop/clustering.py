"""Deterministic k-means over seed features and medoid-based representative
selection.

Lloyd iterations with k-means++ initialization, all driven by a seeded
counter-based RNG so identical inputs give identical clusterings on any
platform. Representatives entering the matching pool are medoids (actual
boxes nearest their centroid), never synthetic centroid vectors.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.spatial.distance import cdist

CENTROID_SHIFT_TOL = 1e-6  # squared Euclidean
MAX_ITER = 100


@dataclass
class ClusteringResult:
    centroids: np.ndarray  # (k, d)
    assignment: dict[str, int]
    inertia: float
    # inertia after each assignment step; non-increasing by construction
    inertia_history: list[float] = field(default_factory=list)


def _kmeans_pp_init(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """k-means++ seeding: first center uniform, the rest weighted by squared
    distance to the nearest chosen center. Zero total weight (duplicate
    points) falls back to the lowest unchosen index."""
    n = points.shape[0]
    chosen = [int(rng.integers(n))]
    d2 = ((points - points[chosen[0]]) ** 2).sum(axis=1)
    for _ in range(1, k):
        total = float(d2.sum())
        if total > 0.0:
            target = float(rng.random()) * total
            idx = int(np.searchsorted(np.cumsum(d2), target, side="right"))
            idx = min(idx, n - 1)
        else:
            taken = set(chosen)
            idx = next(i for i in range(n) if i not in taken)
        chosen.append(idx)
        d2 = np.minimum(d2, ((points - points[idx]) ** 2).sum(axis=1))
    return points[chosen].copy()


def _assign(points: np.ndarray, centroids: np.ndarray) -> tuple[np.ndarray, float]:
    d2 = cdist(points, centroids, metric="sqeuclidean")
    labels = d2.argmin(axis=1)
    inertia = float(d2[np.arange(points.shape[0]), labels].sum())
    return labels, inertia


def _repair_empty(labels: np.ndarray, d2_to_own: np.ndarray, k: int) -> np.ndarray:
    """Fill empty clusters by stealing the globally worst-fit point from any
    cluster that can spare one (>= 2 members)."""
    labels = labels.copy()
    counts = np.bincount(labels, minlength=k)
    for j in range(k):
        while counts[j] == 0:
            eligible = counts[labels] >= 2
            if not eligible.any():
                break
            scores = np.where(eligible, d2_to_own, -np.inf)
            p = int(scores.argmax())
            counts[labels[p]] -= 1
            labels[p] = j
            counts[j] += 1
    return labels


def kmeans_fit(
    items: Sequence[tuple[str, np.ndarray]], k: int, rng_seed: int
) -> ClusteringResult:
    """Cluster (box_id, vector) pairs into k groups.

    Runs Lloyd iterations until the largest squared centroid shift drops
    below tolerance or the iteration cap is reached. Deterministic given
    ``rng_seed``.
    """
    if not items:
        raise ValueError("cannot cluster an empty input")
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    ids = [bid for bid, _ in items]
    points = np.stack([vec for _, vec in items]).astype(np.float64)
    n = points.shape[0]

    rng = np.random.default_rng(np.random.Philox(rng_seed))
    centroids = _kmeans_pp_init(points, min(k, n), rng)
    if k > n:
        # more clusters than points: the extras stay where the chosen points
        # are and simply end up empty
        centroids = np.concatenate([centroids, points[[0] * (k - n)]])

    def _assign_with_repair(cents: np.ndarray) -> tuple[np.ndarray, float]:
        labels, _ = _assign(points, cents)
        d2_to_own = ((points - cents[labels]) ** 2).sum(axis=1)
        labels = _repair_empty(labels, d2_to_own, k)
        inertia = float(((points - cents[labels]) ** 2).sum())
        return labels, inertia

    history: list[float] = []
    for _ in range(MAX_ITER):
        labels, inertia = _assign_with_repair(centroids)
        history.append(inertia)
        new_centroids = centroids.copy()
        for c in range(k):
            members = labels == c
            if members.any():
                new_centroids[c] = points[members].mean(axis=0)
        shift = float(((new_centroids - centroids) ** 2).sum(axis=1).max())
        centroids = new_centroids
        if shift < CENTROID_SHIFT_TOL:
            break

    labels, inertia = _assign_with_repair(centroids)
    history.append(inertia)
    return ClusteringResult(
        centroids=centroids,
        assignment={bid: int(lbl) for bid, lbl in zip(ids, labels)},
        inertia=inertia,
        inertia_history=history,
    )


def select_representatives(
    hf_boxes: Sequence[tuple[str, np.ndarray]], k: int, rng_seed: int
) -> list[str]:
    """Pick up to k representative box_ids from one class's seeds.

    With k or fewer seeds, all of them are returned in input order.
    Otherwise the seeds are clustered and each nonempty cluster contributes
    its medoid (member nearest the centroid, ties to the smallest box_id).
    """
    if not hf_boxes:
        raise ValueError("no seed boxes to select representatives from")
    if len(hf_boxes) <= k:
        return [bid for bid, _ in hf_boxes]

    result = kmeans_fit(hf_boxes, k, rng_seed)
    vec_of = {bid: np.asarray(vec, dtype=np.float64) for bid, vec in hf_boxes}
    reps: list[str] = []
    for c in range(k):
        members = [bid for bid, _ in hf_boxes if result.assignment[bid] == c]
        if not members:
            continue
        centroid = result.centroids[c]
        reps.append(min(
            members,
            key=lambda bid: (float(((vec_of[bid] - centroid) ** 2).sum()), bid),
        ))
    return reps
