"""High-confidence seed selection and per-class acceptance radii."""

from __future__ import annotations

from typing import Mapping, Sequence

import numpy as np
from scipy.spatial.distance import cdist

from .model import (
    ClassConstraints,
    ConfigError,
    DetectionRecord,
    FeatureStore,
    NotEnoughSeedsError,
)


def select_high_confidence(
    records: Sequence[DetectionRecord],
    thresholds: Mapping[str, float],
    default: float | None = None,
) -> tuple[dict[str, list[str]], list[str]]:
    """Split detections into per-class seed lists and the candidate list.

    A box seeds its class iff its confidence strictly exceeds that class's
    threshold; everything else becomes a candidate. Input order is preserved
    on both sides, and the two sides partition the input exactly.
    """
    hf: dict[str, list[str]] = {}
    candidates: list[str] = []
    for rec in records:
        cls = rec.class_label
        if cls in thresholds:
            thr = thresholds[cls]
        elif default is not None:
            thr = default
        else:
            raise ConfigError(f"no confidence threshold configured for class {cls!r}")
        if rec.confidence > thr:
            hf.setdefault(cls, []).append(rec.box_id)
        else:
            candidates.append(rec.box_id)
    return hf, candidates


def compute_distance_cap(features: np.ndarray) -> float:
    """Mean nearest-neighbor Euclidean distance among one class's seeds.

    ``features`` is an (n, d) matrix with n >= 2. For each seed the distance
    to its closest other seed is found; the cap is the average of those.
    """
    feats = np.asarray(features, dtype=np.float64)
    if feats.ndim != 2 or feats.shape[0] < 2:
        raise NotEnoughSeedsError(
            f"need at least 2 seed vectors to derive a distance cap, got "
            f"{feats.shape[0] if feats.ndim == 2 else 'malformed input'}"
        )
    dists = cdist(feats, feats, metric="euclidean")
    np.fill_diagonal(dists, np.inf)
    return float(dists.min(axis=1).mean())


def distance_caps_for(
    hf: Mapping[str, Sequence[str]],
    features: Mapping[str, np.ndarray] | FeatureStore,
    feature_of: Mapping[str, str] | None = None,
) -> ClassConstraints:
    """Acceptance radius per class with seeds.

    Classes with fewer than 2 seeds get a cap of 0.0, so constrained rounds
    never accept into them; an undefined neighborhood scale must not
    authorize early acceptances.
    """
    caps: dict[str, float] = {}
    for cls, box_ids in hf.items():
        keys = [feature_of[b] for b in box_ids] if feature_of is not None else list(box_ids)
        if isinstance(features, FeatureStore):
            mat = features.matrix(keys)
        else:
            mat = np.stack([features[k] for k in keys]).astype(np.float64) if keys else \
                np.empty((0, 1))
        try:
            caps[cls] = compute_distance_cap(mat)
        except NotEnoughSeedsError:
            caps[cls] = 0.0
    return ClassConstraints(distance_cap=caps)
