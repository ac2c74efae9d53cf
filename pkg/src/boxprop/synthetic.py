"""Deterministic synthetic detection instances for tests and benchmarks.

Features are drawn from per-class Gaussians with a counter-based RNG
(Philox), in a fixed order: class by class, seeds before candidates, box by
box, dimension by dimension, then the box's confidence draw, then any label
scramble draws. Identical parameters and seed give bit-identical instances on
any platform.

Every generated box gets a ground-truth twin at the same position carrying
the generating class, so evaluation reduces to label agreement: a box is a
true positive iff its final label equals its generating class.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.spatial.distance import cdist

from .model import BoundingBox, DetectionRecord, FeatureStore, GroundTruthBox

BOX_SIZE = 10.0
BOX_SPACING = 20.0
CONFIDENCE_MARGIN = 0.05


@dataclass
class SyntheticInstance:
    records: list[DetectionRecord]
    features: FeatureStore
    ground_truth: list[GroundTruthBox]
    # box_id -> generating class
    oracle_labels: dict[str, str]


def generate_cluster_instance(
    num_classes: int,
    seeds_per_class: int,
    candidates_per_class: int,
    cluster_means: Sequence[Sequence[float]],
    cluster_stddev: float,
    hf_threshold: float = 0.5,
    label_scramble_rate: float = 0.0,
    rng_seed: int = 0,
    num_images: int = 1,
) -> SyntheticInstance:
    """Per-class Gaussian instance with seed and candidate boxes.

    Seed boxes draw confidence from [hf_threshold + 0.05, 1] and candidates
    from [0.05, hf_threshold], so strict thresholding at ``hf_threshold``
    reproduces the intended split. A ``label_scramble_rate`` fraction of
    candidates get their predicted class replaced by a different one.
    """
    means = np.asarray(cluster_means, dtype=np.float64)
    if means.shape[0] != num_classes:
        raise ValueError(f"need {num_classes} cluster means, got {means.shape[0]}")
    for i in range(num_classes):
        for j in range(i + 1, num_classes):
            if np.array_equal(means[i], means[j]):
                raise ValueError(f"cluster means {i} and {j} coincide")
    if cluster_stddev <= 0:
        raise ValueError("cluster stddev must be > 0")
    dim = means.shape[1]
    classes = [f"class{ci}" for ci in range(num_classes)]

    rng = np.random.default_rng(np.random.Philox(rng_seed))
    records: list[DetectionRecord] = []
    store = FeatureStore(dim)
    ground_truth: list[GroundTruthBox] = []
    oracle: dict[str, str] = {}
    slot_in_image = [0] * num_images
    box_counter = 0

    def emit(cls_idx: int, box_id: str, confidence: float, predicted: str) -> None:
        nonlocal box_counter
        image_idx = box_counter % num_images
        image_id = f"img{image_idx:03d}"
        slot = slot_in_image[image_idx]
        slot_in_image[image_idx] += 1
        box_counter += 1
        box = BoundingBox(u=slot * BOX_SPACING, v=0.0, w=BOX_SIZE, h=BOX_SIZE)
        feature_id = f"f-{box_id}"
        records.append(DetectionRecord(
            image_id=image_id, box_id=box_id, box=box,
            class_label=predicted, confidence=confidence, feature_id=feature_id,
        ))
        ground_truth.append(GroundTruthBox(
            image_id=image_id, box=box, class_label=classes[cls_idx],
        ))
        oracle[box_id] = classes[cls_idx]

    for ci in range(num_classes):
        for s in range(seeds_per_class):
            values = rng.normal(means[ci], cluster_stddev, size=dim)
            confidence = float(rng.uniform(min(hf_threshold + CONFIDENCE_MARGIN, 1.0), 1.0))
            box_id = f"c{ci}s{s:04d}"
            store.add(f"f-{box_id}", values.astype(np.float32))
            emit(ci, box_id, confidence, classes[ci])
        for p in range(candidates_per_class):
            values = rng.normal(means[ci], cluster_stddev, size=dim)
            confidence = float(rng.uniform(CONFIDENCE_MARGIN, hf_threshold))
            predicted = classes[ci]
            if label_scramble_rate > 0.0 and num_classes > 1:
                if rng.random() < label_scramble_rate:
                    others = [c for c in classes if c != predicted]
                    predicted = others[int(rng.integers(len(others)))]
            box_id = f"c{ci}p{p:04d}"
            store.add(f"f-{box_id}", values.astype(np.float32))
            emit(ci, box_id, confidence, predicted)

    return SyntheticInstance(records=records, features=store,
                             ground_truth=ground_truth, oracle_labels=oracle)


def line_means(num_classes: int, separation: float, dim: int) -> np.ndarray:
    """Cluster means spaced ``separation`` apart along the first axis."""
    means = np.zeros((num_classes, dim))
    means[:, 0] = np.arange(num_classes) * separation
    return means


def nearest_seed_oracle(
    seeds: Sequence[tuple[str, str, np.ndarray]],
    candidates: Sequence[tuple[str, np.ndarray]],
) -> dict[str, str]:
    """Brute-force baseline: each candidate takes the class of its nearest
    seed by Euclidean feature distance, ties to the smallest seed box_id."""
    if not seeds:
        raise ValueError("need at least one seed")
    ordered = sorted(seeds, key=lambda s: s[0])
    seed_mat = np.stack([vec for _, _, vec in ordered]).astype(np.float64)
    out: dict[str, str] = {}
    if not candidates:
        return out
    cand_mat = np.stack([vec for _, vec in candidates]).astype(np.float64)
    dists = cdist(cand_mat, seed_mat, metric="euclidean")
    nearest = dists.argmin(axis=1)
    for (box_id, _), idx in zip(candidates, nearest):
        out[box_id] = ordered[int(idx)][1]
    return out
