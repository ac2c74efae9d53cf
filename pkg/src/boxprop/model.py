"""Domain types shared across the pipeline: boxes, detections, feature store,
the evolving label pool, and run configuration."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

# Synthetic class used when low-confidence boxes are routed to an opt-in
# reject pool (RunConfig.reject_below). Boxes ending up with this label are
# dropped from evaluation output.
REJECT_CLASS = "__reject__"


class DataError(Exception):
    """Malformed or invalid input data (exit code 2 at the CLI)."""


class FormatError(DataError):
    """A file could not be parsed under its declared format."""


class ConfigError(Exception):
    """Unusable run configuration (exit code 3 at the CLI)."""


class NotEnoughSeedsError(Exception):
    """Fewer than two seed vectors: no neighborhood scale can be computed."""


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned box in pixel coordinates: top-left corner plus size."""

    u: float
    v: float
    w: float
    h: float

    @property
    def area(self) -> float:
        return self.w * self.h

    @property
    def right(self) -> float:
        return self.u + self.w

    @property
    def bottom(self) -> float:
        return self.v + self.h

    def is_valid(self) -> bool:
        vals = (self.u, self.v, self.w, self.h)
        return all(math.isfinite(x) for x in vals) and self.w > 0 and self.h > 0


@dataclass(frozen=True)
class DetectionRecord:
    """One detector output box with its predicted class and confidence."""

    image_id: str
    box_id: str
    box: BoundingBox
    class_label: str
    confidence: float
    feature_id: str


@dataclass(frozen=True)
class GroundTruthBox:
    image_id: str
    box: BoundingBox
    class_label: str


class FeatureStore:
    """Maps feature_id to a fixed-dimension float32 vector.

    All vectors share one dimension; values are kept as float32 so that
    in-memory vectors are bit-identical to what the binary file format
    round-trips.
    """

    def __init__(self, dim: int):
        if dim < 1:
            raise ValueError(f"feature dimension must be >= 1, got {dim}")
        self.dim = int(dim)
        self._vectors: dict[str, np.ndarray] = {}

    def add(self, feature_id: str, values) -> None:
        vec = np.asarray(values, dtype=np.float32)
        if vec.ndim != 1 or vec.shape[0] != self.dim:
            raise ValueError(
                f"feature {feature_id!r}: expected {self.dim} values, got shape {vec.shape}"
            )
        if not np.all(np.isfinite(vec)):
            raise ValueError(f"feature {feature_id!r}: non-finite value")
        self._vectors[feature_id] = vec

    def get(self, feature_id: str) -> np.ndarray:
        return self._vectors[feature_id]

    def __contains__(self, feature_id: str) -> bool:
        return feature_id in self._vectors

    def __len__(self) -> int:
        return len(self._vectors)

    def ids(self) -> list[str]:
        return list(self._vectors)

    def matrix(self, feature_ids: Sequence[str]) -> np.ndarray:
        """Stack the given vectors into a float64 (n, dim) matrix."""
        if not feature_ids:
            return np.empty((0, self.dim), dtype=np.float64)
        return np.stack([self._vectors[fid] for fid in feature_ids]).astype(np.float64)

    def normalized(self) -> "FeatureStore":
        """Copy with every vector scaled to unit L2 norm (zero vectors kept)."""
        out = FeatureStore(self.dim)
        for fid, vec in self._vectors.items():
            norm = float(np.linalg.norm(vec.astype(np.float64)))
            if norm > 0.0:
                out.add(fid, (vec.astype(np.float64) / norm).astype(np.float32))
            else:
                out.add(fid, vec)
        return out


@dataclass(frozen=True)
class Provenance:
    """How a box obtained its final label: as a seed, or accepted in a
    constrained (stage1) or relaxed (stage2) matching round."""

    stage: str  # "seed" | "stage1" | "stage2"
    round_index: int  # 0 for seeds
    matched_seed: str | None = None
    distance: float | None = None


class LabeledPool:
    """Partition of all boxes into per-class confirmed sets plus the ordered
    candidate list awaiting labels.

    ``representatives`` is the per-class subset of confirmed boxes that serves
    as matching targets; it starts as the cluster medoids and grows with each
    accepted candidate. Confirmed sets only grow and candidates only shrink.
    """

    def __init__(
        self,
        confirmed: dict[str, dict[str, Provenance]],
        candidates: list[str],
        representatives: dict[str, list[str]],
    ):
        self.confirmed = confirmed
        self.candidates = candidates
        self.representatives = representatives

    def confirmed_ids(self) -> set[str]:
        out: set[str] = set()
        for members in self.confirmed.values():
            out.update(members)
        return out

    def class_of(self, box_id: str) -> str:
        for cls, members in self.confirmed.items():
            if box_id in members:
                return cls
        raise KeyError(box_id)

    def accept_batch(
        self, accepted: Sequence[tuple[str, str, str, float]], stage: str, round_index: int
    ) -> None:
        """Move accepted candidates into their confirmed class.

        ``accepted`` holds (candidate box_id, class, matched seed box_id,
        match distance) tuples. The accepted boxes are appended to their
        class's representative list in the given order.
        """
        if not accepted:
            return
        taken = set()
        for box_id, cls, seed_id, dist in accepted:
            if box_id not in self.candidates or box_id in taken:
                raise ValueError(f"{box_id!r} is not an open candidate")
            prov = Provenance(stage, round_index, seed_id, float(dist))
            self.confirmed.setdefault(cls, {})[box_id] = prov
            self.representatives.setdefault(cls, []).append(box_id)
            taken.add(box_id)
        self.candidates = [b for b in self.candidates if b not in taken]

    def check_partition(self, all_ids: Iterable[str]) -> None:
        """Raise AssertionError unless confirmed sets and candidates are
        pairwise disjoint and together cover exactly ``all_ids``."""
        seen: set[str] = set()
        for cls, members in self.confirmed.items():
            for box_id in members:
                assert box_id not in seen, f"{box_id!r} confirmed twice"
                seen.add(box_id)
        for box_id in self.candidates:
            assert box_id not in seen, f"{box_id!r} both confirmed and candidate"
            seen.add(box_id)
        expected = set(all_ids)
        assert seen == expected, (
            f"pool covers {len(seen)} ids, expected {len(expected)}"
        )
        for cls, reps in self.representatives.items():
            members = self.confirmed.get(cls, {})
            for box_id in reps:
                assert box_id in members, f"representative {box_id!r} not confirmed"


@dataclass(frozen=True)
class ClassConstraints:
    """Per-class acceptance radius for constrained (stage-1) propagation:
    the mean nearest-neighbor feature distance among that class's seeds."""

    distance_cap: Mapping[str, float]

    def cap(self, cls: str) -> float:
        return self.distance_cap[cls]


@dataclass
class RunConfig:
    """Knobs for one propagation run."""

    hf_thresholds: dict[str, float] = field(default_factory=dict)
    hf_threshold_default: float | None = 0.5
    k: int = 25
    rng_seed: int = 0
    feature_normalize: bool = False
    iou_threshold: float = 0.5
    reject_below: float | None = None

    def threshold_for(self, cls: str) -> float:
        if cls in self.hf_thresholds:
            return self.hf_thresholds[cls]
        if self.hf_threshold_default is not None:
            return self.hf_threshold_default
        raise ConfigError(f"no confidence threshold configured for class {cls!r}")


@dataclass(frozen=True)
class Violation:
    kind: str
    message: str
    box_id: str | None = None


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, kind: str, message: str, box_id: str | None = None) -> None:
        self.violations.append(Violation(kind, message, box_id))

    def format(self) -> str:
        if self.ok:
            return "ok"
        return "\n".join(f"[{v.kind}] {v.message}" for v in self.violations)


class ValidationError(DataError):
    """Raised by loaders when a detection set fails validation."""

    def __init__(self, report: ValidationReport):
        self.report = report
        super().__init__(report.format())


def validate_detection_set(
    records: Sequence[DetectionRecord], features: FeatureStore | None = None
) -> ValidationReport:
    """Collect every invariant violation in a detection set.

    Returns a report rather than raising, so callers can surface all problems
    at once. Feature resolution and dimension checks run only when a store is
    supplied.
    """
    report = ValidationReport()
    seen: set[str] = set()
    for rec in records:
        if rec.box_id in seen:
            report.add("duplicate_box_id", f"box_id {rec.box_id!r} appears more than once",
                       rec.box_id)
        seen.add(rec.box_id)
        if not math.isfinite(rec.confidence) or not (0.0 <= rec.confidence <= 1.0):
            report.add("confidence_range",
                       f"box {rec.box_id!r}: confidence {rec.confidence!r} outside [0, 1]",
                       rec.box_id)
        vals = (rec.box.u, rec.box.v, rec.box.w, rec.box.h)
        if not all(math.isfinite(x) for x in vals):
            report.add("nonfinite", f"box {rec.box_id!r}: non-finite coordinate", rec.box_id)
        elif rec.box.w <= 0 or rec.box.h <= 0:
            report.add("nonpositive_size",
                       f"box {rec.box_id!r}: width/height must be > 0, got "
                       f"w={rec.box.w!r} h={rec.box.h!r}", rec.box_id)
        if features is not None and rec.feature_id not in features:
            report.add("missing_feature",
                       f"box {rec.box_id!r}: feature {rec.feature_id!r} not in store",
                       rec.box_id)
    return report
