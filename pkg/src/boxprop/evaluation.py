"""IoU-based matching against ground truth, precision/recall/F-score, and
per-stage error rates.

Matching protocol (an artifact convention, pinned for reproducibility):
per image, predictions in descending confidence order each claim the
unclaimed same-class ground-truth box with the highest IoU at or above the
threshold; one-to-one, class-strict. Unmatched predictions count as false
positives, unmatched ground truth as false negatives.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .model import BoundingBox, GroundTruthBox
from .propagation import PropagationAudit, STAGE_CONSTRAINED, STAGE_RELAXED


def iou(b1: BoundingBox, b2: BoundingBox) -> float:
    """Intersection-over-union of two axis-aligned boxes, in [0, 1]."""
    iw = min(b1.right, b2.right) - max(b1.u, b2.u)
    ih = min(b1.bottom, b2.bottom) - max(b1.v, b2.v)
    if iw <= 0.0 or ih <= 0.0:
        return 0.0
    inter = iw * ih
    union = b1.area + b2.area - inter
    return inter / union


@dataclass
class MatchResult:
    tp: int
    fp: int
    fn: int
    # box_id -> "tp" | "fp"
    verdicts: dict[str, str]
    per_class: dict[str, dict[str, int]] = field(default_factory=dict)


def match_to_ground_truth(
    preds: Sequence[tuple], gts: Sequence[GroundTruthBox], iou_threshold: float = 0.5
) -> MatchResult:
    """Greedy one-to-one matching of predictions to ground truth per image.

    ``preds`` holds (record, final_class) pairs where record carries
    image_id, box_id, box, and confidence. Ordering within an image is by
    descending confidence, ties by ascending box_id.
    """
    gts_by_image: dict[str, list[tuple[int, GroundTruthBox]]] = {}
    for idx, gt in enumerate(gts):
        gts_by_image.setdefault(gt.image_id, []).append((idx, gt))
    preds_by_image: dict[str, list[tuple]] = {}
    for rec, final_class in preds:
        preds_by_image.setdefault(rec.image_id, []).append((rec, final_class))

    def _counts(cls: str) -> dict[str, int]:
        return per_class.setdefault(cls, {"tp": 0, "fp": 0, "fn": 0})

    tp = fp = 0
    verdicts: dict[str, str] = {}
    per_class: dict[str, dict[str, int]] = {}
    claimed: set[int] = set()
    for image_id, image_preds in preds_by_image.items():
        image_preds.sort(key=lambda p: (-p[0].confidence, p[0].box_id))
        image_gts = gts_by_image.get(image_id, [])
        for rec, final_class in image_preds:
            best_idx = None
            best_iou = 0.0
            for gt_idx, gt in image_gts:
                if gt_idx in claimed or gt.class_label != final_class:
                    continue
                overlap = iou(rec.box, gt.box)
                if overlap >= iou_threshold and overlap > best_iou:
                    best_iou = overlap
                    best_idx = gt_idx
            if best_idx is not None:
                claimed.add(best_idx)
                tp += 1
                verdicts[rec.box_id] = "tp"
                _counts(final_class)["tp"] += 1
            else:
                fp += 1
                verdicts[rec.box_id] = "fp"
                _counts(final_class)["fp"] += 1

    fn = 0
    for gt_idx, gt in enumerate(gts):
        if gt_idx not in claimed:
            fn += 1
            _counts(gt.class_label)["fn"] += 1
    return MatchResult(tp=tp, fp=fp, fn=fn, verdicts=verdicts, per_class=per_class)


def precision_recall_f(tp: int, fp: int, fn: int) -> tuple[float, float, float]:
    if min(tp, fp, fn) < 0:
        raise ValueError("counts must be non-negative")
    if tp + fp + fn == 0:
        raise ValueError("all counts are zero; nothing was predicted or annotated")
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    if precision + recall == 0.0:
        return precision, recall, 0.0
    return precision, recall, 2.0 * precision * recall / (precision + recall)


def f_score(tp: int, fp: int, fn: int) -> float:
    return precision_recall_f(tp, fp, fn)[2]


def stage_error_rates(
    audit: PropagationAudit, verdicts: Mapping[str, str]
) -> dict[str, float | None]:
    """Percentage of each propagation stage's boxes that evaluated as errors.

    A stage with no evaluated boxes reports None ("no data"), never 0.
    """
    out: dict[str, float | None] = {}
    for stage in (STAGE_CONSTRAINED, STAGE_RELAXED):
        entries = [e for e in audit.by_stage(stage) if e.box_id in verdicts]
        if not entries:
            out[stage] = None
            continue
        errors = sum(1 for e in entries if verdicts[e.box_id] != "tp")
        out[stage] = 100.0 * errors / len(entries)
    return out


def metrics_report(
    result: MatchResult, stage_errors: Mapping[str, float | None] | None = None
) -> str:
    """Human-readable metrics block: overall and per-class counts plus
    optional per-stage error lines."""
    precision, recall, f = precision_recall_f(result.tp, result.fp, result.fn)
    lines = [
        f"tp={result.tp} fp={result.fp} fn={result.fn}",
        f"precision={100.0 * precision:.2f}%",
        f"recall={100.0 * recall:.2f}%",
        f"f_score={100.0 * f:.2f}%",
    ]
    for cls in sorted(result.per_class):
        counts = result.per_class[cls]
        cp, cr, cf = (0.0, 0.0, 0.0)
        if counts["tp"] + counts["fp"] + counts["fn"] > 0:
            cp, cr, cf = precision_recall_f(counts["tp"], counts["fp"], counts["fn"])
        lines.append(
            f"class {cls}: tp={counts['tp']} fp={counts['fp']} fn={counts['fn']} "
            f"P={100.0 * cp:.2f}% R={100.0 * cr:.2f}% F={100.0 * cf:.2f}%"
        )
    if stage_errors is not None:
        for stage in (STAGE_CONSTRAINED, STAGE_RELAXED):
            rate = stage_errors.get(stage)
            shown = "no data" if rate is None else f"{rate:.2f}%"
            lines.append(f"{stage} error rate: {shown}")
    return "\n".join(lines)
