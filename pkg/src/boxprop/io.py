"""File formats: detection/ground-truth JSON, the binary feature container
(with a comma-separated text fallback), and refined-result / audit output.

Detections and ground truth are one JSON object per run::

    {"images": [{"image_id": ..., "boxes": [{"box_id", "u", "v", "w", "h",
                                             "class", "score", "feature_id"}]}]}

(ground truth omits ``score`` and ``feature_id``). Feature files start with
magic ``TSBF`` + version byte, then little-endian uint32 count and dimension,
then per record a uint16-length-prefixed UTF-8 feature_id and that many
float32 values. Files not starting with the magic are parsed as text: a
``n,d`` header line, then one ``feature_id,v1,...,vd`` line per vector.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .model import (
    BoundingBox,
    DetectionRecord,
    FeatureStore,
    FormatError,
    GroundTruthBox,
    LabeledPool,
    Provenance,
    ValidationError,
    validate_detection_set,
)

FEATURE_MAGIC = b"TSBF"
FEATURE_VERSION = 1


def dump_json(obj, path) -> None:
    """Canonical JSON writing so identical runs produce identical bytes."""
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, ensure_ascii=False)
        fh.write("\n")


def _require(mapping: dict, key: str, locus: str):
    if key not in mapping:
        raise FormatError(f"{locus}: missing field {key!r}")
    return mapping[key]


def _load_box_file(path) -> list[dict]:
    """Shared shell for detection and ground-truth files: returns a flat list
    of raw box dicts, each annotated with its image_id and locus string."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or not isinstance(doc.get("images"), list):
        raise FormatError(f"{path}: expected a top-level object with an 'images' list")
    out = []
    for i, image in enumerate(doc["images"]):
        locus = f"{path}: images[{i}]"
        if not isinstance(image, dict):
            raise FormatError(f"{locus}: expected an object")
        image_id = str(_require(image, "image_id", locus))
        boxes = _require(image, "boxes", locus)
        if not isinstance(boxes, list):
            raise FormatError(f"{locus}.boxes: expected a list")
        for j, raw in enumerate(boxes):
            if not isinstance(raw, dict):
                raise FormatError(f"{locus}.boxes[{j}]: expected an object")
            out.append({"image_id": image_id, "locus": f"{locus}.boxes[{j}]", "raw": raw})
    return out


def _parse_geometry(raw: dict, locus: str) -> BoundingBox:
    vals = {}
    for key in ("u", "v", "w", "h"):
        value = _require(raw, key, locus)
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise FormatError(f"{locus}: field {key!r} must be a number, got {value!r}")
        vals[key] = float(value)
    return BoundingBox(**vals)


def load_detections(path) -> list[DetectionRecord]:
    """Parse a detection file and validate it; raises on the first parse
    error or, after a clean parse, on any validation violation."""
    records = []
    for entry in _load_box_file(path):
        raw, locus = entry["raw"], entry["locus"]
        box = _parse_geometry(raw, locus)
        score = _require(raw, "score", locus)
        if not isinstance(score, (int, float)) or isinstance(score, bool):
            raise FormatError(f"{locus}: field 'score' must be a number, got {score!r}")
        records.append(DetectionRecord(
            image_id=entry["image_id"],
            box_id=str(_require(raw, "box_id", locus)),
            box=box,
            class_label=str(_require(raw, "class", locus)),
            confidence=float(score),
            feature_id=str(_require(raw, "feature_id", locus)),
        ))
    report = validate_detection_set(records)
    if not report.ok:
        raise ValidationError(report)
    return records


def load_ground_truth(path) -> list[GroundTruthBox]:
    out = []
    for entry in _load_box_file(path):
        raw, locus = entry["raw"], entry["locus"]
        box = _parse_geometry(raw, locus)
        if not box.is_valid():
            raise FormatError(f"{locus}: invalid box geometry "
                              f"(w={box.w!r}, h={box.h!r} must be finite and > 0)")
        out.append(GroundTruthBox(
            image_id=entry["image_id"],
            box=box,
            class_label=str(_require(raw, "class", locus)),
        ))
    return out


def write_detections(records: Sequence[DetectionRecord], path) -> None:
    images: dict[str, list] = {}
    for rec in records:
        images.setdefault(rec.image_id, []).append({
            "box_id": rec.box_id,
            "u": rec.box.u, "v": rec.box.v, "w": rec.box.w, "h": rec.box.h,
            "class": rec.class_label,
            "score": rec.confidence,
            "feature_id": rec.feature_id,
        })
    dump_json({"images": [{"image_id": iid, "boxes": boxes}
                          for iid, boxes in images.items()]}, path)


def write_ground_truth(gts: Sequence[GroundTruthBox], path) -> None:
    images: dict[str, list] = {}
    for gt in gts:
        images.setdefault(gt.image_id, []).append({
            "u": gt.box.u, "v": gt.box.v, "w": gt.box.w, "h": gt.box.h,
            "class": gt.class_label,
        })
    dump_json({"images": [{"image_id": iid, "boxes": boxes}
                          for iid, boxes in images.items()]}, path)


# --- feature store -----------------------------------------------------------


def write_features_binary(store: FeatureStore, path) -> None:
    with open(path, "wb") as fh:
        fh.write(FEATURE_MAGIC)
        fh.write(bytes([FEATURE_VERSION]))
        fh.write(struct.pack("<II", len(store), store.dim))
        for fid in store.ids():
            encoded = fid.encode("utf-8")
            if len(encoded) > 0xFFFF:
                raise ValueError(f"feature_id too long to serialize: {fid[:32]!r}...")
            fh.write(struct.pack("<H", len(encoded)))
            fh.write(encoded)
            fh.write(store.get(fid).astype("<f4").tobytes())


def write_features_text(store: FeatureStore, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{len(store)},{store.dim}\n")
        for fid in store.ids():
            values = ",".join(repr(float(x)) for x in store.get(fid))
            fh.write(f"{fid},{values}\n")


def _read_exact(fh, count: int, path, what: str) -> bytes:
    data = fh.read(count)
    if len(data) != count:
        raise FormatError(f"{path}: truncated while reading {what}")
    return data


def _load_features_binary(path) -> FeatureStore:
    with open(path, "rb") as fh:
        magic = _read_exact(fh, 4, path, "magic")
        assert magic == FEATURE_MAGIC
        version = _read_exact(fh, 1, path, "version byte")[0]
        if version != FEATURE_VERSION:
            raise FormatError(f"{path}: unsupported feature-file version {version}")
        n, dim = struct.unpack("<II", _read_exact(fh, 8, path, "header"))
        if dim < 1:
            raise FormatError(f"{path}: feature dimension must be >= 1, got {dim}")
        store = FeatureStore(dim)
        for i in range(n):
            (id_len,) = struct.unpack("<H", _read_exact(fh, 2, path, f"record {i} id length"))
            fid = _read_exact(fh, id_len, path, f"record {i} id").decode("utf-8")
            blob = _read_exact(fh, 4 * dim, path, f"record {i} values")
            values = np.frombuffer(blob, dtype="<f4")
            try:
                store.add(fid, values)
            except ValueError as exc:
                raise FormatError(f"{path}: record {i}: {exc}") from exc
        if fh.read(1):
            raise FormatError(f"{path}: trailing bytes after {n} declared records")
    return store


def _load_features_text(path) -> FeatureStore:
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    if not lines or not lines[0].strip():
        raise FormatError(f"{path}: missing 'n,d' header line")
    head = lines[0].split(",")
    if len(head) != 2:
        raise FormatError(f"{path}: header must be 'n,d', got {lines[0]!r}")
    try:
        n, dim = int(head[0]), int(head[1])
    except ValueError as exc:
        raise FormatError(f"{path}: header must be 'n,d', got {lines[0]!r}") from exc
    body = [ln for ln in lines[1:] if ln.strip()]
    if len(body) != n:
        raise FormatError(f"{path}: header declares {n} vectors, body has {len(body)}")
    store = FeatureStore(dim)
    for lineno, line in enumerate(body, start=2):
        parts = line.split(",")
        if len(parts) != dim + 1:
            raise FormatError(f"{path}:{lineno}: expected id plus {dim} values, "
                              f"got {len(parts) - 1}")
        try:
            values = np.array([float(x) for x in parts[1:]], dtype=np.float32)
        except ValueError as exc:
            raise FormatError(f"{path}:{lineno}: bad value: {exc}") from exc
        try:
            store.add(parts[0], values)
        except ValueError as exc:
            raise FormatError(f"{path}:{lineno}: {exc}") from exc
    return store


def load_features(path) -> FeatureStore:
    """Read a feature file, binary or text, sniffed by the magic bytes."""
    with open(path, "rb") as fh:
        head = fh.read(4)
    if head == FEATURE_MAGIC:
        return _load_features_binary(path)
    return _load_features_text(path)


# --- refined results and audit ------------------------------------------------


@dataclass(frozen=True)
class ResultRecord:
    """One box as written to a results file: original geometry and score plus
    the final label and its provenance."""

    image_id: str
    box_id: str
    box: BoundingBox
    final_class: str
    predicted_class: str
    confidence: float
    stage: str
    round_index: int
    matched_seed: str | None
    match_distance: float | None


def write_results(records: Sequence[DetectionRecord], pool: LabeledPool, path) -> None:
    """Write every input box with its final class and provenance.

    Requires a drained pool (no candidates left). Geometry and original
    scores are carried through so the file can be evaluated on its own.
    """
    if pool.candidates:
        raise ValueError(
            f"cannot write results while {len(pool.candidates)} candidates remain"
        )
    final: dict[str, tuple[str, Provenance]] = {}
    for cls, members in pool.confirmed.items():
        for box_id, prov in members.items():
            final[box_id] = (cls, prov)
    images: dict[str, list] = {}
    for rec in records:
        if rec.box_id not in final:
            raise ValueError(f"pool has no entry for box {rec.box_id!r}")
        cls, prov = final[rec.box_id]
        entry = {
            "box_id": rec.box_id,
            "u": rec.box.u, "v": rec.box.v, "w": rec.box.w, "h": rec.box.h,
            "class": cls,
            "predicted_class": rec.class_label,
            "score": rec.confidence,
            "stage": prov.stage,
            "round": prov.round_index,
        }
        if prov.matched_seed is not None:
            entry["matched_seed"] = prov.matched_seed
            entry["match_distance"] = prov.distance
        images.setdefault(rec.image_id, []).append(entry)
    dump_json({"images": [{"image_id": iid, "boxes": boxes}
                          for iid, boxes in images.items()]}, path)


def write_audit(audit, path) -> None:
    """Serialize a PropagationAudit: per-box entries plus the round trace."""
    boxes = []
    for box_id in sorted(audit.entries):
        e = audit.entries[box_id]
        entry = {
            "box_id": e.box_id,
            "class": e.final_class,
            "predicted_class": e.predicted_class,
            "stage": e.stage,
            "round": e.round_index,
        }
        if e.matched_seed is not None:
            entry["matched_seed"] = e.matched_seed
            entry["match_distance"] = e.distance
        boxes.append(entry)
    rounds = [
        {
            "round": r.round_index,
            "stage": r.stage,
            "candidates": r.num_candidates,
            "representatives": r.num_representatives,
            "accepted": r.accepted,
        }
        for r in audit.rounds
    ]
    dump_json({"rounds": rounds, "boxes": boxes}, path)


def read_audit(path):
    from .propagation import AuditEntry, PropagationAudit, RoundLog

    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or "boxes" not in doc:
        raise FormatError(f"{path}: expected an audit object with 'boxes'")
    audit = PropagationAudit()
    for i, raw in enumerate(doc["boxes"]):
        locus = f"{path}: boxes[{i}]"
        entry = AuditEntry(
            box_id=str(_require(raw, "box_id", locus)),
            final_class=str(_require(raw, "class", locus)),
            predicted_class=str(_require(raw, "predicted_class", locus)),
            stage=str(_require(raw, "stage", locus)),
            round_index=int(_require(raw, "round", locus)),
            matched_seed=raw.get("matched_seed"),
            distance=raw.get("match_distance"),
        )
        audit.entries[entry.box_id] = entry
    for raw in doc.get("rounds", []):
        audit.rounds.append(RoundLog(
            round_index=int(raw["round"]),
            stage=str(raw["stage"]),
            num_candidates=int(raw["candidates"]),
            num_representatives=int(raw["representatives"]),
            accepted=int(raw["accepted"]),
        ))
    return audit


def read_results(path) -> list[ResultRecord]:
    out = []
    for entry in _load_box_file(path):
        raw, locus = entry["raw"], entry["locus"]
        box = _parse_geometry(raw, locus)
        out.append(ResultRecord(
            image_id=entry["image_id"],
            box_id=str(_require(raw, "box_id", locus)),
            box=box,
            final_class=str(_require(raw, "class", locus)),
            predicted_class=str(_require(raw, "predicted_class", locus)),
            confidence=float(_require(raw, "score", locus)),
            stage=str(_require(raw, "stage", locus)),
            round_index=int(_require(raw, "round", locus)),
            matched_seed=raw.get("matched_seed"),
            match_distance=raw.get("match_distance"),
        ))
    return out
