"""Multi-round propagation of labels from confirmed boxes to candidates.

Each round solves one exact min-cost matching between all open candidates and
all representatives (jointly across classes). Constrained rounds (stage 1)
accept a matched candidate only when its match distance falls strictly below
the matched class's distance cap; once a constrained round accepts nothing,
the run switches permanently to relaxed rounds (stage 2) that accept every
matched pair. The loop ends when no candidates remain.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .assignment import build_cost_matrix, solve_matching
from .clustering import select_representatives
from .model import (
    REJECT_CLASS,
    ClassConstraints,
    ConfigError,
    DetectionRecord,
    FeatureStore,
    LabeledPool,
    Provenance,
    RunConfig,
)
from .seeding import distance_caps_for, select_high_confidence

STAGE_SEED = "seed"
STAGE_CONSTRAINED = "stage1"
STAGE_RELAXED = "stage2"


@dataclass(frozen=True)
class AuditEntry:
    box_id: str
    final_class: str
    predicted_class: str
    stage: str
    round_index: int
    matched_seed: str | None = None
    distance: float | None = None


@dataclass(frozen=True)
class RoundLog:
    round_index: int
    stage: str
    num_candidates: int
    num_representatives: int
    accepted: int


@dataclass
class PropagationAudit:
    """Per-box record of how each final label came about, plus the per-round
    progress trace."""

    entries: dict[str, AuditEntry] = field(default_factory=dict)
    rounds: list[RoundLog] = field(default_factory=list)

    def by_stage(self, stage: str) -> list[AuditEntry]:
        return [e for e in self.entries.values() if e.stage == stage]


def _representative_columns(pool: LabeledPool) -> tuple[list[str], list[str]]:
    """Flatten representatives into matching columns: classes in ascending
    order, list order within a class. Fixed ordering keeps the solver's
    tie-breaking reproducible."""
    ids: list[str] = []
    classes: list[str] = []
    for cls in sorted(pool.representatives):
        for box_id in pool.representatives[cls]:
            ids.append(box_id)
            classes.append(cls)
    return ids, classes


def propagate_round(
    pool: LabeledPool,
    box_features: Mapping[str, np.ndarray],
    constraints: ClassConstraints,
    stage: int,
    round_index: int = 1,
) -> tuple[LabeledPool, list[tuple[str, str, str, float]]]:
    """Run one matching round and apply the stage's acceptance rule.

    Returns the updated pool and the accepted (candidate box_id, class,
    matched representative box_id, distance) tuples. Stage 1 accepts a pair
    only below the class's distance cap; stage 2 accepts every pair.
    """
    if stage not in (1, 2):
        raise ValueError(f"stage must be 1 or 2, got {stage!r}")
    if not pool.candidates:
        raise ValueError("no candidates left to propagate")
    rep_ids, rep_classes = _representative_columns(pool)
    if not rep_ids:
        raise ValueError("no representatives to match against")

    cand_ids = list(pool.candidates)
    costs = build_cost_matrix(
        [(bid, box_features[bid]) for bid in cand_ids],
        [(bid, cls, box_features[bid]) for bid, cls in zip(rep_ids, rep_classes)],
    )
    flow = solve_matching(costs)

    accepted: list[tuple[str, str, str, float]] = []
    for i, j in flow.pairs:
        distance = float(costs.cost[i, j])
        cls = rep_classes[j]
        if stage == 1 and not (distance < constraints.cap(cls)):
            continue
        accepted.append((cand_ids[i], cls, rep_ids[j], distance))

    stage_name = STAGE_CONSTRAINED if stage == 1 else STAGE_RELAXED
    pool.accept_batch(accepted, stage_name, round_index)
    return pool, accepted


def run_propagation(
    records: Sequence[DetectionRecord],
    features: FeatureStore,
    config: RunConfig,
    on_round: Callable[[RoundLog, LabeledPool], None] | None = None,
) -> tuple[LabeledPool, PropagationAudit]:
    """Full pipeline: seed selection, distance caps, representative medoids,
    then matching rounds until every candidate is labeled.

    ``on_round`` (when given) observes each round's log and the pool state
    right after that round. Deterministic given config.rng_seed.
    """
    store = features.normalized() if config.feature_normalize else features
    box_features = {rec.box_id: store.get(rec.feature_id) for rec in records}
    predicted = {rec.box_id: rec.class_label for rec in records}

    remaining = list(records)
    hf: dict[str, list[str]] = {}
    if config.reject_below is not None:
        rejected = [r for r in remaining if r.confidence < config.reject_below]
        if rejected:
            hf[REJECT_CLASS] = [r.box_id for r in rejected]
            remaining = [r for r in remaining if r.confidence >= config.reject_below]

    thresholds = {rec.class_label: config.threshold_for(rec.class_label)
                  for rec in remaining}
    class_hf, candidates = select_high_confidence(remaining, thresholds)
    hf.update(class_hf)

    if not any(hf.values()):
        raise ConfigError(
            "no class has a single high-confidence seed; nothing to propagate from "
            "(lower the thresholds or fix the scores)"
        )

    constraints = distance_caps_for(hf, box_features)

    confirmed: dict[str, dict[str, Provenance]] = {}
    representatives: dict[str, list[str]] = {}
    audit = PropagationAudit()
    for cls in sorted(hf):
        seed_ids = hf[cls]
        confirmed[cls] = {bid: Provenance(STAGE_SEED, 0) for bid in seed_ids}
        representatives[cls] = select_representatives(
            [(bid, box_features[bid]) for bid in seed_ids], config.k, config.rng_seed
        )
        for bid in seed_ids:
            audit.entries[bid] = AuditEntry(
                box_id=bid, final_class=cls, predicted_class=predicted[bid],
                stage=STAGE_SEED, round_index=0,
            )

    pool = LabeledPool(confirmed=confirmed, candidates=candidates,
                       representatives=representatives)

    stage = 1
    round_index = 0
    while pool.candidates:
        round_index += 1
        num_candidates = len(pool.candidates)
        num_reps = sum(len(v) for v in pool.representatives.values())
        pool, accepted = propagate_round(pool, box_features, constraints, stage,
                                         round_index)
        stage_name = STAGE_CONSTRAINED if stage == 1 else STAGE_RELAXED
        for box_id, cls, seed_id, distance in accepted:
            audit.entries[box_id] = AuditEntry(
                box_id=box_id, final_class=cls, predicted_class=predicted[box_id],
                stage=stage_name, round_index=round_index,
                matched_seed=seed_id, distance=distance,
            )
        log = RoundLog(round_index, stage_name, num_candidates, num_reps, len(accepted))
        audit.rounds.append(log)
        if on_round is not None:
            on_round(log, pool)
        if stage == 1 and not accepted:
            stage = 2

    return pool, audit
