"""Domain-type behavior: box geometry, the feature store, the label pool's
partition discipline, and detection-set validation."""

import math

import numpy as np
import pytest

from boxprop import (
    BoundingBox,
    ClassConstraints,
    ConfigError,
    FeatureStore,
    LabeledPool,
    Provenance,
    RunConfig,
    validate_detection_set,
)

from conftest import make_record, store_from


class TestBoundingBox:
    def test_geometry_accessors(self):
        box = BoundingBox(u=2.0, v=3.0, w=4.0, h=5.0)
        assert box.area == 20.0
        assert box.right == 6.0
        assert box.bottom == 8.0

    def test_positive_box_is_valid(self):
        assert BoundingBox(0, 0, 1, 1).is_valid()

    @pytest.mark.parametrize("w,h", [(0.0, 1.0), (1.0, 0.0), (-1.0, 1.0)])
    def test_nonpositive_extent_is_invalid(self, w, h):
        assert not BoundingBox(0, 0, w, h).is_valid()

    def test_nonfinite_coordinate_is_invalid(self):
        assert not BoundingBox(math.nan, 0, 1, 1).is_valid()
        assert not BoundingBox(0, math.inf, 1, 1).is_valid()


class TestFeatureStore:
    def test_round_trip_keeps_float32_bits(self):
        store = FeatureStore(3)
        store.add("f1", [0.1, 0.2, 0.3])
        vec = store.get("f1")
        assert vec.dtype == np.float32
        assert np.array_equal(vec, np.array([0.1, 0.2, 0.3], dtype=np.float32))

    def test_dimension_mismatch_rejected(self):
        store = FeatureStore(3)
        with pytest.raises(ValueError, match="expected 3 values"):
            store.add("f1", [1.0, 2.0])

    def test_nonfinite_value_rejected(self):
        store = FeatureStore(2)
        with pytest.raises(ValueError, match="non-finite"):
            store.add("f1", [1.0, math.nan])

    def test_zero_dimension_rejected(self):
        with pytest.raises(ValueError):
            FeatureStore(0)

    def test_matrix_stacks_requested_ids_in_order(self):
        store = store_from({"a": [1.0, 0.0], "b": [0.0, 1.0]})
        mat = store.matrix(["b", "a"])
        assert mat.dtype == np.float64
        assert np.array_equal(mat, [[0.0, 1.0], [1.0, 0.0]])

    def test_matrix_of_nothing_is_empty_with_width(self):
        store = FeatureStore(4)
        assert store.matrix([]).shape == (0, 4)

    def test_normalized_scales_to_unit_length(self):
        store = store_from({"a": [3.0, 4.0], "z": [0.0, 0.0]})
        normed = store.normalized()
        assert np.linalg.norm(normed.get("a")) == pytest.approx(1.0, abs=1e-6)
        # zero vectors cannot be scaled and pass through untouched
        assert np.array_equal(normed.get("z"), [0.0, 0.0])

    def test_membership_and_len(self):
        store = store_from({"a": [1.0], "b": [2.0]})
        assert "a" in store and "c" not in store
        assert len(store) == 2
        assert store.ids() == ["a", "b"]


class TestValidation:
    def test_duplicate_box_id_reported_once(self):
        records = [make_record("b1"), make_record("b1")]
        report = validate_detection_set(records)
        kinds = [v.kind for v in report.violations]
        assert kinds == ["duplicate_box_id"]
        assert not report.ok

    def test_empty_input_is_valid(self):
        report = validate_detection_set([])
        assert report.ok
        assert report.format() == "ok"

    def test_unresolved_feature_reported(self):
        store = store_from({"other": [1.0]})
        report = validate_detection_set([make_record("b1")], store)
        assert [v.kind for v in report.violations] == ["missing_feature"]

    def test_feature_check_skipped_without_store(self):
        assert validate_detection_set([make_record("b1")]).ok

    @pytest.mark.parametrize("confidence", [-0.1, 1.3, math.nan])
    def test_confidence_outside_unit_interval_reported(self, confidence):
        report = validate_detection_set([make_record("b1", confidence=confidence)])
        assert [v.kind for v in report.violations] == ["confidence_range"]

    def test_boundary_confidences_accepted(self):
        records = [make_record("b0", confidence=0.0), make_record("b1", confidence=1.0)]
        assert validate_detection_set(records).ok

    def test_nonfinite_coordinate_reported(self):
        report = validate_detection_set([make_record("b1", u=math.inf)])
        assert [v.kind for v in report.violations] == ["nonfinite"]

    def test_nonpositive_size_reported(self):
        report = validate_detection_set([make_record("b1", w=0.0)])
        assert [v.kind for v in report.violations] == ["nonpositive_size"]

    def test_violations_carry_offending_box_id(self):
        report = validate_detection_set([make_record("bad", confidence=2.0)])
        assert report.violations[0].box_id == "bad"
        assert "bad" in report.format()


class TestLabeledPool:
    def _pool(self):
        return LabeledPool(
            confirmed={"c1": {"s1": Provenance("seed", 0)}},
            candidates=["p1", "p2", "p3"],
            representatives={"c1": ["s1"]},
        )

    def test_accept_batch_moves_candidates(self):
        pool = self._pool()
        pool.accept_batch([("p2", "c1", "s1", 0.5)], "stage1", 1)
        assert pool.candidates == ["p1", "p3"]
        assert "p2" in pool.confirmed["c1"]
        assert pool.representatives["c1"] == ["s1", "p2"]
        prov = pool.confirmed["c1"]["p2"]
        assert (prov.stage, prov.round_index, prov.matched_seed) == ("stage1", 1, "s1")
        assert prov.distance == 0.5

    def test_accept_batch_preserves_remaining_order(self):
        pool = self._pool()
        pool.accept_batch([("p1", "c1", "s1", 0.1), ("p3", "c1", "s1", 0.2)],
                          "stage2", 4)
        assert pool.candidates == ["p2"]

    def test_accepting_unknown_candidate_fails(self):
        pool = self._pool()
        with pytest.raises(ValueError, match="not an open candidate"):
            pool.accept_batch([("nope", "c1", "s1", 0.1)], "stage1", 1)

    def test_accepting_same_candidate_twice_fails(self):
        pool = self._pool()
        with pytest.raises(ValueError, match="not an open candidate"):
            pool.accept_batch(
                [("p1", "c1", "s1", 0.1), ("p1", "c1", "s1", 0.2)], "stage1", 1
            )

    def test_partition_check_passes_on_exact_cover(self):
        pool = self._pool()
        pool.check_partition(["s1", "p1", "p2", "p3"])

    def test_partition_check_catches_missing_and_extra_ids(self):
        pool = self._pool()
        with pytest.raises(AssertionError):
            pool.check_partition(["s1", "p1", "p2"])  # p3 unexpected
        with pytest.raises(AssertionError):
            pool.check_partition(["s1", "p1", "p2", "p3", "ghost"])

    def test_partition_check_catches_double_confirmation(self):
        pool = LabeledPool(
            confirmed={"c1": {"x": Provenance("seed", 0)},
                       "c2": {"x": Provenance("seed", 0)}},
            candidates=[],
            representatives={},
        )
        with pytest.raises(AssertionError, match="confirmed twice"):
            pool.check_partition(["x"])

    def test_partition_check_catches_unconfirmed_representative(self):
        pool = LabeledPool(
            confirmed={"c1": {"s1": Provenance("seed", 0)}},
            candidates=[],
            representatives={"c1": ["s1", "stranger"]},
        )
        with pytest.raises(AssertionError, match="not confirmed"):
            pool.check_partition(["s1"])

    def test_class_lookup(self):
        pool = self._pool()
        assert pool.class_of("s1") == "c1"
        with pytest.raises(KeyError):
            pool.class_of("p1")
        assert pool.confirmed_ids() == {"s1"}


class TestRunConfig:
    def test_explicit_threshold_beats_default(self):
        config = RunConfig(hf_thresholds={"c1": 0.7}, hf_threshold_default=0.5)
        assert config.threshold_for("c1") == 0.7
        assert config.threshold_for("c2") == 0.5

    def test_missing_threshold_without_default_fails(self):
        config = RunConfig(hf_thresholds={}, hf_threshold_default=None)
        with pytest.raises(ConfigError):
            config.threshold_for("c1")

    def test_constraints_lookup(self):
        caps = ClassConstraints(distance_cap={"c1": 1.5})
        assert caps.cap("c1") == 1.5
        with pytest.raises(KeyError):
            caps.cap("c2")
