"""Score thresholding and the three calibration maps, checked against
synthetic data whose true calibration function is known by construction."""

import numpy as np
import pytest

from boxprop.calibration import (
    CalibratorModel,
    DegenerateDataError,
    fit_beta,
    fit_histogram_binning,
    fit_platt,
    threshold_filter,
)

from conftest import make_record


def _sigmoid(z):
    return 1.0 / (1.0 + np.exp(-z))


def _logit(s):
    return np.log(s) - np.log1p(-s)


class TestThresholdFilter:
    def test_strictly_above_survives(self):
        records = [make_record("b1", confidence=0.4),
                   make_record("b2", confidence=0.5),
                   make_record("b3", confidence=0.6)]
        kept = threshold_filter(records, 0.5)
        assert [r.box_id for r in kept] == ["b3"]

    def test_zero_threshold_keeps_positive_scores(self):
        records = [make_record("b1", confidence=0.0),
                   make_record("b2", confidence=0.01)]
        assert [r.box_id for r in threshold_filter(records, 0.0)] == ["b2"]

    def test_retained_count_shrinks_as_cut_rises(self):
        rng = np.random.default_rng(2)
        records = [make_record(f"b{i}", confidence=float(c))
                   for i, c in enumerate(rng.uniform(size=400))]
        counts = [len(threshold_filter(records, t)) for t in (0.5, 0.6, 0.7)]
        assert counts[0] > counts[1] > counts[2]

    def test_threshold_domain_checked(self):
        with pytest.raises(ValueError, match="\\[0, 1\\]"):
            threshold_filter([], 1.5)


class TestHistogramBinning:
    def test_single_bin_is_the_overall_mean(self):
        model = fit_histogram_binning([0.2, 0.5, 0.9], [True, True, False],
                                      num_bins=1)
        out = model.apply([0.05, 0.5, 0.95])
        assert out == pytest.approx([2 / 3, 2 / 3, 2 / 3])

    def test_all_correct_maps_to_one(self):
        model = fit_histogram_binning([0.1, 0.6, 0.9], [True, True, True],
                                      num_bins=3)
        assert model.apply([0.1, 0.6, 0.9]) == pytest.approx([1.0, 1.0, 1.0])

    def test_two_regime_generator_recovered(self):
        rng = np.random.default_rng(np.random.Philox(0))
        scores = rng.uniform(size=10_000)
        accuracy = np.where(scores < 0.5, 0.25, 0.75)
        correct = rng.uniform(size=scores.size) < accuracy
        model = fit_histogram_binning(scores, correct, num_bins=2)
        values = model.parameters["values"]
        assert values[0] == pytest.approx(0.25, abs=0.03)
        assert values[1] == pytest.approx(0.75, abs=0.03)

    def test_empty_bins_inherit_nearest_value(self):
        # data only in the first and last of 5 bins; the middle bins must
        # take the closest fitted value rather than an invented one
        model = fit_histogram_binning([0.05, 0.06, 0.95, 0.96],
                                      [True, True, False, False], num_bins=5)
        values = model.parameters["values"]
        assert values[0] == 1.0 and values[4] == 0.0
        assert values[1] == 1.0  # nearest nonempty is bin 0
        assert values[3] == 0.0  # nearest nonempty is bin 4
        assert values[2] == 1.0  # equidistant tie resolves to the lower bin

    def test_bin_lookup_covers_whole_unit_interval(self):
        model = fit_histogram_binning([0.25, 0.75], [True, False], num_bins=2)
        out = model.apply([0.0, 0.499, 0.5, 1.0])
        assert out == pytest.approx([1.0, 1.0, 0.0, 0.0])

    def test_input_validation(self):
        with pytest.raises(ValueError, match="empty"):
            fit_histogram_binning([], [], num_bins=2)
        with pytest.raises(ValueError, match="num_bins"):
            fit_histogram_binning([0.5], [True], num_bins=0)
        with pytest.raises(ValueError, match="lengths differ"):
            fit_histogram_binning([0.5, 0.6], [True], num_bins=2)


def _platt_sample(a, b, n, seed):
    rng = np.random.default_rng(np.random.Philox(seed))
    scores = rng.uniform(0.02, 0.98, size=n)
    prob = _sigmoid(a * _logit(scores) + b)
    correct = rng.uniform(size=n) < prob
    return scores, correct


class TestPlatt:
    def test_recovers_slope_and_offset(self):
        scores, correct = _platt_sample(a=2.0, b=-1.0, n=10_000, seed=1)
        model = fit_platt(scores, correct)
        assert model.parameters["a"] == pytest.approx(2.0, abs=0.05)
        assert model.parameters["b"] == pytest.approx(-1.0, abs=0.05)

    def test_recovers_identity(self):
        scores, correct = _platt_sample(a=1.0, b=0.0, n=10_000, seed=5)
        model = fit_platt(scores, correct)
        assert model.parameters["a"] == pytest.approx(1.0, abs=0.05)
        assert model.parameters["b"] == pytest.approx(0.0, abs=0.05)

    def test_single_outcome_data_rejected(self):
        with pytest.raises(DegenerateDataError):
            fit_platt([0.2, 0.6, 0.9], [True, True, True])
        with pytest.raises(DegenerateDataError):
            fit_platt([0.2, 0.6, 0.9], [False, False, False])

    def test_apply_is_safe_at_the_endpoints(self):
        model = CalibratorModel("platt", {"a": 2.0, "b": -1.0})
        out = model.apply([0.0, 1.0])
        assert np.all((out >= 0.0) & (out <= 1.0))
        assert out[0] < 0.5 < out[1]


class TestBeta:
    def test_identity_generator_recovered_as_a_map(self):
        rng = np.random.default_rng(np.random.Philox(1))
        scores = rng.uniform(0.02, 0.98, size=10_000)
        correct = rng.uniform(size=scores.size) < scores
        model = fit_beta(scores, correct)
        grid = np.linspace(0.05, 0.95, 181)
        assert float(np.abs(model.apply(grid) - grid).max()) < 0.02

    def test_identity_parameters_fix_half(self):
        model = CalibratorModel("beta", {"a": 1.0, "b": 1.0, "c": 0.0})
        assert model.apply([0.5])[0] == pytest.approx(0.5, abs=1e-12)

    def test_identity_parameters_reproduce_input(self):
        model = CalibratorModel("beta", {"a": 1.0, "b": 1.0, "c": 0.0})
        grid = np.linspace(0.05, 0.95, 19)
        assert model.apply(grid) == pytest.approx(grid, abs=1e-12)

    def test_fitted_map_is_monotone(self):
        rng = np.random.default_rng(np.random.Philox(4))
        scores = rng.uniform(0.02, 0.98, size=4_000)
        prob = _sigmoid(1.5 * _logit(scores) + 0.3)
        correct = rng.uniform(size=scores.size) < prob
        model = fit_beta(scores, correct)
        assert model.parameters["a"] >= 0.0
        assert model.parameters["b"] >= 0.0
        grid = np.linspace(0.001, 0.999, 500)
        out = model.apply(grid)
        assert np.all(np.diff(out) >= -1e-12)

    def test_single_outcome_data_rejected(self):
        with pytest.raises(DegenerateDataError):
            fit_beta([0.2, 0.9], [True, True])


class TestModelSerialization:
    @pytest.mark.parametrize("model", [
        CalibratorModel("platt", {"a": 1.5, "b": -0.25}),
        CalibratorModel("beta", {"a": 1.0, "b": 2.0, "c": 0.125}),
        CalibratorModel("histogram_binning",
                        {"edges": [0.0, 0.5, 1.0], "values": [0.2, 0.8]}),
    ])
    def test_round_trip_preserves_map(self, model):
        clone = CalibratorModel.loads(model.dumps())
        assert clone.kind == model.kind
        grid = np.linspace(0.0, 1.0, 101)
        assert np.array_equal(clone.apply(grid), model.apply(grid))

    def test_unknown_kind_rejected_on_apply(self):
        with pytest.raises(ValueError, match="unknown calibrator"):
            CalibratorModel("isotonic", {}).apply([0.5])
