"""Deterministic k-means and medoid-based representative selection."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from boxprop.clustering import kmeans_fit, select_representatives


def _items(points):
    return [(f"b{i}", np.asarray(p, dtype=np.float64))
            for i, p in enumerate(points)]


class TestKmeansFit:
    def test_single_cluster_is_the_mean(self):
        points = [[0.0, 0.0], [2.0, 0.0], [4.0, 6.0]]
        result = kmeans_fit(_items(points), k=1, rng_seed=0)
        mean = np.mean(points, axis=0)
        assert np.allclose(result.centroids, [mean])
        expected_inertia = float(((np.array(points) - mean) ** 2).sum())
        assert result.inertia == pytest.approx(expected_inertia, rel=1e-12)
        assert set(result.assignment.values()) == {0}

    def test_two_well_separated_clusters(self):
        points = [[0.0], [0.1], [10.0], [10.1]]
        result = kmeans_fit(_items(points), k=2, rng_seed=0)
        got = sorted(float(c[0]) for c in result.centroids)
        assert got == pytest.approx([0.05, 10.05], abs=1e-9)
        assert result.inertia == pytest.approx(0.01, abs=1e-9)
        # the pairs land together regardless of cluster numbering
        a = result.assignment
        assert a["b0"] == a["b1"] and a["b2"] == a["b3"] and a["b0"] != a["b2"]

    def test_as_many_clusters_as_distinct_points(self):
        points = [[0.0], [5.0], [9.0]]
        result = kmeans_fit(_items(points), k=3, rng_seed=1)
        assert result.inertia == pytest.approx(0.0, abs=1e-18)
        assert len(set(result.assignment.values())) == 3

    def test_more_clusters_than_points(self):
        result = kmeans_fit(_items([[0.0], [8.0]]), k=5, rng_seed=0)
        assert result.centroids.shape == (5, 1)
        assert result.inertia == pytest.approx(0.0, abs=1e-18)
        assert set(result.assignment) == {"b0", "b1"}

    def test_duplicate_points_fill_requested_clusters(self):
        points = [[1.0]] * 4
        result = kmeans_fit(_items(points), k=2, rng_seed=0)
        assert result.inertia == 0.0
        assert set(result.assignment.values()) == {0, 1}

    def test_deterministic_for_fixed_seed(self):
        rng = np.random.default_rng(42)
        points = rng.normal(size=(30, 4)).tolist()
        r1 = kmeans_fit(_items(points), k=5, rng_seed=7)
        r2 = kmeans_fit(_items(points), k=5, rng_seed=7)
        assert np.array_equal(r1.centroids, r2.centroids)
        assert r1.assignment == r2.assignment
        assert r1.inertia == r2.inertia

    def test_empty_input_rejected(self):
        with pytest.raises(ValueError, match="empty"):
            kmeans_fit([], k=2, rng_seed=0)

    def test_bad_k_rejected(self):
        with pytest.raises(ValueError, match="k must be"):
            kmeans_fit(_items([[0.0]]), k=0, rng_seed=0)

    @given(
        seed=st.integers(min_value=0, max_value=50),
        n=st.integers(min_value=1, max_value=24),
        k=st.integers(min_value=1, max_value=8),
    )
    @settings(max_examples=40, deadline=None)
    def test_objective_never_increases(self, seed, n, k):
        rng = np.random.default_rng(seed)
        points = rng.normal(size=(n, 3)).tolist()
        result = kmeans_fit(_items(points), k=k, rng_seed=seed)
        history = result.inertia_history
        assert history, "at least one assignment pass must be recorded"
        assert all(b <= a + 1e-9 for a, b in zip(history, history[1:]))
        assert result.inertia == history[-1]
        assert set(result.assignment) == {f"b{i}" for i in range(n)}
        assert all(0 <= c < k for c in result.assignment.values())


class TestSelectRepresentatives:
    def test_few_members_returned_as_is(self):
        boxes = _items([[0.0], [4.0], [8.0]])
        assert select_representatives(boxes, k=25, rng_seed=0) == ["b0", "b1", "b2"]

    def test_one_medoid_per_cluster(self):
        boxes = _items([[0.0], [0.1], [10.0], [10.1]])
        # k=2 < 4 members forces clustering; medoids are the members nearest
        # to the 0.05 / 10.05 centroids — one from each pair
        reps = select_representatives(boxes, k=2, rng_seed=0)
        assert len(reps) == 2
        assert len({r for r in reps} & {"b0", "b1"}) == 1
        assert len({r for r in reps} & {"b2", "b3"}) == 1

    def test_medoid_is_nearest_member_to_centroid(self):
        # cluster around 0 with an off-center member: 0.0 and 0.4 (centroid
        # 0.2 is equidistant; the tie goes to the lexically smaller box id)
        boxes = _items([[0.0], [0.4], [50.0], [50.2], [50.4]])
        reps = select_representatives(boxes, k=2, rng_seed=0)
        assert "b0" in reps  # tie at distance 0.2 broken toward b0
        assert "b3" in reps  # 50.2 is the member closest to the 50.2 centroid

    def test_identical_features_yield_distinct_representatives(self):
        boxes = _items([[3.0], [3.0], [3.0]])
        reps = select_representatives(boxes, k=2, rng_seed=0)
        assert len(reps) == len(set(reps)) == 2

    def test_empty_input_rejected(self):
        with pytest.raises(ValueError, match="no seed boxes"):
            select_representatives([], k=3, rng_seed=0)

    @given(
        seed=st.integers(min_value=0, max_value=30),
        n=st.integers(min_value=1, max_value=30),
        k=st.integers(min_value=1, max_value=10),
    )
    @settings(max_examples=40, deadline=None)
    def test_representatives_are_distinct_members(self, seed, n, k):
        rng = np.random.default_rng(seed)
        boxes = _items(rng.normal(size=(n, 2)).tolist())
        reps = select_representatives(boxes, k=k, rng_seed=seed)
        ids = {bid for bid, _ in boxes}
        assert set(reps) <= ids
        assert len(reps) == len(set(reps))
        if n <= k:
            assert reps == [bid for bid, _ in boxes]
        else:
            assert 1 <= len(reps) <= k
