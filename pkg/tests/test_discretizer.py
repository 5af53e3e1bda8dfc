import itertools

import numpy as np
import pytest

from numpy.testing import assert_allclose, assert_array_equal

from linkdcm import discretizer
from linkdcm.discretizer import LevelSeries, assign_levels, kmeans_1d, label_values, level_summary
from linkdcm.handlers import ClusteringError, DataError

def _optimal_inertia(values, k=3):
    xs = np.sort(np.asarray(values, dtype=float))
    best = np.inf
    for cuts in itertools.combinations(range(1, xs.size), k - 1):
        parts = np.split(xs, cuts)
        best = min(best, sum(float(np.sum((p - p.mean()) ** 2)) for p in parts))
    return best

def test_kmeans_matches_exhaustive_partition():
    for seed in range(100):
        rng = np.random.default_rng(seed)
        values = rng.normal(size=int(rng.integers(3, 11)))
        clustering = kmeans_1d(values, k=3, seed=seed, restarts=10)
        optimum = _optimal_inertia(values)
        assert clustering.inertia <= optimum * (1 + 1e-9) + 1e-12
        assert clustering.inertia == pytest.approx(optimum, rel=1e-9, abs=1e-12)

def test_kmeans_nine_points():
    values = [0.1, 0.2, 0.25, 3.0, 3.1, 3.3, 7.9, 8.0, 8.4]
    clustering = kmeans_1d(values, k=3, seed=42, restarts=10)
    assert clustering.inertia == pytest.approx(_optimal_inertia(values), rel=1e-12)
    assert_allclose(np.sort(clustering.centroids), [0.55 / 3, 9.4 / 3, 24.3 / 3])

def test_kmeans_is_deterministic():
    values = np.random.default_rng(1).gamma(2.0, size=500)
    a = kmeans_1d(values, seed=5)
    b = kmeans_1d(values, seed=5)
    assert_array_equal(a.centroids, b.centroids)
    assert_array_equal(a.assignment, b.assignment)
    assert a.to_dict() == b.to_dict()

def test_kmeans_without_exact_refinement():
    values = np.concatenate([np.full(50, 1.0), np.full(50, 2.0), np.full(50, 4.0)])
    clustering = kmeans_1d(values, seed=0, exact_limit=0)
    assert clustering.restart is not None
    assert_allclose(np.sort(clustering.centroids), [1.0, 2.0, 4.0])
    assert clustering.inertia == pytest.approx(0.0, abs=1e-12)

def test_kmeans_rejects_too_few_distinct_values():
    with pytest.raises(ClusteringError) as info:
        kmeans_1d([1.0, 1.0, 2.0, 2.0], k=3)
    assert info.value.context == {'distinct': 2, 'k': 3}
    with pytest.raises(ClusteringError):
        kmeans_1d([], k=3)
    with pytest.raises(DataError):
        kmeans_1d([1.0, np.nan, 2.0, 3.0], k=3)

def test_assign_levels_orders_by_centroid():
    clustering = kmeans_1d([10, 0, 5, 10, 0, 5], k=3)
    levels = assign_levels(clustering)
    assert_array_equal(levels.level, [3, 1, 2, 3, 1, 2])
    assert_allclose(levels.thresholds, [2.5, 7.5])
    assert_allclose(levels.centroids, [0.0, 5.0, 10.0])
    assert levels.to_dict()['counts'] == {'1': 2, '2': 2, '3': 2}

def test_assign_levels_new_values():
    clustering = kmeans_1d([0, 0, 5, 5, 10, 10], k=3)
    levels = assign_levels(clustering, [-3.0, 4.0, 100.0])
    assert_array_equal(levels.level, [1, 2, 3])

def test_assign_levels_requires_three_clusters():
    with pytest.raises(ClusteringError):
        assign_levels(kmeans_1d([0, 0, 5, 5], k=2))

def test_label_values_ties_go_to_lower_level():
    levels = label_values([2.5, 2.5000001, 7.5, 8.0, -1.0], [2.5, 7.5])
    assert_array_equal(levels.level, [1, 2, 2, 3, 1])

def test_level_series_requires_increasing_thresholds():
    with pytest.raises(ClusteringError):
        LevelSeries([1, 2], [3.0, 3.0])

def test_level_summary():
    summary = level_summary([0.4, 0.6, 1.5, 3.0], [1, 1, 2, 3])
    assert summary['count'].tolist() == [2, 1, 1]
    assert summary['mean'].tolist() == pytest.approx([0.5, 1.5, 3.0])
    with pytest.raises(DataError):
        level_summary([0.4, 0.6], [1])

def test_empty_clusters_reseed_to_distinct_points():
    x = np.array([0.0, 1.0, 2.0, 10.0, 11.0, 12.0])
    centroids, assignment, iterations, converged = discretizer._lloyd(x, np.array([5.0, 100.0, 200.0]), 1e-10, 1)
    assert_allclose(centroids, [6.0, 12.0, 0.0])

    centroids, assignment, iterations, converged = discretizer._lloyd(x, np.array([5.0, 100.0, 200.0]), 1e-10, 50)
    assert converged
    assert np.unique(centroids).size == 3
    assert np.bincount(assignment, minlength=3).min() > 0
