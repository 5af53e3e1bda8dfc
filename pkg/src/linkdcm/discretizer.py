import logging

import numpy as np
import pandas as pd

from .defaults import *
from .handlers import *
from .tools import get_rng

logger = logging.getLogger(__name__)

class Clustering:
    """
    Result of :func:`kmeans_1d`.

    Attributes
    ----------
    centroids : :class:`numpy:numpy.ndarray`
        ``k`` cluster centers.
    assignment : :class:`numpy:numpy.ndarray`
        Index of the nearest centroid for every point, ties to the lower index.
    inertia : float
        Within-cluster sum of squares.
    iterations : int
        Lloyd iterations of the selected run.
    converged : bool
        Whether the selected run stopped on the centroid shift tolerance.
    seed : int
        Root seed.
    restarts : int
        Number of seeded runs.
    restart : int or None
        Index of the selected run, ``None`` when the exact refinement was selected.
    """
    def __init__(self, centroids, assignment, inertia, iterations, converged, seed, restarts, restart):
        self.centroids = np.asarray(centroids, dtype=float)
        self.assignment = np.asarray(assignment, dtype=np.int64)
        self.inertia = float(inertia)
        self.iterations = int(iterations)
        self.converged = bool(converged)
        self.seed = int(seed)
        self.restarts = int(restarts)
        self.restart = restart

    @property
    def k(self):
        return len(self.centroids)

    def to_dict(self):
        out = {
            'centroids': self.centroids.tolist(),
            'inertia': self.inertia,
            'iterations': self.iterations,
            'converged': self.converged,
            'seed': self.seed,
            'restarts': self.restarts,
            'restart': self.restart
        }
        return out

class LevelSeries:
    """
    Emission level of every row with the thresholds that separate the levels.

    Attributes
    ----------
    level : :class:`numpy:numpy.ndarray`
        Level in ``{1, 2, 3}`` per row.
    thresholds : :class:`numpy:numpy.ndarray`
        Upper boundary of level 1 and of level 2.
    centroids : :class:`numpy:numpy.ndarray` or None
        Sorted centroids the thresholds were derived from.
    """
    def __init__(self, level, thresholds, centroids=None):
        self.level = np.asarray(level, dtype=np.int64)
        self.level.flags.writeable = False
        self.thresholds = np.asarray(thresholds, dtype=float)
        self.centroids = None if centroids is None else np.asarray(centroids, dtype=float)
        if not np.all(np.diff(self.thresholds) > 0):
            raise ClusteringError(f'Thresholds must be strictly increasing, got {self.thresholds.tolist()}')

    def __len__(self):
        return len(self.level)

    def to_dict(self):
        out = {
            'thresholds': self.thresholds.tolist(),
            'centroids': None if self.centroids is None else self.centroids.tolist(),
            'counts': {str(k): int((self.level == k).sum()) for k in DEFAULT_LEVELS}
        }
        return out

def _assign(x, centroids):
    return np.argmin(np.abs(x[:, None] - centroids[None, :]), axis=1)

def _inertia(x, centroids, assignment):
    return float(np.sum((x - centroids[assignment]) ** 2))

def _kmeans_plusplus(x, k, rng):
    centers = [x[rng.integers(x.size)]]
    d2 = (x - centers[0]) ** 2
    for _ in range(1, k):
        cumulative = np.cumsum(d2)
        u = rng.random() * cumulative[-1]
        index = min(int(np.searchsorted(cumulative, u, side='right')), x.size - 1)
        centers.append(x[index])
        d2 = np.minimum(d2, (x - x[index]) ** 2)
    out = np.sort(np.asarray(centers, dtype=float))
    return out

def _lloyd(x, centroids, tol, max_iter):
    k = centroids.size
    converged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        assignment = _assign(x, centroids)
        counts = np.bincount(assignment, minlength=k)
        sums = np.bincount(assignment, weights=x, minlength=k)
        updated = centroids.copy()
        filled = counts > 0
        updated[filled] = sums[filled] / counts[filled]

        # Empty clusters take the farthest points in turn, one distinct value each
        distance = (x - centroids[assignment]) ** 2
        for j in np.flatnonzero(~filled):
            far = int(np.argmax(distance))
            if not np.isfinite(distance[far]):
                break
            updated[j] = x[far]
            distance[x == x[far]] = -np.inf
        shift = float(np.max(np.abs(updated - centroids)))
        centroids = updated
        if shift < tol:
            converged = True
            break
    assignment = _assign(x, centroids)
    return centroids, assignment, iterations, converged

def _exact_centroids(x, k):
    xs = np.sort(x)
    xs = xs - xs.mean()
    n = xs.size
    s1 = np.concatenate([[0.0], np.cumsum(xs)])
    s2 = np.concatenate([[0.0], np.cumsum(xs ** 2)])

    def cost(i, j):
        size = j - i
        return s2[j] - s2[i] - (s1[j] - s1[i]) ** 2 / size

    # best[m, j]: optimal cost of the first j points in m + 1 clusters
    best = np.full((k, n + 1), np.inf)
    split_at = np.zeros((k, n + 1), dtype=np.int64)
    j = np.arange(1, n + 1)
    best[0, 1:] = cost(0, j)
    for m in range(1, k):
        for end in range(m + 1, n + 1):
            starts = np.arange(m, end)
            candidates = best[m - 1, starts] + cost(starts, end)
            pick = int(np.argmin(candidates))
            best[m, end] = candidates[pick]
            split_at[m, end] = starts[pick]
    bounds = [n]
    for m in range(k - 1, 0, -1):
        bounds.append(split_at[m, bounds[-1]])
    bounds.append(0)
    bounds = bounds[::-1]
    ordered = np.sort(x)
    out = np.array([ordered[bounds[m]:bounds[m + 1]].mean() for m in range(k)])
    return out

def kmeans_1d(
    values,
    k=DEFAULT_KMEANS_OPTIONS['k'],
    seed=DEFAULT_SEED,
    restarts=DEFAULT_KMEANS_OPTIONS['restarts'],
    tol=DEFAULT_KMEANS_OPTIONS['tol'],
    max_iter=DEFAULT_KMEANS_OPTIONS['max_iter'],
    exact_limit=DEFAULT_KMEANS_OPTIONS['exact_limit']):
    """
    Cluster 1-D values with K-means.

    Each restart seeds with k-means++ from its own ``('kmeans', restart)`` stream and runs Lloyd's algorithm until the centroid shift drops below ``tol`` or ``max_iter`` is reached. The run with the lowest inertia wins, ties to the lowest restart index. When there are at most ``exact_limit`` points, the optimal contiguous partition of the sorted values is also computed and replaces the Lloyd result if its inertia is strictly lower.

    Parameters
    ----------
    values : array-like
        Finite values to cluster.
    k : int
        Number of clusters.
    seed : int
        Root seed.
    restarts : int
        Number of seeded runs.
    tol : float
        Centroid shift tolerance.
    max_iter : int
        Maximum Lloyd iterations per run.
    exact_limit : int
        Largest number of points for the exact refinement.

    Returns
    -------
    :class:`Clustering`
        Best clustering found.

    Example
    -------
    .. jupyter-execute::

        from linkdcm.discretizer import kmeans_1d

        clustering = kmeans_1d([0, 0, 5, 5, 10, 10], k=3)
        print(clustering.centroids, clustering.inertia)
    """
    x = np.asarray(values, dtype=float).ravel()
    if x.size == 0:
        raise ClusteringError('Cannot cluster an empty input')
    if not np.isfinite(x).all():
        raise DataError('Cannot cluster non-finite values')
    distinct = np.unique(x).size
    if distinct < k:
        raise ClusteringError(f'{distinct} distinct values for k={k}', distinct=distinct, k=k)

    # (kmeans_1d_restarts) Best seeded Lloyd run
    best = None
    for restart in range(restarts):
        rng = get_rng(seed, 'kmeans', restart)
        centroids, assignment, iterations, converged = _lloyd(x, _kmeans_plusplus(x, k, rng), tol, max_iter)
        inertia = _inertia(x, centroids, assignment)
        if best is None or inertia < best.inertia:
            best = Clustering(centroids, assignment, inertia, iterations, converged, seed, restarts, restart)

    # (kmeans_1d_exact) Exact refinement on small inputs
    if x.size <= exact_limit:
        centroids, assignment, iterations, converged = _lloyd(x, _exact_centroids(x, k), tol, max_iter)
        inertia = _inertia(x, centroids, assignment)
        if inertia < best.inertia and not np.isclose(inertia, best.inertia, rtol=1e-12, atol=0.0):
            logger.info('Exact partition improves inertia from %r to %r', best.inertia, inertia)
            best = Clustering(centroids, assignment, inertia, iterations, converged, seed, restarts, None)
    if not best.converged:
        logger.warning('K-means stopped at max_iter=%d before converging', max_iter)
    return best

def assign_levels(clustering, values=None):
    """
    Relabel clusters as emission levels by ascending centroid.

    Parameters
    ----------
    clustering : :class:`Clustering`
        Clustering with ``k = 3``.
    values : array-like or None
        Values to label by nearest centroid. ``None`` uses the assignment of the clustered points.

    Returns
    -------
    :class:`LevelSeries`
        Levels 1 to 3 and the midpoint thresholds between sorted centroids.

    Example
    -------
    .. jupyter-execute::

        from linkdcm.discretizer import assign_levels, kmeans_1d

        clustering = kmeans_1d([0, 0, 5, 5, 10, 10], k=3)
        levels = assign_levels(clustering)
        print(levels.level, levels.thresholds)
    """
    if clustering.k != len(DEFAULT_LEVELS):
        raise ClusteringError(f'Expected {len(DEFAULT_LEVELS)} clusters, got {clustering.k}', k=clustering.k)
    order = np.argsort(clustering.centroids, kind='stable')
    rank = np.empty_like(order)
    rank[order] = np.arange(order.size)
    if values is None:
        assignment = clustering.assignment
    else:
        assignment = _assign(np.asarray(values, dtype=float).ravel(), clustering.centroids)
    centroids = clustering.centroids[order]
    thresholds = (centroids[:-1] + centroids[1:]) / 2.0
    out = LevelSeries(rank[assignment] + 1, thresholds, centroids)
    return out

def label_values(values, thresholds):
    """
    Label new values with exported thresholds.

    A value equal to a threshold takes the lower level.

    Parameters
    ----------
    values : array-like
        Emission rates.
    thresholds : array-like
        Two increasing thresholds.

    Returns
    -------
    :class:`LevelSeries`
        Levels of the values.
    """
    x = np.asarray(values, dtype=float).ravel()
    thresholds = np.asarray(thresholds, dtype=float)
    level = 1 + (x > thresholds[0]).astype(np.int64) + (x > thresholds[1]).astype(np.int64)
    out = LevelSeries(level, thresholds)
    return out

def level_summary(values, levels):
    """
    Summarize the emission rate per level.

    Parameters
    ----------
    values : array-like
        Emission rates.
    levels : :class:`LevelSeries` or array-like
        Level of every value.

    Returns
    -------
    :class:`pandas:pandas.DataFrame`
        Columns ``level``, ``count``, ``min``, ``max`` and ``mean``, one row per level.
    """
    level = np.asarray(getattr(levels, 'level', levels), dtype=np.int64)
    x = np.asarray(values, dtype=float).ravel()
    DataHandler().handle_aligned(x.size, level.size)
    rows = []
    for k in DEFAULT_LEVELS:
        selected = x[level == k]
        rows.append({
            'level': k,
            'count': int(selected.size),
            'min': float(selected.min()) if selected.size else np.nan,
            'max': float(selected.max()) if selected.size else np.nan,
            'mean': float(selected.mean()) if selected.size else np.nan
        })
    out = pd.DataFrame(rows, columns=['level', 'count', 'min', 'max', 'mean'])
    return out
