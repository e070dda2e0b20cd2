"""Seeded K-means clustering of ground points and centroid-distance congestion flags."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from crowdsafe.errors import ConfigurationError, InputError
from crowdsafe.geometry import GroundPoint
from crowdsafe.rng import SplitMix64

INIT_METHODS = ("uniform", "kmeans++")


@dataclass(frozen=True)
class CongestionConfig:
    """Clustering and flagging parameters.

    ``c_neighbors`` and ``crowding_factor`` have no published values; the
    defaults (5 and 2) are local choices. ``init`` selects how the initial
    centroids are drawn from the data.
    """

    k: int = 3
    c_neighbors: int = 5
    safe_dist: float = 0.7
    crowding_factor: float = 2.0
    max_iters: int = 100
    seed: int = 0
    init: str = "kmeans++"

    def __post_init__(self):
        if self.k < 1:
            raise ConfigurationError("k must be >= 1")
        if self.c_neighbors < 1:
            raise ConfigurationError("c_neighbors must be >= 1")
        if not self.safe_dist > 0:
            raise ConfigurationError("safe_dist must be positive")
        if not self.crowding_factor > 0:
            raise ConfigurationError("crowding_factor must be positive")
        if self.max_iters < 1:
            raise ConfigurationError("max_iters must be >= 1")
        if self.seed < 0:
            raise ConfigurationError("seed must be unsigned")
        if self.init not in INIT_METHODS:
            raise ConfigurationError(f"init must be one of {INIT_METHODS}")


@dataclass(frozen=True)
class ClusterAssignment:
    cluster_index: int
    dist_to_centroid: float


@dataclass(frozen=True)
class CongestionReport:
    centroids: list
    assignments: list
    congested_clusters: list
    iterations_used: int

    @property
    def labels(self):
        return [a.cluster_index for a in self.assignments]

    def members(self, cluster):
        return [i for i, a in enumerate(self.assignments) if a.cluster_index == cluster]


@dataclass
class ClusteringResult:
    centroids: list
    assignments: list
    iterations_used: int
    objective_trace: list = field(default_factory=list)


def _xy(p):
    if isinstance(p, GroundPoint):
        return p.x, p.y
    return float(p[0]), float(p[1])


def as_point_array(points):
    """(n, 2) float array from GroundPoints, pairs or an array."""
    if isinstance(points, np.ndarray):
        arr = np.asarray(points, dtype=np.float64)
    else:
        arr = np.array([_xy(p) for p in points], dtype=np.float64).reshape(-1, 2)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise InputError(f"points must be (n, 2), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InputError("points contain non-finite coordinates")
    return arr


def k_dist(p, q):
    """Euclidean distance between two ground points."""
    px, py = _xy(p)
    qx, qy = _xy(q)
    dx = px - qx
    dy = py - qy
    return math.sqrt(dx * dx + dy * dy)


def _pairwise(P, C):
    # same operation order as k_dist so both paths round identically
    dx = C[None, :, 0] - P[:, None, 0]
    dy = C[None, :, 1] - P[:, None, 1]
    return np.sqrt(dx * dx + dy * dy)


def _weighted_pick(rng, weights, taken):
    """Draw index ``i`` with probability proportional to ``weights[i]``."""
    cumulative = np.cumsum(weights)
    total = cumulative[-1]
    if total == 0.0:
        pool = [i for i in range(len(weights)) if i not in taken]
        return pool[rng.below(len(pool))]
    u = rng.uniform() * total
    hits = np.nonzero(cumulative > u)[0]
    if hits.size:
        return int(hits[0])
    return int(np.nonzero(weights > 0)[0][-1])


def init_centroid_indices(points, k, seed, method="uniform"):
    """Indices of the initial centroids, in draw order.

    ``uniform``: ``k`` distinct indices via ``SplitMix64(seed).sample_indices``.

    ``kmeans++``: the first index is ``below(n)``; each further index is
    drawn with probability proportional to the squared distance to the
    nearest centroid chosen so far (``u = uniform() * total``, pick the
    first index whose running sum exceeds ``u``). If every remaining
    weight is zero, an unchosen index is drawn uniformly.
    """
    P = as_point_array(points)
    n = len(P)
    if k < 1:
        raise InputError("k must be >= 1")
    if n < k:
        raise InputError(f"need at least k={k} points, got {n}")
    rng = SplitMix64(seed)
    if method == "uniform":
        return rng.sample_indices(n, k)
    if method != "kmeans++":
        raise ConfigurationError(f"unknown init method {method!r}")
    chosen = [rng.below(n)]
    d = _pairwise(P, P[chosen[0]][None, :])[:, 0]
    weights = d * d
    while len(chosen) < k:
        idx = _weighted_pick(rng, weights, set(chosen))
        chosen.append(idx)
        d = _pairwise(P, P[idx][None, :])[:, 0]
        weights = np.minimum(weights, d * d)
    return chosen


def init_centroids(points, k, seed, method="uniform"):
    P = as_point_array(points)
    return [GroundPoint(*P[i]) for i in init_centroid_indices(P, k, seed, method)]


def _sse(P, C, labels):
    diff = P - C[labels]
    return float(np.sum(diff * diff))


def cluster_crowd(points, k, seed=0, max_iters=100, init="kmeans++", initial_centroids=None):
    """Lloyd iteration following the assignment/update loop of the crowd algorithm.

    Assignments start at cluster 0 with distance 0, so a first pass that
    leaves every point in cluster 0 counts as unchanged. Each pass assigns
    every point to the first strictly nearest centroid, then moves each
    non-empty cluster's centroid to the mean of its members; empty
    clusters keep their centroid. The loop stops after a pass with no
    assignment change or after ``max_iters`` passes.

    ``objective_trace[t]`` is the sum of squared point-to-centroid
    distances after pass ``t + 1``.
    """
    P = as_point_array(points)
    n = len(P)
    if n < k:
        raise InputError(f"need at least k={k} points, got {n}")
    if max_iters < 1:
        raise ConfigurationError("max_iters must be >= 1")
    if initial_centroids is None:
        C = P[init_centroid_indices(P, k, seed, init)].copy()
    else:
        C = as_point_array(initial_centroids).copy()
        if len(C) != k:
            raise InputError(f"expected {k} initial centroids, got {len(C)}")

    labels = np.zeros(n, dtype=np.int64)
    dists = np.zeros(n)
    trace = []
    iterations = 0
    changed = True
    while changed and iterations < max_iters:
        iterations += 1
        D = _pairwise(P, C)
        new_labels = np.argmin(D, axis=1)
        changed = bool(np.any(new_labels != labels))
        labels = new_labels
        dists = D[np.arange(n), labels]

        counts = np.bincount(labels, minlength=k)
        sx = np.bincount(labels, weights=P[:, 0], minlength=k)
        sy = np.bincount(labels, weights=P[:, 1], minlength=k)
        nonempty = counts > 0
        C[nonempty, 0] = sx[nonempty] / counts[nonempty]
        C[nonempty, 1] = sy[nonempty] / counts[nonempty]
        trace.append(_sse(P, C, labels))

    return ClusteringResult(
        centroids=[GroundPoint(float(x), float(y)) for x, y in C],
        assignments=[ClusterAssignment(int(j), float(d)) for j, d in zip(labels, dists)],
        iterations_used=iterations,
        objective_trace=trace,
    )


def flag_congestion(centroids, assignments, points, cfg: CongestionConfig):
    """Indices of clusters whose ``c`` closest members are mostly inside ``safe_dist``.

    For cluster ``i`` the member-to-centroid distances are sorted, cut to
    the first ``c_neighbors``, and the ones strictly below ``safe_dist``
    counted. The cluster is flagged when that count exceeds
    ``c_neighbors / crowding_factor``.
    """
    P = as_point_array(points)
    if len(assignments) != len(P):
        raise InputError("one assignment per point is required")
    C = as_point_array(centroids)
    labels = np.array([a.cluster_index for a in assignments], dtype=np.int64)
    threshold = cfg.c_neighbors / cfg.crowding_factor
    flagged = []
    for i in range(len(C)):
        member_dists = np.sort(_pairwise(P[labels == i], C[i][None, :])[:, 0])
        nearest = member_dists[: cfg.c_neighbors]
        count_less_than = int(np.count_nonzero(nearest < cfg.safe_dist))
        if count_less_than > threshold:
            flagged.append(i)
    return flagged


def detect(points, cfg: CongestionConfig = CongestionConfig()):
    """Cluster the crowd and flag congested clusters."""
    P = as_point_array(points)
    if len(P) < cfg.k:
        raise InputError(f"need at least k={cfg.k} points, got {len(P)}")
    result = cluster_crowd(P, cfg.k, cfg.seed, cfg.max_iters, cfg.init)
    flagged = flag_congestion(result.centroids, result.assignments, P, cfg)
    return CongestionReport(result.centroids, result.assignments, flagged, result.iterations_used)
