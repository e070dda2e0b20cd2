"""Crowd congestion detection: K-means grouping plus nearest-member density flags."""

from crowdsafe.congestion.kmeans import (
    ClusterAssignment,
    ClusteringResult,
    CongestionConfig,
    CongestionReport,
    cluster_crowd,
    detect,
    flag_congestion,
    init_centroid_indices,
    init_centroids,
    k_dist,
)
from crowdsafe.congestion.oracle import oracle_detect

__all__ = [
    "ClusterAssignment", "ClusteringResult", "CongestionConfig", "CongestionReport",
    "cluster_crowd", "detect", "flag_congestion", "init_centroid_indices", "init_centroids",
    "k_dist", "oracle_detect",
]
