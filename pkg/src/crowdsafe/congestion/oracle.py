"""Naive reference transliteration of the crowd congestion algorithm.

Deliberately independent of :mod:`crowdsafe.congestion.kmeans`: plain
lists, explicit loops, no numpy. Only ``k_dist`` and the seeded generator
are shared. Used to cross-check :func:`detect`.
"""

from crowdsafe.congestion.kmeans import ClusterAssignment, CongestionConfig, CongestionReport, k_dist
from crowdsafe.errors import InputError
from crowdsafe.geometry import GroundPoint
from crowdsafe.rng import SplitMix64


def _point_cent(data, k, seed, method):
    m = len(data)
    gen = SplitMix64(seed)
    if method == "uniform":
        idx = list(range(m))
        for i in range(k):
            j = i + gen.below(m - i)
            idx[i], idx[j] = idx[j], idx[i]
        picks = idx[:k]
    else:
        picks = [gen.below(m)]
        weight = []
        for i in range(m):
            d = k_dist(data[i], data[picks[0]])
            weight.append(d * d)
        while len(picks) < k:
            total = 0.0
            for w in weight:
                total += w
            pick = None
            if total == 0.0:
                rest = [i for i in range(m) if i not in picks]
                pick = rest[gen.below(len(rest))]
            else:
                u = gen.uniform() * total
                acc = 0.0
                for i in range(m):
                    acc += weight[i]
                    if acc > u:
                        pick = i
                        break
                if pick is None:
                    for i in range(m):
                        if weight[i] > 0:
                            pick = i
            picks.append(pick)
            for i in range(m):
                d = k_dist(data[i], data[pick])
                if d * d < weight[i]:
                    weight[i] = d * d
    return [list(data[i]) for i in picks]


def oracle_detect(points, cfg: CongestionConfig):
    data = []
    for p in points:
        if isinstance(p, GroundPoint):
            data.append((p.x, p.y))
        else:
            data.append((float(p[0]), float(p[1])))
    m = len(data)
    k = cfg.k
    if m < k:
        raise InputError(f"need at least k={k} points, got {m}")

    gather_point = _point_cent(data, k, cfg.seed, cfg.init)
    group_assment = [[0, 0.0] for _ in range(m)]
    group_change = True
    iterations = 0
    while group_change and iterations < cfg.max_iters:
        iterations += 1
        group_change = False
        for i in range(m):
            min_k_dist = float("inf")
            min_class = -1
            for j in range(k):
                k_dist_ji = k_dist(gather_point[j], data[i])
                if min_k_dist > k_dist_ji:
                    min_k_dist = k_dist_ji
                    min_class = j
            if group_assment[i][0] != min_class:
                group_change = True
            group_assment[i] = [min_class, min_k_dist]
        for center_i in range(k):
            group = [data[i] for i in range(m) if group_assment[i][0] == center_i]
            if len(group) > 0:
                sx = 0.0
                sy = 0.0
                for x, y in group:
                    sx += x
                    sy += y
                gather_point[center_i] = [sx / len(group), sy / len(group)]

    congestion_degree = []
    for cent_i in range(k):
        crowding_distances = []
        for i in range(m):
            if group_assment[i][0] == cent_i:
                crowding_distances.append(k_dist(gather_point[cent_i], data[i]))
        crowding_distances.sort()
        c_crowding_distances = crowding_distances[: cfg.c_neighbors]
        count_less_than = len([d for d in c_crowding_distances if d < cfg.safe_dist])
        if count_less_than > cfg.c_neighbors / cfg.crowding_factor:
            congestion_degree.append(cent_i)

    return CongestionReport(
        centroids=[GroundPoint(x, y) for x, y in gather_point],
        assignments=[ClusterAssignment(int(c), float(d)) for c, d in group_assment],
        congested_clusters=congestion_degree,
        iterations_used=iterations,
    )
