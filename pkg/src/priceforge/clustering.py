"""Clustering baselines for scenario generation.

Days are described by low-dimensional features (criteria a/b/c), z-scored so
that every feature counts equally, and grouped by k-means, k-medoids (PAM) or
Ward-linkage hierarchical clustering. Each cluster yields one representative
day (member mean or medoid) weighted by its share of days.

Everything is deterministic: k-means starts from farthest-point seeds and all
ties go to the lowest index.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.cluster.hierarchy import cut_tree, linkage

from .errors import BadK, BadKMax, EmptyInput
from .ingest import DayRecord, stack_days
from .profile_day import DayProfile, ScalingSpec, average_rows, expand_hours
from .stats import pstd

CRITERIA = ("a", "b", "c")
ALGORITHMS = ("kmeans", "kmedoids", "hier-m", "hier-c")
KMEANS_MAX_ITER = 300


@dataclass(frozen=True)
class FeatureMatrix:
    criterion: str
    columns: Tuple[str, ...]
    raw: np.ndarray
    values: np.ndarray
    shift: np.ndarray
    scale: np.ndarray

    @property
    def n(self) -> int:
        return self.values.shape[0]


def extract_features(days: Sequence[DayRecord], criterion: str) -> FeatureMatrix:
    """Per-day features: (a) DA mean; (b) DA mean, DA std; (c) DA mean, std of ID-DA."""
    if criterion not in CRITERIA:
        raise ValueError(f"criterion must be one of {CRITERIA}")
    days = list(days)
    if not days:
        raise EmptyInput("no days to cluster")
    da, id_ = stack_days(days)
    cols = [da.mean(axis=1)]
    names = ["da_mean"]
    if criterion == "b":
        cols.append(pstd(da, axis=1))
        names.append("da_std")
    elif criterion == "c":
        cols.append(pstd(id_ - expand_hours(da), axis=1))
        names.append("id_da_std")
    raw = np.column_stack(cols)
    shift = raw.mean(axis=0)
    spread = pstd(raw, axis=0)
    flat = spread <= 1e-12 * np.maximum(1.0, np.abs(shift))
    scale = np.where(flat, 1.0, spread)
    values = (raw - shift) / scale
    values[:, flat] = 0.0
    return FeatureMatrix(criterion, tuple(names), raw, values, shift, scale)


@dataclass(frozen=True)
class ClusterSet:
    algorithm: str
    k: int
    assignment: np.ndarray  # cluster id per day, clusters numbered by first member
    weights: np.ndarray
    representative: str  # "centroid" or "medoid"
    medoids: Optional[Tuple[int, ...]]  # row index of each cluster's medoid
    wcss: float

    def members(self, s: int) -> np.ndarray:
        return np.flatnonzero(self.assignment == s)

    def assignment_csv(self, days: Sequence[DayRecord]) -> str:
        lines = ["date,cluster"]
        for d, s in zip(days, self.assignment):
            lines.append(f"{d.date.isoformat() if d.date else d.day_index},{int(s) + 1}")
        return "\n".join(lines) + "\n"

    def weights_csv(self) -> str:
        lines = ["cluster,size,weight"]
        for s in range(self.k):
            lines.append(f"{s + 1},{self.members(s).size},{float(self.weights[s])!r}")
        return "\n".join(lines) + "\n"


def _sqdist(x: np.ndarray, centers: np.ndarray) -> np.ndarray:
    return ((x[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)


def _distance_matrix(x: np.ndarray) -> np.ndarray:
    return np.sqrt(_sqdist(x, x))


def _relabel(labels: np.ndarray) -> np.ndarray:
    order = {}
    for lab in labels:
        order.setdefault(int(lab), len(order))
    return np.array([order[int(lab)] for lab in labels], dtype=int)


def _wcss(x: np.ndarray, labels: np.ndarray, k: int) -> float:
    total = 0.0
    for s in range(k):
        pts = x[labels == s]
        if pts.size:
            total += float(((pts - pts.mean(axis=0)) ** 2).sum())
    return total


def _medoid_of(x: np.ndarray, members: np.ndarray) -> int:
    d = _distance_matrix(x[members]).sum(axis=1)
    return int(members[int(np.argmin(d))])


def _finish(algorithm, x, labels, representative, medoids=None) -> ClusterSet:
    labels = np.asarray(labels, dtype=int)
    old_ids = list(dict.fromkeys(int(v) for v in labels))
    new = _relabel(labels)
    k = len(old_ids)
    if medoids is not None:
        medoids = tuple(int(medoids[o]) for o in old_ids)
    elif representative == "medoid":
        medoids = tuple(_medoid_of(x, np.flatnonzero(new == s)) for s in range(k))
    counts = np.bincount(new, minlength=k).astype(float)
    weights = counts / counts.sum()
    return ClusterSet(algorithm, k, new, weights, representative, medoids, _wcss(x, new, k))


def _check_k(x: np.ndarray, k: int):
    if not isinstance(k, (int, np.integer)) or not 1 <= k <= x.shape[0]:
        raise BadK(f"k must be an integer in [1, {x.shape[0]}], got {k!r}")


def farthest_point_seeds(x: np.ndarray, k: int) -> List[int]:
    """First seed nearest the global mean, then repeatedly the farthest point."""
    first = int(np.argmin(((x - x.mean(axis=0)) ** 2).sum(axis=1)))
    seeds = [first]
    nearest = ((x - x[first]) ** 2).sum(axis=1)
    while len(seeds) < k:
        cand = nearest.copy()
        cand[seeds] = -1.0
        nxt = int(np.argmax(cand))
        seeds.append(nxt)
        nearest = np.minimum(nearest, ((x - x[nxt]) ** 2).sum(axis=1))
    return seeds


def kmeans(features: FeatureMatrix, k: int) -> ClusterSet:
    x = features.values
    _check_k(x, k)
    centers = x[farthest_point_seeds(x, k)].copy()
    labels = None
    for _ in range(KMEANS_MAX_ITER):
        new = np.argmin(_sqdist(x, centers), axis=1)
        for s in range(k):
            if not np.any(new == s):
                # refill an empty cluster with the point farthest from its centre
                dist = ((x - centers[new]) ** 2).sum(axis=1)
                sizes = np.bincount(new, minlength=k)
                dist[sizes[new] <= 1] = -1.0
                new[int(np.argmax(dist))] = s
        if labels is not None and np.array_equal(new, labels):
            break
        labels = new
        centers = np.vstack([x[labels == s].mean(axis=0) for s in range(k)])
    return _finish("kmeans", x, labels, "centroid")


def _pam_cost(D: np.ndarray, medoids: Sequence[int]) -> float:
    return float(D[:, list(medoids)].min(axis=1).sum())


def pam(D: np.ndarray, k: int) -> List[int]:
    """PAM BUILD then SWAP to a local optimum on distance matrix ``D``."""
    n = D.shape[0]
    medoids = [int(np.argmin(D.sum(axis=1)))]
    nearest = D[:, medoids[0]].copy()
    while len(medoids) < k:
        gains = np.maximum(nearest[:, None] - D, 0.0).sum(axis=0)
        gains[medoids] = -1.0
        nxt = int(np.argmax(gains))
        medoids.append(nxt)
        nearest = np.minimum(nearest, D[:, nxt])
    cost = _pam_cost(D, medoids)
    tol = 1e-12 * max(1.0, cost)
    while True:
        best = (cost, -1, -1)
        is_med = np.zeros(n, dtype=bool)
        is_med[medoids] = True
        for i in range(k):
            others = [m for j, m in enumerate(medoids) if j != i]
            base = D[:, others].min(axis=1) if others else np.full(n, np.inf)
            costs = np.minimum(base[:, None], D).sum(axis=0)
            costs[is_med] = np.inf
            o = int(np.argmin(costs))
            if costs[o] < best[0] - tol:
                best = (float(costs[o]), i, o)
        if best[1] < 0:
            return medoids
        cost = best[0]
        medoids[best[1]] = best[2]


def kmedoids(features: FeatureMatrix, k: int) -> ClusterSet:
    x = features.values
    _check_k(x, k)
    D = _distance_matrix(x)
    medoids = pam(D, k)
    labels = np.argmin(D[:, medoids], axis=1)
    return _finish("kmedoids", x, labels, "medoid", medoids=medoids)


def hierarchical(features: FeatureMatrix, k: int, representative: str = "centroid") -> ClusterSet:
    """Agglomerative Ward clustering cut into ``k`` groups."""
    if representative not in ("centroid", "medoid"):
        raise ValueError("representative must be 'centroid' or 'medoid'")
    x = features.values
    _check_k(x, k)
    if x.shape[0] == 1:
        labels = np.zeros(1, dtype=int)
    else:
        labels = cut_tree(linkage(x, method="ward"), n_clusters=k).reshape(-1)
    name = "hier-m" if representative == "medoid" else "hier-c"
    return _finish(name, x, labels, representative)


def cluster(features: FeatureMatrix, algorithm: str, k: int) -> ClusterSet:
    if algorithm == "kmeans":
        return kmeans(features, k)
    if algorithm == "kmedoids":
        return kmedoids(features, k)
    if algorithm == "hier-m":
        return hierarchical(features, k, "medoid")
    if algorithm == "hier-c":
        return hierarchical(features, k, "centroid")
    raise ValueError(f"algorithm must be one of {ALGORITHMS}")


def knee_index(curve: Sequence[float]) -> int:
    """0-based knee of a decreasing curve: largest gap below the end-point chord.

    Both axes are scaled to [0, 1]; if the curve never dips below the chord
    the first point is returned.
    """
    y = np.asarray(curve, dtype=float)
    if y.size < 2:
        return 0
    span = y.max() - y.min()
    if span <= 0:
        return 0
    yn = (y - y.min()) / span
    xn = np.linspace(0.0, 1.0, y.size)
    chord = yn[0] + (yn[-1] - yn[0]) * xn
    gap = chord - yn
    k = int(np.argmax(gap))
    return k if gap[k] > 1e-12 else 0


def wcss_curve(features: FeatureMatrix, algorithm: str, k_max: int) -> List[float]:
    return [cluster(features, algorithm, k).wcss for k in range(1, k_max + 1)]


def elbow_k(features: FeatureMatrix, algorithm: str, k_max: int = 10) -> int:
    if not isinstance(k_max, (int, np.integer)) or k_max < 2:
        raise BadKMax(f"k_max must be an integer >= 2, got {k_max!r}")
    k_max = min(k_max, features.n)
    if k_max < 2:
        return 1
    return knee_index(wcss_curve(features, algorithm, k_max)) + 1


def cluster_scenarios(cs: ClusterSet, days: Sequence[DayRecord]) -> List[Tuple[DayProfile, float]]:
    """Representative day per cluster with its weight; no scaling applied."""
    days = list(days)
    da, id_ = stack_days(days)
    out = []
    for s in range(cs.k):
        if cs.representative == "medoid":
            m = cs.medoids[s]
            rep_da, rep_id = da[m].copy(), id_[m].copy()
        else:
            members = cs.members(s)
            rep_da, rep_id = average_rows(da[members]), average_rows(id_[members])
        profile = DayProfile(
            rep_da,
            rep_id,
            rep_id - expand_hours(rep_da),
            ScalingSpec.unscaled().resolved(1.0, 1.0),
            float(np.mean(rep_da)),
            label=f"{cs.algorithm}-{s + 1}",
        )
        out.append((profile, float(cs.weights[s])))
    return out
