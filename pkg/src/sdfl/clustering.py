"""Geographic cluster formation and rotating head selection.

Clustering is deterministic k-means over worker (x, y) coordinates with
seeded farthest-point initialization, so a (workers, k, seed) triple always
yields the same partition.  Head selection is a seeded uniform draw that is
re-drawn once per rotation period and is otherwise stable, independent of
when within the period it is queried.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .learner import CORRUPTION_MODES
from .seeds import substream

HONEST = "honest"

MAX_LLOYD_ITERATIONS = 50


class ClusteringError(Exception):
    pass


class TooManyClusters(ClusteringError):
    pass


class UnknownCluster(ClusteringError):
    pass


@dataclass
class WorkerProfile:
    id: str
    location: tuple[float, float]
    honesty: str = HONEST              # or a corruption mode applied to sent weights
    corruption_sigma: float = 1.0      # noise scale when honesty is gaussian_noise
    speed_factor: float = 1.0          # training-duration multiplier

    def __post_init__(self):
        if not self.id:
            raise ValueError("worker id must be non-empty")
        if self.speed_factor <= 0:
            raise ValueError(f"{self.id}: speed_factor must be > 0")
        if self.corruption_sigma < 0:
            raise ValueError(f"{self.id}: corruption_sigma must be >= 0")
        if self.honesty != HONEST and self.honesty not in CORRUPTION_MODES:
            raise ValueError(f"{self.id}: unknown honesty value {self.honesty!r}")
        if len(self.location) != 2:
            raise ValueError(f"{self.id}: location must be an (x, y) pair")


@dataclass
class ClusterAssignment:
    clusters: dict[int, list[str]]   # cluster id -> member ids, ascending
    heads: dict[int, str]
    round_formed: int = 1

    def to_json_dict(self) -> dict:
        return {
            "clusters": [
                {"id": cl, "head": self.heads[cl], "members": list(self.clusters[cl])}
                for cl in sorted(self.clusters)
            ],
            "round": self.round_formed,
        }

    def cluster_of(self, worker: str) -> int:
        for cl, members in self.clusters.items():
            if worker in members:
                return cl
        raise UnknownCluster(f"worker {worker!r} not assigned")


def _farthest_point_init(points: np.ndarray, k: int, rng) -> np.ndarray:
    """First centroid drawn at random, the rest greedily maximally spread."""
    chosen = [int(rng.integers(points.shape[0]))]
    while len(chosen) < k:
        d2 = np.min(
            [np.sum((points - points[i]) ** 2, axis=1) for i in chosen], axis=0
        )
        chosen.append(int(np.argmax(d2)))
    return points[chosen].copy()


def _repair_empty(assign: np.ndarray, points: np.ndarray, k: int) -> None:
    """Give every empty cluster the farthest point of the currently largest one."""
    for empty in range(k):
        if np.any(assign == empty):
            continue
        sizes = np.bincount(assign, minlength=k)
        donor = int(np.argmax(sizes))
        members = np.flatnonzero(assign == donor)
        center = points[members].mean(axis=0)
        far = members[int(np.argmax(np.sum((points[members] - center) ** 2, axis=1)))]
        assign[far] = empty


def form_clusters(
    workers: list[WorkerProfile], num_clusters: int, seed: int, round_formed: int = 1
) -> ClusterAssignment:
    """Partition workers into num_clusters geographic clusters."""
    if num_clusters < 1:
        raise TooManyClusters("num_clusters must be >= 1")
    if num_clusters > len(workers):
        raise TooManyClusters(
            f"cannot split {len(workers)} workers into {num_clusters} clusters"
        )
    ids = [w.id for w in workers]
    if len(set(ids)) != len(ids):
        raise ClusteringError("worker ids must be unique")
    points = np.array([w.location for w in workers], dtype=np.float64)

    rng = substream(seed, "kmeans")
    centroids = _farthest_point_init(points, num_clusters, rng)
    assign = None
    for _ in range(MAX_LLOYD_ITERATIONS):
        d2 = ((points[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
        new_assign = np.argmin(d2, axis=1)
        _repair_empty(new_assign, points, num_clusters)
        if assign is not None and np.array_equal(new_assign, assign):
            break
        assign = new_assign
        centroids = np.array(
            [points[assign == c].mean(axis=0) for c in range(num_clusters)]
        )

    clusters = {
        c: sorted(ids[i] for i in np.flatnonzero(assign == c))
        for c in range(num_clusters)
    }
    heads = {
        c: clusters[c][int(substream(seed, "head", c, 0).integers(len(clusters[c])))]
        for c in clusters
    }
    return ClusterAssignment(clusters, heads, round_formed)


def select_head(
    assignment: ClusterAssignment,
    cluster: int,
    round_: int,
    rotation_period: int,
    seed: int,
) -> str:
    """Seeded uniform head draw, stable within each rotation period."""
    if rotation_period < 1:
        raise ValueError("rotation_period must be >= 1")
    if cluster not in assignment.clusters:
        raise UnknownCluster(f"no cluster {cluster!r}")
    members = assignment.clusters[cluster]
    period = round_ // rotation_period
    idx = int(substream(seed, "head", cluster, period).integers(len(members)))
    return members[idx]
