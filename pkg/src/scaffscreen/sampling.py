"""Cluster-balanced scaffold sampling.

Active scaffolds are fingerprinted, grouped by k-means (k chosen by mean
silhouette), and then sampled with per-cluster probabilities proportional
to inverse cluster size. Rare chemotypes are thereby drawn about as often
as dominant ones, countering the head-heavy scaffold distribution typical
of screening actives. Draws are with replacement: a cluster is picked from
the weight distribution, then one of its members uniformly.

k-means runs with k-means++ seeding, 10 restarts per k, at most 100 Lloyd
iterations, and stops once the largest centroid shift drops below 1e-6.
Distances are Euclidean over the raw 0/1 fingerprint vectors.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .chem.graph import MolGraph
from .chem.smiles import to_smiles
from .fingerprints import Fingerprint, fingerprint_matrix

__all__ = [
    "ClusterModel",
    "LibraryEntry",
    "SamplingWeights",
    "ScaffoldLibrary",
    "cluster_scaffolds",
    "sample_library",
    "sampling_weights",
    "silhouette",
    "write_library_csv",
]

KMEANS_RESTARTS = 10
KMEANS_MAX_ITER = 100
KMEANS_TOL = 1e-6
WEIGHT_EPSILON = 1e-8


@dataclass(frozen=True)
class ClusterModel:
    """Fitted clustering over scaffold fingerprints.

    ``degenerate`` marks the single-cluster fallback used when every
    fingerprint is identical; its silhouette is NaN.
    """

    k: int
    centroids: np.ndarray
    assignments: np.ndarray
    silhouette_score: float
    degenerate: bool = False

    @property
    def cluster_sizes(self) -> np.ndarray:
        return np.bincount(self.assignments, minlength=self.k)


@dataclass(frozen=True)
class SamplingWeights:
    counts: np.ndarray
    weights: np.ndarray
    probabilities: np.ndarray


@dataclass(frozen=True)
class LibraryEntry:
    scaffold: MolGraph
    cluster_id: int
    source_label: int
    source_index: int


@dataclass(frozen=True)
class ScaffoldLibrary:
    entries: tuple[LibraryEntry, ...] = field(default=())

    @property
    def size(self) -> int:
        return len(self.entries)

    def cluster_counts(self, k: int) -> np.ndarray:
        counts = np.zeros(k, dtype=np.int64)
        for entry in self.entries:
            counts[entry.cluster_id] += 1
        return counts


def _squared_distances(points: np.ndarray, centers: np.ndarray) -> np.ndarray:
    diff = points[:, None, :] - centers[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)


def _kmeans_plus_plus(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    m = points.shape[0]
    centers = np.empty((k, points.shape[1]))
    first = rng.integers(m)
    centers[0] = points[first]
    closest = _squared_distances(points, centers[:1])[:, 0]
    for c in range(1, k):
        total = closest.sum()
        if total <= 0.0:
            idx = rng.integers(m)
        else:
            idx = int(np.searchsorted(np.cumsum(closest / total), rng.random()))
            idx = min(idx, m - 1)
        centers[c] = points[idx]
        closest = np.minimum(closest, ((points - centers[c]) ** 2).sum(axis=1))
    return centers


def _lloyd(points: np.ndarray, centers: np.ndarray, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray, float]:
    k = centers.shape[0]
    for _ in range(KMEANS_MAX_ITER):
        dists = _squared_distances(points, centers)
        labels = dists.argmin(axis=1)
        updated = centers.copy()
        for c in range(k):
            members = points[labels == c]
            if len(members):
                updated[c] = members.mean(axis=0)
            else:
                # Re-seed an emptied cluster with the point farthest from
                # its current assignment.
                worst = int(dists.min(axis=1).argmax())
                updated[c] = points[worst]
        shift = np.sqrt(((updated - centers) ** 2).sum(axis=1)).max()
        centers = updated
        if shift < KMEANS_TOL:
            break
    dists = _squared_distances(points, centers)
    labels = dists.argmin(axis=1)
    inertia = float(dists[np.arange(len(points)), labels].sum())
    return centers, labels, inertia


def _kmeans(points: np.ndarray, k: int, seed_seq: np.random.SeedSequence) -> tuple[np.ndarray, np.ndarray]:
    best: tuple[float, np.ndarray, np.ndarray] | None = None
    for child in seed_seq.spawn(KMEANS_RESTARTS):
        rng = np.random.default_rng(child)
        centers = _kmeans_plus_plus(points, k, rng)
        centers, labels, inertia = _lloyd(points, centers, rng)
        if best is None or inertia < best[0]:
            best = (inertia, centers, labels)
    assert best is not None
    return best[1], best[2]


def silhouette(points: np.ndarray, assignments: np.ndarray) -> float:
    """Mean silhouette over all points; singleton clusters score zero."""
    points = np.asarray(points, dtype=np.float64)
    assignments = np.asarray(assignments)
    m = len(points)
    if m < 2:
        raise ValueError("silhouette needs at least two points")
    labels = np.unique(assignments)
    if len(labels) < 2:
        raise ValueError("silhouette needs at least two clusters")
    dists = np.sqrt(np.maximum(_squared_distances(points, points), 0.0))
    scores = np.zeros(m)
    for i in range(m):
        own = assignments[i]
        mask_own = assignments == own
        size_own = int(mask_own.sum())
        if size_own == 1:
            scores[i] = 0.0
            continue
        a = dists[i, mask_own].sum() / (size_own - 1)
        b = min(
            dists[i, assignments == other].mean()
            for other in labels
            if other != own
        )
        denom = max(a, b)
        scores[i] = 0.0 if denom == 0.0 else (b - a) / denom
    return float(scores.mean())


def cluster_scaffolds(
    fps: Sequence[Fingerprint],
    k_range: Sequence[int] | None = None,
    seed: int = 0,
) -> ClusterModel:
    """Cluster scaffold fingerprints, selecting k by mean silhouette.

    Needs at least three fingerprints. When every fingerprint is identical
    no clustering is meaningful, so a flagged single-cluster model comes
    back instead.
    """
    if len(fps) < 3:
        raise ValueError("clustering needs at least three fingerprints")
    points = fingerprint_matrix(fps)
    m = len(points)
    if k_range is None:
        k_range = range(2, min(20, m - 1) + 1)
    ks = sorted(set(int(k) for k in k_range))
    if not ks or ks[0] < 2 or ks[-1] > m - 1:
        raise ValueError(f"k_range must lie within [2, {m - 1}]")

    if (points == points[0]).all():
        return ClusterModel(
            k=1,
            centroids=points[:1].copy(),
            assignments=np.zeros(m, dtype=np.int64),
            silhouette_score=float("nan"),
            degenerate=True,
        )

    root = np.random.SeedSequence(seed)
    best: tuple[float, int, np.ndarray, np.ndarray] | None = None
    for k, child in zip(ks, root.spawn(len(ks))):
        centers, labels = _kmeans(points, k, child)
        if len(np.unique(labels)) < 2:
            continue
        score = silhouette(points, labels)
        # Ties prefer the smaller k.
        if best is None or score > best[0] + 1e-12:
            best = (score, k, centers, labels)
    if best is None:
        raise ValueError("no k in k_range produced two nonempty clusters")
    score, k, centers, labels = best
    return ClusterModel(
        k=k,
        centroids=centers,
        assignments=labels.astype(np.int64),
        silhouette_score=score,
    )


def sampling_weights(model: ClusterModel, epsilon: float = WEIGHT_EPSILON) -> SamplingWeights:
    """Inverse-size cluster weights, normalized to a distribution.

    Smaller clusters strictly outweigh larger ones; the epsilon only guards
    the division.
    """
    counts = model.cluster_sizes
    if (counts == 0).any():
        raise ValueError("every cluster must be nonempty")
    weights = 1.0 / (counts + epsilon)
    probabilities = weights / weights.sum()
    return SamplingWeights(counts=counts, weights=weights, probabilities=probabilities)


def sample_library(
    scaffolds: Sequence[MolGraph],
    model: ClusterModel,
    weights: SamplingWeights,
    n_draws: int,
    seed: int = 0,
    source_labels: Sequence[int] | None = None,
) -> ScaffoldLibrary:
    """Draw ``n_draws`` scaffolds with replacement, cluster-weighted.

    ``scaffolds`` must align with ``model.assignments``.
    """
    if n_draws < 1:
        raise ValueError("n_draws must be at least 1")
    if len(scaffolds) != len(model.assignments):
        raise ValueError("scaffolds and assignments are misaligned")
    labels = list(source_labels) if source_labels is not None else [1] * len(scaffolds)
    members: list[np.ndarray] = [
        np.flatnonzero(model.assignments == c) for c in range(model.k)
    ]
    rng = np.random.default_rng(seed)
    clusters = rng.choice(model.k, size=n_draws, p=weights.probabilities)
    entries = []
    for c in clusters:
        pick = int(members[c][rng.integers(len(members[c]))])
        entries.append(
            LibraryEntry(
                scaffold=scaffolds[pick],
                cluster_id=int(c),
                source_label=labels[pick],
                source_index=pick,
            )
        )
    return ScaffoldLibrary(entries=tuple(entries))


def write_library_csv(path, library: ScaffoldLibrary) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["scaffold_smiles", "cluster_id", "source_label"])
        for entry in library.entries:
            writer.writerow([to_smiles(entry.scaffold), entry.cluster_id, entry.source_label])
