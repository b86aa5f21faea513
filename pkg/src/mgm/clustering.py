"""Clustering on a precomputed distance matrix.

Two routes are provided: spectral clustering on a Gaussian affinity built
from the distances, and k-means on a classical multidimensional-scaling
embedding of the distances. The k-means core is shared and fully
deterministic given a seed.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DegenerateAffinityError, DegenerateEmbeddingError
from .pipeline import DistanceMatrix

__all__ = [
    "ClusteringMethod",
    "ClusteringResult",
    "kmeans",
    "kmeans_euclidean",
    "spectral_cluster",
    "kmeans_on_distances",
    "cluster_distances",
    "classical_mds",
]

_KMEANS_RESTARTS = 10
_KMEANS_MAX_ITER = 300
_KMEANS_REL_TOL = 1e-6


class ClusteringMethod(enum.Enum):
    SPECTRAL = "spectral"
    KMEANS_MDS = "kmeans-mds"
    KMEANS_EUCLIDEAN = "kmeans"

    @classmethod
    def parse(cls, name: str) -> "ClusteringMethod":
        key = name.strip().lower().replace("_", "-")
        for method in cls:
            if method.value == key:
                return method
        raise ValueError(
            f"unknown clustering method {name!r}; expected one of "
            + ", ".join(m.value for m in cls)
        )


@dataclass(frozen=True)
class ClusteringResult:
    """Integer labels in [0, k) for every sample, plus how they were made."""

    labels: np.ndarray
    k: int
    method: ClusteringMethod
    seed: int

    def __post_init__(self) -> None:
        labels = np.asarray(self.labels, dtype=int)
        if labels.ndim != 1 or labels.size < 1:
            raise ValueError("labels must be a nonempty 1-d array")
        if self.k < 1:
            raise ValueError(f"k must be at least 1, got {self.k}")
        if labels.min() < 0 or labels.max() >= self.k:
            raise ValueError(f"labels must lie in [0, {self.k})")
        labels = labels.copy()
        labels.setflags(write=False)
        object.__setattr__(self, "labels", labels)

    def __len__(self) -> int:
        return self.labels.size


def _sq_dists_to(points: np.ndarray, centers: np.ndarray) -> np.ndarray:
    d2 = (
        np.sum(points**2, axis=1)[:, None]
        + np.sum(centers**2, axis=1)[None, :]
        - 2.0 * points @ centers.T
    )
    return np.maximum(d2, 0.0)


def _kmeans_pp_init(
    points: np.ndarray, k: int, rng: np.random.Generator
) -> np.ndarray:
    m = points.shape[0]
    centers = np.empty((k, points.shape[1]))
    centers[0] = points[int(rng.integers(m))]
    closest = _sq_dists_to(points, centers[:1])[:, 0]
    for c in range(1, k):
        total = float(closest.sum())
        if total <= 0.0:
            idx = int(rng.integers(m))
        else:
            idx = int(rng.choice(m, p=closest / total))
        centers[c] = points[idx]
        closest = np.minimum(closest, _sq_dists_to(points, centers[c : c + 1])[:, 0])
    return centers


def _lloyd(
    points: np.ndarray, k: int, rng: np.random.Generator
) -> tuple[np.ndarray, float]:
    m = points.shape[0]
    centers = _kmeans_pp_init(points, k, rng)
    prev_inertia = np.inf
    for _ in range(_KMEANS_MAX_ITER):
        d2 = _sq_dists_to(points, centers)
        labels = d2.argmin(axis=1)
        for c in range(k):
            if not np.any(labels == c):
                # Relocate an empty cluster to the worst-served point.
                costs = d2[np.arange(m), labels]
                labels[int(np.argmax(costs))] = c
        for c in range(k):
            centers[c] = points[labels == c].mean(axis=0)
        inertia = float(_sq_dists_to(points, centers)[np.arange(m), labels].sum())
        if prev_inertia - inertia <= _KMEANS_REL_TOL * max(inertia, 1e-300):
            break
        prev_inertia = inertia
    d2 = _sq_dists_to(points, centers)
    labels = d2.argmin(axis=1)
    inertia = float(d2[np.arange(m), labels].sum())
    return labels, inertia


def kmeans(
    points: np.ndarray, k: int, seed: int, restarts: int = _KMEANS_RESTARTS
) -> tuple[np.ndarray, float]:
    """k-means with k-means++ starts; the best of `restarts` runs wins.

    Each restart r draws from an independent generator seeded by (seed, r),
    and ties on inertia keep the earliest restart, so results depend only on
    (points, k, seed).
    """
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or points.shape[0] < 1:
        raise ValueError(f"points must be a nonempty 2-d array, got {points.shape}")
    m = points.shape[0]
    if not 1 <= k <= m:
        raise ConfigError(f"k must lie in [1, {m}], got {k}")
    if k == 1:
        center = points.mean(axis=0)
        inertia = float(np.sum((points - center) ** 2))
        return np.zeros(m, dtype=int), inertia
    best_labels, best_inertia = None, np.inf
    for r in range(restarts):
        rng = np.random.default_rng([seed, r])
        labels, inertia = _lloyd(points, k, rng)
        if inertia < best_inertia:
            best_labels, best_inertia = labels, inertia
    assert best_labels is not None
    return best_labels, best_inertia


def kmeans_euclidean(
    points: np.ndarray, k: int, seed: int = 0
) -> ClusteringResult:
    """k-means directly on coordinates; the baseline route."""
    labels, _ = kmeans(points, k, seed)
    return ClusteringResult(
        labels=labels, k=k, method=ClusteringMethod.KMEANS_EUCLIDEAN, seed=seed
    )


def spectral_cluster(d: DistanceMatrix, k: int, seed: int = 0) -> ClusteringResult:
    """Normalized spectral clustering of a distance matrix.

    The affinity is exp(-d^2 / (2 sigma^2)) with sigma the median
    off-diagonal distance. Rows of the bottom-k eigenvectors of the
    symmetric normalized Laplacian are unit-normalized and fed to k-means.
    """
    m = d.size
    if not 1 <= k <= m:
        raise ConfigError(f"k must lie in [1, {m}], got {k}")
    if k == 1:
        return ClusteringResult(
            labels=np.zeros(m, dtype=int), k=1, method=ClusteringMethod.SPECTRAL, seed=seed
        )
    off_diag = d.values[~np.eye(m, dtype=bool)]
    sigma = float(np.median(off_diag))
    if sigma <= 0.0:
        raise DegenerateAffinityError(
            "median pairwise distance is zero; the affinity scale is undefined"
        )
    affinity = np.exp(-(d.values**2) / (2.0 * sigma**2))
    degree = affinity.sum(axis=1)
    inv_sqrt = 1.0 / np.sqrt(degree)
    lap = np.eye(m) - affinity * np.outer(inv_sqrt, inv_sqrt)
    _, vecs = np.linalg.eigh(lap)
    emb = vecs[:, :k].copy()
    norms = np.linalg.norm(emb, axis=1)
    nonzero = norms > 0
    emb[nonzero] /= norms[nonzero, None]
    labels, _ = kmeans(emb, k, seed)
    return ClusteringResult(
        labels=labels, k=k, method=ClusteringMethod.SPECTRAL, seed=seed
    )


def classical_mds(d_values: np.ndarray, dim: int) -> np.ndarray:
    """Classical MDS coordinates of a distance matrix.

    Double-centers the squared distances and keeps eigenvectors with strictly
    positive eigenvalues, at most dim of them, scaled by sqrt(eigenvalue).
    The result may have fewer than dim columns; signs are fixed per column.
    """
    d = np.asarray(d_values, dtype=float)
    m = d.shape[0]
    b = -0.5 * (d**2)
    b = b - b.mean(axis=0)[None, :]
    b = b - b.mean(axis=1)[:, None]
    b = (b + b.T) / 2.0
    eigvals, eigvecs = np.linalg.eigh(b)
    order = np.argsort(eigvals)[::-1]
    keep = [i for i in order[:dim] if eigvals[i] > 0.0]
    coords = eigvecs[:, keep] * np.sqrt(eigvals[keep])
    if coords.shape[1] == 0:
        return np.empty((m, 0))
    idx = np.argmax(np.abs(coords), axis=0)
    signs = np.sign(coords[idx, np.arange(coords.shape[1])])
    signs[signs == 0] = 1.0
    return coords * signs


def kmeans_on_distances(
    d: DistanceMatrix, k: int, seed: int = 0, embed_dim: int | None = None
) -> ClusteringResult:
    """k-means on a classical-MDS embedding of the distance matrix.

    embed_dim defaults to k. A matrix whose centered squared distances have
    no positive eigenvalue cannot be embedded and is rejected.
    """
    m = d.size
    if not 1 <= k <= m:
        raise ConfigError(f"k must lie in [1, {m}], got {k}")
    if k == 1:
        return ClusteringResult(
            labels=np.zeros(m, dtype=int), k=1, method=ClusteringMethod.KMEANS_MDS, seed=seed
        )
    if embed_dim is None:
        embed_dim = min(k, m - 1)
    if not 1 <= embed_dim <= m - 1:
        raise ConfigError(f"embed_dim must lie in [1, {m - 1}], got {embed_dim}")
    coords = classical_mds(d.values, embed_dim)
    if coords.shape[1] == 0:
        raise DegenerateEmbeddingError(
            "no positive eigenvalue in the centered squared distances; "
            "the matrix admits no Euclidean embedding"
        )
    labels, _ = kmeans(coords, k, seed)
    return ClusteringResult(
        labels=labels, k=k, method=ClusteringMethod.KMEANS_MDS, seed=seed
    )


def cluster_distances(
    d: DistanceMatrix,
    method: ClusteringMethod,
    k: int,
    seed: int = 0,
    mds_dim: int | None = None,
) -> ClusteringResult:
    """Dispatch to the clustering route that consumes a distance matrix."""
    if method is ClusteringMethod.SPECTRAL:
        return spectral_cluster(d, k, seed)
    if method is ClusteringMethod.KMEANS_MDS:
        return kmeans_on_distances(d, k, seed, embed_dim=mds_dim)
    raise ConfigError(
        f"method {method.value!r} needs coordinates; choose 'spectral' or 'kmeans-mds'"
    )
