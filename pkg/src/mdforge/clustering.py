"""Topic detection: threshold-based community clustering of sentence embeddings.

Clusters are found greedily: every sentence whose similarity neighborhood
reaches the minimum size is a candidate anchor; candidates are visited by
descending neighborhood size (ties to the smaller index) and claim all
still-unassigned neighbors; communities that shrank below the minimum
size through contention are dropped. Results are pure functions of the
similarity matrix — every tie-break is deterministic.

The inner assignment sweep runs on a compiled kernel when the extension
built, with a numpy fallback selected at import (see community_backend()).
Override with MDFORGE_COMMUNITY_BACKEND=compiled|python.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

__all__ = [
    "TopicCluster",
    "DegenerateCentroidError",
    "cosine_similarity",
    "centroid",
    "community_cluster",
    "top_k_clusters",
    "community_backend",
]

_ENV_BACKEND = "MDFORGE_COMMUNITY_BACKEND"


def _load_backend():
    choice = os.environ.get(_ENV_BACKEND, "auto")
    if choice not in ("auto", "compiled", "python"):
        raise ValueError(f"{_ENV_BACKEND} must be auto, compiled, or python")
    if choice in ("auto", "compiled"):
        try:
            from . import _community_core

            return _community_core.greedy_assign, "compiled"
        except ImportError:
            if choice == "compiled":
                raise
    from . import _community_py

    return _community_py.greedy_assign, "python"


_greedy_assign, _BACKEND_NAME = _load_backend()


def community_backend() -> str:
    """Name of the active assignment kernel: "compiled" or "python"."""
    return _BACKEND_NAME


class DegenerateCentroidError(ValueError):
    """Member vectors cancel out; the mean has no direction."""


@dataclass(frozen=True, eq=False)
class TopicCluster:
    """A set of topic-aligned sentences, addressed by flat sentence index.

    members are ordered by similarity to the anchor, descending (ties to
    the smaller index); the anchor is always a member.
    """

    anchor: int
    members: tuple[int, ...]
    centroid: np.ndarray = field(repr=False)

    @property
    def size(self) -> int:
        return len(self.members)


def cosine_similarity(a: np.ndarray, b: np.ndarray) -> float:
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return float(np.dot(a, b))


def centroid(members: Sequence[int], embeddings: np.ndarray) -> np.ndarray:
    """Unit-normalized arithmetic mean of the member vectors.

    Raises DegenerateCentroidError when the mean is (numerically) the zero
    vector; callers fall back to the anchor embedding.
    """
    if len(members) == 0:
        raise ValueError("centroid requires at least one member")
    mean = embeddings[np.asarray(members, dtype=np.int64)].mean(axis=0)
    norm = np.linalg.norm(mean)
    if norm < 1e-12:
        raise DegenerateCentroidError("member vectors cancel out")
    return mean / norm


def _neighborhoods(
    embeddings: np.ndarray, threshold: float
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """CSR neighbor lists N(i) = {j : sim(i, j) >= threshold}, i included.

    The similarity matrix is computed blockwise so memory stays
    O(block x n) regardless of cluster size.
    """
    n = embeddings.shape[0]
    block = max(16, min(2048, 4_000_000 // max(n, 1)))
    counts = np.empty(n, dtype=np.int64)
    chunks: list[np.ndarray] = []
    for start in range(0, n, block):
        stop = min(start + block, n)
        sims = embeddings[start:stop] @ embeddings.T
        mask = sims >= threshold
        # self-similarity of a unit vector is 1.0 but guard against
        # float drift pushing it a hair under a high threshold
        mask[np.arange(stop - start), np.arange(start, stop)] = True
        for row in range(stop - start):
            neigh = np.nonzero(mask[row])[0].astype(np.int64)
            counts[start + row] = neigh.shape[0]
            chunks.append(neigh)
    indices = np.concatenate(chunks) if chunks else np.empty(0, dtype=np.int64)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    return indptr, indices, counts


def community_cluster(
    embeddings: np.ndarray, threshold: float, min_size: int
) -> list[TopicCluster]:
    """Find topic communities among unit-norm embeddings.

    Returned clusters are sorted by size descending, ties to the smaller
    anchor index; member sets are disjoint. May return an empty list.
    """
    embeddings = np.ascontiguousarray(embeddings, dtype=np.float64)
    if embeddings.ndim != 2 or embeddings.shape[0] < 1:
        raise ValueError("embeddings must be a non-empty (n, dim) array")
    if not 0.0 < threshold < 1.0:
        raise ValueError("threshold must be in (0, 1)")
    if min_size < 1:
        raise ValueError("min_size must be >= 1")

    n = embeddings.shape[0]
    indptr, indices, counts = _neighborhoods(embeddings, threshold)

    candidates = np.nonzero(counts >= min_size)[0].astype(np.int64)
    if candidates.shape[0] == 0:
        return []
    order = candidates[np.lexsort((candidates, -counts[candidates]))]
    labels = _greedy_assign(indptr, indices, order, n)

    # group members by anchor in one stable pass
    assigned = np.nonzero(labels != -1)[0]
    by_label = assigned[np.argsort(labels[assigned], kind="stable")]
    sorted_labels = labels[by_label]
    bounds = np.nonzero(np.diff(sorted_labels))[0] + 1
    groups = np.split(by_label, bounds)

    clusters: list[TopicCluster] = []
    for group in groups:
        anchor = int(labels[group[0]])
        if group.shape[0] < min_size:
            continue
        sims = embeddings[group] @ embeddings[anchor]
        members = group[np.lexsort((group, -sims))]
        try:
            center = centroid(members, embeddings)
        except DegenerateCentroidError:
            center = embeddings[anchor].copy()
        clusters.append(TopicCluster(anchor, tuple(int(m) for m in members), center))
    clusters.sort(key=lambda c: (-c.size, c.anchor))
    return clusters


def top_k_clusters(clusters: list[TopicCluster], k: int) -> list[TopicCluster]:
    """First min(k, len) clusters; input is already size-sorted."""
    if k < 0:
        raise ValueError("k must be >= 0")
    return clusters[:k]
