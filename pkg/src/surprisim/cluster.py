"""Spherical k-means, surprise-based assignment, and agreement metrics.

Clustering runs on unit-normalized copies of the vectors with cosine as the
affinity, which makes Lloyd's update the normalized cluster mean. After
k-means converges, assignments can be recomputed with the surprise score:
centroids act as queries and the element pool doubles as the ensemble, so a
centroid that is generically close to everything loses its pull.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError, UsageError
from .stats import StatsEstimator, _surprise_values, stats_from_similarities
from .vectors import EmbeddingSet, SimilarityKind, _pairwise_values


@dataclass(frozen=True)
class KMeansRun:
    centroids: np.ndarray
    assignments: np.ndarray
    iterations: int
    objective: float
    objective_history: tuple[float, ...]


@dataclass(frozen=True)
class ClusterResult:
    centroids: np.ndarray
    assignments_cosine: np.ndarray
    assignments_surprise: np.ndarray
    iterations: int
    seed: int


def _normalized_rows(matrix: np.ndarray) -> np.ndarray:
    norms = np.sqrt(np.sum(matrix * matrix, axis=1))
    if np.any(norms == 0.0):
        raise DataError(
            f"cosine clustering is undefined for a zero vector (row {int(np.argmin(norms))})"
        )
    return matrix / norms[:, None]


def _seed_centroids(X: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """k-means++ seeding with squared chord distance 2*(1 - cos)."""
    n = X.shape[0]
    chosen = [int(rng.integers(n))]
    d2 = np.clip(2.0 * (1.0 - X @ X[chosen[0]]), 0.0, None)
    for _ in range(1, k):
        total = float(d2.sum())
        if total <= 0.0:
            # all remaining mass sits on already-chosen points; pick uniformly
            remaining = np.setdiff1d(np.arange(n), np.asarray(chosen))
            nxt = int(remaining[rng.integers(remaining.size)])
        else:
            nxt = int(rng.choice(n, p=d2 / total))
        chosen.append(nxt)
        d2 = np.minimum(d2, np.clip(2.0 * (1.0 - X @ X[nxt]), 0.0, None))
    return X[chosen].copy()


def kmeans(
    elements: EmbeddingSet,
    k: int,
    seed: int = 0,
    max_iter: int = 300,
    tol: float = 1e-6,
) -> KMeansRun:
    """Lloyd iteration with max-cosine assignment and normalized-mean updates.

    Stops on an assignment fixpoint, when no centroid moves more than tol,
    or at max_iter. An emptied cluster is reseeded with the element that has
    the lowest cosine to its currently assigned centroid.
    """
    if k < 1 or k > len(elements):
        raise UsageError(f"k must lie in [1, {len(elements)}], got {k}")
    if max_iter < 1 or tol < 0.0:
        raise UsageError("max_iter must be >= 1 and tol >= 0")
    rng = np.random.default_rng(seed)
    X = _normalized_rows(elements.matrix)
    n = X.shape[0]
    centroids = _seed_centroids(X, k, rng)
    sims = X @ centroids.T
    assignments = np.argmax(sims, axis=1)
    history: list[float] = []
    iterations = 0
    for _ in range(max_iter):
        new_centroids = centroids.copy()
        empty: list[int] = []
        for j in range(k):
            members = X[assignments == j]
            if members.shape[0] == 0:
                empty.append(j)
                continue
            mean = members.mean(axis=0)
            norm = float(np.sqrt(np.sum(mean * mean)))
            if norm > 1e-12:
                new_centroids[j] = mean / norm
        if empty:
            fit = sims[np.arange(n), assignments].copy()
            for j in empty:
                worst = int(np.argmin(fit))
                new_centroids[j] = X[worst]
                fit[worst] = np.inf
        shift = float(np.max(np.sqrt(np.sum((new_centroids - centroids) ** 2, axis=1))))
        centroids = new_centroids
        sims = X @ centroids.T
        new_assignments = np.argmax(sims, axis=1)
        iterations += 1
        history.append(float(sims[np.arange(n), new_assignments].sum()))
        unchanged = bool(np.array_equal(new_assignments, assignments))
        assignments = new_assignments
        if unchanged or shift < tol:
            break
    objective = float(sims[np.arange(n), assignments].sum())
    return KMeansRun(centroids, assignments, iterations, objective, tuple(history))


def surprise_assign(
    elements: EmbeddingSet,
    centroids,
    estimator: StatsEstimator = StatsEstimator.GAUSSIAN,
) -> np.ndarray:
    """Assign each element to the centroid with the highest surprise score.

    The element pool itself is the ensemble for every centroid query, so
    per-centroid similarity baselines are divided out.
    """
    centroids = np.asarray(centroids, dtype=np.float64)
    if centroids.ndim != 2 or centroids.shape[0] < 1:
        raise DataError("centroid list must be a non-empty 2-D array")
    if centroids.shape[1] != elements.dimension:
        raise DataError(
            f"dimension mismatch: elements d={elements.dimension}, centroids d={centroids.shape[1]}"
        )
    sims = _pairwise_values(elements.matrix, centroids, SimilarityKind.COSINE)
    scores = np.empty_like(sims)
    for j in range(centroids.shape[0]):
        st = stats_from_similarities(sims[:, j], f"centroid-{j}", estimator)
        scores[:, j] = _surprise_values(sims[:, j], st.mu, st.sigma)
    return np.argmax(scores, axis=1)


def cluster_with_surprise(
    elements: EmbeddingSet,
    k: int,
    seed: int = 0,
    estimator: StatsEstimator = StatsEstimator.GAUSSIAN,
    max_iter: int = 300,
    tol: float = 1e-6,
) -> ClusterResult:
    run = kmeans(elements, k, seed=seed, max_iter=max_iter, tol=tol)
    surprise_labels = surprise_assign(elements, run.centroids, estimator)
    return ClusterResult(
        centroids=run.centroids,
        assignments_cosine=run.assignments,
        assignments_surprise=surprise_labels,
        iterations=run.iterations,
        seed=int(seed),
    )


def _as_labels(values, name: str) -> np.ndarray:
    arr = np.asarray(values).ravel()
    if arr.size == 0:
        raise DataError(f"{name} labeling must be non-empty")
    return arr


def _contingency(gold: np.ndarray, predicted: np.ndarray) -> np.ndarray:
    _, gi = np.unique(gold, return_inverse=True)
    _, pi = np.unique(predicted, return_inverse=True)
    table = np.zeros((gi.max() + 1, pi.max() + 1), dtype=np.int64)
    np.add.at(table, (gi, pi), 1)
    return table


def _entropy(counts: np.ndarray) -> float:
    total = counts.sum()
    probs = counts[counts > 0] / total
    return float(-np.sum(probs * np.log(probs)))


def v_measure(gold, predicted) -> float:
    """Harmonic mean of entropy-based homogeneity and completeness.

    A zero-entropy side counts as perfect for its criterion; both sides at
    zero give a v-measure of 0 by the usual convention.
    """
    g = _as_labels(gold, "gold")
    p = _as_labels(predicted, "predicted")
    if g.size != p.size:
        raise DataError("gold and predicted labelings must have equal length")
    table = _contingency(g, p).astype(np.float64)
    n = table.sum()
    h_class = _entropy(table.sum(axis=1))
    h_cluster = _entropy(table.sum(axis=0))
    # conditional entropies from the joint table
    cluster_sizes = table.sum(axis=0)
    class_sizes = table.sum(axis=1)
    nz = table > 0
    h_class_given_cluster = float(
        -np.sum(table[nz] / n * np.log(table[nz] / np.broadcast_to(cluster_sizes, table.shape)[nz]))
    )
    h_cluster_given_class = float(
        -np.sum(table[nz] / n * np.log(table[nz] / np.broadcast_to(class_sizes[:, None], table.shape)[nz]))
    )
    homogeneity = 1.0 if h_class == 0.0 else 1.0 - h_class_given_cluster / h_class
    completeness = 1.0 if h_cluster == 0.0 else 1.0 - h_cluster_given_class / h_cluster
    if homogeneity + completeness == 0.0:
        return 0.0
    return float(2.0 * homogeneity * completeness / (homogeneity + completeness))


def adjusted_rand(gold, predicted) -> float:
    """Pair-counting agreement, adjusted for chance; 1 means identical."""
    g = _as_labels(gold, "gold")
    p = _as_labels(predicted, "predicted")
    if g.size != p.size:
        raise DataError("gold and predicted labelings must have equal length")
    table = _contingency(g, p)

    def comb2(x):
        x = np.asarray(x, dtype=np.float64)
        return x * (x - 1.0) / 2.0

    sum_cells = float(comb2(table).sum())
    sum_rows = float(comb2(table.sum(axis=1)).sum())
    sum_cols = float(comb2(table.sum(axis=0)).sum())
    total = float(comb2(g.size))
    expected = sum_rows * sum_cols / total if total > 0 else 0.0
    maximum = 0.5 * (sum_rows + sum_cols)
    if maximum == expected:
        return 1.0
    return float((sum_cells - expected) / (maximum - expected))
