"""Unsupervised language categorization: K-means and quantile boundaries.

The K-means here is deliberately self-contained and fully deterministic:
k-means++ seeding from a seeded generator, Lloyd iterations to an assignment
fixpoint, lowest-index tie-breaking everywhere, and empty clusters repaired
by re-seeding with the worst-fitted point. Identical inputs give bit-identical
models, which the reporting pipeline relies on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InsufficientDataError
from .features import FeatureMatrix

MAX_LLOYD_ITERATIONS = 300


@dataclass(frozen=True, eq=False)
class ClusterModel:
    """A fitted K-means model over a feature matrix."""

    k: int
    centroids: np.ndarray
    assignments: dict[str, int]
    inertia: float
    seed: int
    iterations_run: int
    inertia_trace: tuple[float, ...]

    def __eq__(self, other) -> bool:
        if not isinstance(other, ClusterModel):
            return NotImplemented
        return (
            self.k == other.k
            and np.array_equal(self.centroids, other.centroids)
            and self.assignments == other.assignments
            and self.inertia == other.inertia
            and self.seed == other.seed
            and self.iterations_run == other.iterations_run
            and self.inertia_trace == other.inertia_trace
        )


@dataclass(frozen=True)
class Categorization:
    """A partition of languages into ordered coverage categories."""

    labels: dict[str, int]
    method: str
    boundaries: tuple[float, ...] | None = None
    category_order: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.method not in ("kmeans", "quantile"):
            raise ValueError(f"unknown categorization method {self.method!r}")
        used = sorted(set(self.labels.values()))
        if used and used != list(range(len(used))):
            raise ValueError(f"category indices must be contiguous from 0, got {used}")

    def num_categories(self) -> int:
        return len(set(self.labels.values()))


def _squared_distances(points: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    diff = points[:, None, :] - centroids[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)


def _kmeanspp_init(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = points.shape[0]
    centroids = np.empty((k, points.shape[1]), dtype=np.float64)
    first = int(rng.integers(n))
    centroids[0] = points[first]
    chosen = {first}
    d2 = ((points - centroids[0]) ** 2).sum(axis=1)
    for i in range(1, k):
        total = d2.sum()
        if total > 0:
            idx = int(rng.choice(n, p=d2 / total))
        else:
            # Every point coincides with a chosen centroid; take the lowest
            # unchosen index so the outcome stays deterministic.
            idx = next((j for j in range(n) if j not in chosen), first)
        centroids[i] = points[idx]
        chosen.add(idx)
        d2 = np.minimum(d2, ((points - centroids[i]) ** 2).sum(axis=1))
    return centroids


def _repair_empty_clusters(
    points: np.ndarray,
    centroids: np.ndarray,
    labels: np.ndarray,
    counts: np.ndarray,
) -> np.ndarray:
    """Re-seed each empty cluster with the point farthest from its centroid."""
    empty = np.flatnonzero(counts == 0)
    if empty.size == 0:
        return centroids
    dist = ((points - centroids[labels]) ** 2).sum(axis=1)
    for cluster in empty:
        worst = int(np.argmax(dist))
        centroids[cluster] = points[worst]
        dist[worst] = -np.inf
    return centroids


def _lloyd(
    points: np.ndarray, initial: np.ndarray, k: int
) -> tuple[np.ndarray, np.ndarray, float, int, list[float]]:
    centroids = initial.copy()
    prev_labels = None
    trace: list[float] = []
    iterations = 0
    while True:
        d2 = _squared_distances(points, centroids)
        labels = np.argmin(d2, axis=1)
        inertia = float(d2[np.arange(points.shape[0]), labels].sum())
        trace.append(inertia)
        iterations += 1
        if (prev_labels is not None and np.array_equal(labels, prev_labels)) or (
            iterations >= MAX_LLOYD_ITERATIONS
        ):
            return centroids, labels, inertia, iterations, trace
        counts = np.bincount(labels, minlength=k)
        new_centroids = np.empty_like(centroids)
        for c in range(k):
            if counts[c] > 0:
                new_centroids[c] = points[labels == c].mean(axis=0)
            else:
                new_centroids[c] = centroids[c]
        centroids = _repair_empty_clusters(points, new_centroids, labels, counts)
        prev_labels = labels


def kmeans(
    matrix: FeatureMatrix,
    k: int,
    seed: int = 42,
    restarts: int = 10,
) -> ClusterModel:
    """Fit K-means with k-means++ seeding, keeping the best of `restarts` runs.

    Restart ties are broken toward the lowest restart index; within a run,
    every tie (nearest centroid, farthest point) breaks toward the lowest
    index, so the result is a pure function of (matrix, k, seed, restarts).
    """
    if k <= 0:
        raise ValueError(f"k must be positive, got {k}")
    if restarts < 1:
        raise ValueError(f"restarts must be >= 1, got {restarts}")
    if seed < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")
    points = matrix.values
    if points.shape[0] < k:
        raise InsufficientDataError(
            f"need at least {k} rows for k={k}, matrix has {points.shape[0]}"
        )

    best: tuple[np.ndarray, np.ndarray, float, int, list[float]] | None = None
    for restart in range(restarts):
        rng = np.random.default_rng([seed, restart])
        initial = _kmeanspp_init(points, k, rng)
        result = _lloyd(points, initial, k)
        if best is None or result[2] < best[2]:
            best = result
    centroids, labels, inertia, iterations, trace = best
    assignments = {lang: int(c) for lang, c in zip(matrix.languages, labels)}
    return ClusterModel(
        k=k,
        centroids=centroids,
        assignments=assignments,
        inertia=inertia,
        seed=seed,
        iterations_run=iterations,
        inertia_trace=tuple(trace),
    )


def order_categories(
    model: ClusterModel,
    matrix: FeatureMatrix,
    zero_group: list[str] | None = None,
) -> Categorization:
    """Relabel clusters so category index rises with mean coverage.

    Raw cluster indices are sorted by centroid mean coordinate. When a
    zero-coverage group is re-attached it becomes category 0 and the active
    clusters shift up by one, so the lowest category always means "no
    coverage at all".
    """
    means = model.centroids.mean(axis=1)
    ranking = np.argsort(means, kind="stable")
    offset = 1 if zero_group else 0
    category_order = [0] * model.k
    for position, raw_index in enumerate(ranking):
        category_order[int(raw_index)] = position + offset
    labels = {
        lang: category_order[cluster] for lang, cluster in model.assignments.items()
    }
    for lang in zero_group or []:
        labels[lang] = 0
    return Categorization(
        labels=labels,
        method="kmeans",
        boundaries=None,
        category_order=tuple(category_order),
    )


def quantile_categorize(scores: dict[str, float], num_categories: int) -> Categorization:
    """Categorize languages by empirical quantile boundaries on a scalar score.

    Boundaries sit at the j/num_categories quantiles (linear interpolation);
    a language's raw label is the number of boundaries strictly below its
    score, then labels are compacted to a contiguous 0..m-1 range. Equal
    scores always share a label and labels are monotone in the score.
    """
    if num_categories < 1:
        raise ValueError(f"num_categories must be >= 1, got {num_categories}")
    if not scores:
        raise ValueError("scores must be non-empty")
    values = np.array(list(scores.values()), dtype=np.float64)
    quantiles = [j / num_categories for j in range(1, num_categories)]
    boundaries = tuple(float(q) for q in np.quantile(values, quantiles)) if quantiles else ()

    bounds = np.array(boundaries, dtype=np.float64)
    raw = {
        lang: int(np.searchsorted(bounds, score, side="left"))
        for lang, score in scores.items()
    }
    remap = {old: new for new, old in enumerate(sorted(set(raw.values())))}
    labels = {lang: remap[r] for lang, r in raw.items()}
    return Categorization(labels=labels, method="quantile", boundaries=boundaries)
