"""Categorization validation and comparison metrics, plus the log-log trend.

Conventions that the literature leaves open are pinned here: silhouette gives
singleton clusters a score of 0, the variance ratio follows the
Calinski-Harabasz form, and NMI normalizes by the arithmetic mean of the two
entropies (configurable, since reported values rarely state a convention).
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateFitError, UndefinedMetricError
from .features import FeatureMatrix

NMI_AVERAGES = ("arithmetic", "geometric", "min", "max")

RIGHT_DIVERGENT = "right_divergent"
LEFT_DIVERGENT = "left_divergent"
ALIGNED = "aligned"


@dataclass(frozen=True)
class Partition:
    """A labeling of languages; label values keep their native ids."""

    labels: dict[str, int]

    def __post_init__(self):
        if not self.labels:
            raise ValueError("partition must be non-empty")

    def keys(self) -> set[str]:
        return set(self.labels)

    def blocks(self) -> frozenset[frozenset[str]]:
        """The partition as a set of blocks, label names forgotten."""
        groups: dict[int, set[str]] = {}
        for key, label in self.labels.items():
            groups.setdefault(label, set()).add(key)
        return frozenset(frozenset(g) for g in groups.values())


@dataclass(frozen=True)
class TrendModel:
    """OLS fit of KG coverage against Wikipedia coverage in log space."""

    slope: float
    intercept: float
    residuals: dict[str, float]
    threshold: float

    def fitted(self, x: float) -> float:
        return self.slope * x + self.intercept


def _aligned_labels(matrix: FeatureMatrix, partition: Partition) -> np.ndarray:
    missing = [lang for lang in matrix.languages if lang not in partition.labels]
    if missing:
        raise ValueError(f"partition does not cover matrix rows: missing {missing}")
    return np.array([partition.labels[lang] for lang in matrix.languages])


def silhouette(matrix: FeatureMatrix, partition: Partition) -> float:
    """Mean silhouette score s(i) = (b(i) - a(i)) / max(a(i), b(i)).

    a(i) is the mean distance to the other members of i's cluster, b(i) the
    lowest mean distance to another cluster. Singletons contribute 0.
    """
    labels = _aligned_labels(matrix, partition)
    unique = np.unique(labels)
    if unique.size < 2:
        raise UndefinedMetricError("silhouette needs at least 2 clusters")
    points = matrix.values
    n = points.shape[0]
    diff = points[:, None, :] - points[None, :, :]
    dist = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))

    members = {c: np.flatnonzero(labels == c) for c in unique}
    scores = np.zeros(n)
    for i in range(n):
        own = members[labels[i]]
        if own.size == 1:
            continue
        a = dist[i, own[own != i]].mean()
        b = min(dist[i, members[c]].mean() for c in unique if c != labels[i])
        denom = max(a, b)
        scores[i] = (b - a) / denom if denom > 0 else 0.0
    return float(scores.mean())


def variance_ratio(matrix: FeatureMatrix, partition: Partition) -> float:
    """Calinski-Harabasz criterion: (BSS/(k-1)) / (WSS/(n-k)).

    Returns +infinity when every cluster collapses to a single coordinate
    (WSS = 0, perfect separation).
    """
    labels = _aligned_labels(matrix, partition)
    unique = np.unique(labels)
    k = unique.size
    n = labels.size
    if k < 2:
        raise ValueError("variance ratio needs at least 2 clusters")
    if n <= k:
        raise ValueError(f"variance ratio needs n > k, got n={n}, k={k}")
    points = matrix.values
    grand_mean = points.mean(axis=0)
    bss = 0.0
    wss = 0.0
    for c in unique:
        cluster = points[labels == c]
        mean_c = cluster.mean(axis=0)
        bss += cluster.shape[0] * float(((mean_c - grand_mean) ** 2).sum())
        wss += float(((cluster - mean_c) ** 2).sum())
    if wss == 0.0:
        return math.inf
    return (bss / (k - 1)) / (wss / (n - k))


def _check_same_keys(p1: Partition, p2: Partition) -> list[str]:
    k1, k2 = p1.keys(), p2.keys()
    if k1 != k2:
        only_1 = sorted(k1 - k2)
        only_2 = sorted(k2 - k1)
        raise ValueError(
            f"partitions cover different keys (only in first: {only_1}, "
            f"only in second: {only_2})"
        )
    return sorted(k1)


def _contingency(p1: Partition, p2: Partition, keys: list[str]) -> dict[tuple[int, int], int]:
    table: Counter[tuple[int, int]] = Counter()
    for key in keys:
        table[(p1.labels[key], p2.labels[key])] += 1
    return dict(table)


def _comb2(x: int) -> int:
    return x * (x - 1) // 2


def adjusted_rand_index(p1: Partition, p2: Partition) -> float:
    """Chance-corrected pair-counting agreement between two partitions."""
    keys = _check_same_keys(p1, p2)
    n = len(keys)
    if n < 2:
        return 1.0
    table = _contingency(p1, p2, keys)
    row_sums = Counter()
    col_sums = Counter()
    for (a, b), count in table.items():
        row_sums[a] += count
        col_sums[b] += count
    index = sum(_comb2(c) for c in table.values())
    sum_a = sum(_comb2(c) for c in row_sums.values())
    sum_b = sum(_comb2(c) for c in col_sums.values())
    expected = sum_a * sum_b / _comb2(n)
    max_index = (sum_a + sum_b) / 2
    if max_index == expected:
        # Both partitions trivial in the same way; agreement is all-or-nothing.
        return 1.0 if p1.blocks() == p2.blocks() else 0.0
    return (index - expected) / (max_index - expected)


def normalized_mutual_information(
    p1: Partition, p2: Partition, average: str = "arithmetic"
) -> float:
    """Mutual information normalized by the averaged label entropies.

    Entropies use natural logarithms. Two trivial (zero-entropy) partitions
    score 1; the result is clipped to [0, 1] against float noise.
    """
    if average not in NMI_AVERAGES:
        raise ValueError(f"average must be one of {NMI_AVERAGES}, got {average!r}")
    keys = _check_same_keys(p1, p2)
    n = len(keys)
    table = _contingency(p1, p2, keys)
    row_sums = Counter()
    col_sums = Counter()
    for (a, b), count in table.items():
        row_sums[a] += count
        col_sums[b] += count

    def entropy(counts) -> float:
        return -sum((c / n) * math.log(c / n) for c in counts if c > 0)

    h1 = entropy(row_sums.values())
    h2 = entropy(col_sums.values())
    if h1 == 0.0 and h2 == 0.0:
        return 1.0
    mutual = 0.0
    for (a, b), count in table.items():
        p_ab = count / n
        mutual += p_ab * math.log(p_ab / ((row_sums[a] / n) * (col_sums[b] / n)))
    if average == "arithmetic":
        denom = (h1 + h2) / 2
    elif average == "geometric":
        denom = math.sqrt(h1 * h2)
    elif average == "min":
        denom = min(h1, h2)
    else:
        denom = max(h1, h2)
    if denom == 0.0:
        return 0.0
    return min(1.0, max(0.0, mutual / denom))


def fit_trend(matrix: FeatureMatrix, threshold: float | None = None) -> TrendModel:
    """Ordinary least squares y = slope*x + intercept over a 2-column matrix.

    Column 0 is the Wikipedia (x) variable, column 1 the KG (y) variable,
    both already in log space. The divergence threshold defaults to one
    sample standard deviation of the residuals.
    """
    if len(matrix.variables) != 2:
        raise ValueError(
            f"trend fitting needs exactly 2 variables, got {len(matrix.variables)}"
        )
    x = matrix.values[:, 0]
    y = matrix.values[:, 1]
    if np.unique(x).size < 2:
        raise DegenerateFitError("all x values are equal; cannot fit a trend")
    x_mean = x.mean()
    y_mean = y.mean()
    slope = float(((x - x_mean) * (y - y_mean)).sum() / ((x - x_mean) ** 2).sum())
    intercept = float(y_mean - slope * x_mean)
    residual_values = y - (slope * x + intercept)
    residuals = {
        lang: float(r) for lang, r in zip(matrix.languages, residual_values)
    }
    if threshold is None:
        threshold = float(np.std(residual_values, ddof=1)) if len(residuals) > 1 else 0.0
    return TrendModel(slope=slope, intercept=intercept, residuals=residuals,
                      threshold=threshold)


def classify_divergence(trend: TrendModel, language: str) -> str:
    """Classify one language against the fitted trend.

    Below the line (negative residual: strong Wikipedia, weak KG) is
    right-divergent; above it is left-divergent; within the threshold band
    is aligned.
    """
    if language not in trend.residuals:
        raise ValueError(f"language {language!r} has no residual in this trend")
    residual = trend.residuals[language]
    if residual < -trend.threshold:
        return RIGHT_DIVERGENT
    if residual > trend.threshold:
        return LEFT_DIVERGENT
    return ALIGNED
