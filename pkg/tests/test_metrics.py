from __future__ import annotations

import itertools
import math

import numpy as np
import pytest

from lodcoverage.errors import DegenerateFitError, UndefinedMetricError
from lodcoverage.metrics import (
    ALIGNED,
    LEFT_DIVERGENT,
    RIGHT_DIVERGENT,
    Partition,
    adjusted_rand_index,
    classify_divergence,
    fit_trend,
    normalized_mutual_information,
    silhouette,
    variance_ratio,
)

from .conftest import make_matrix
from .oracles import (
    all_partitions,
    ari_oracle,
    nmi_oracle,
    ols_oracle,
    silhouette_oracle,
    variance_ratio_oracle,
)

FOUR_POINTS = [(0.0, 0.0), (0.0, 2.0), (10.0, 0.0), (10.0, 2.0)]
FOUR_LABELS = {"l000": 0, "l001": 0, "l002": 1, "l003": 1}


def partition_from(labels: dict) -> Partition:
    return Partition(dict(labels))


class TestSilhouette:
    def test_four_point_anchor(self):
        matrix = make_matrix(FOUR_POINTS)
        value = silhouette(matrix, partition_from(FOUR_LABELS))
        assert value == pytest.approx(0.8020, abs=1e-3)
        assert value == pytest.approx(
            silhouette_oracle(FOUR_POINTS, [0, 0, 1, 1]), abs=1e-9
        )

    def test_two_singletons(self):
        matrix = make_matrix([(0.0,), (5.0,)])
        assert silhouette(matrix, partition_from({"l000": 0, "l001": 1})) == 0.0

    def test_duplicates_split_across_colocated_clusters(self):
        points = [(1.0, 1.0)] * 3 + [(1.0, 1.0)] * 3
        labels = [0, 0, 0, 1, 1, 1]
        matrix = make_matrix(points)
        value = silhouette(
            matrix, partition_from({f"l{i:03d}": l for i, l in enumerate(labels)})
        )
        assert value <= 0.0
        assert value == pytest.approx(silhouette_oracle(points, labels), abs=1e-9)

    def test_single_cluster_undefined(self):
        matrix = make_matrix([(0.0,), (1.0,)])
        with pytest.raises(UndefinedMetricError):
            silhouette(matrix, partition_from({"l000": 0, "l001": 0}))

    def test_partition_must_cover_rows(self):
        matrix = make_matrix([(0.0,), (1.0,)])
        with pytest.raises(ValueError, match="missing"):
            silhouette(matrix, partition_from({"l000": 0}))

    def test_scale_and_translation_invariance(self):
        rng = np.random.default_rng(31)
        points = rng.random((12, 2))
        labels = list(rng.integers(0, 3, size=12))
        part = partition_from({f"l{i:03d}": int(l) for i, l in enumerate(labels)})
        base = silhouette(make_matrix(points), part)
        scaled = silhouette(make_matrix(points * 7.5), part)
        shifted = silhouette(make_matrix(points + np.array([100.0, -40.0])), part)
        assert scaled == pytest.approx(base, abs=1e-9)
        assert shifted == pytest.approx(base, abs=1e-9)

    def test_matches_oracle_on_random_instances(self):
        rng = np.random.default_rng(32)
        for _ in range(100):
            n = int(rng.integers(3, 9))
            points = [tuple(map(float, rng.integers(-5, 6, size=2))) for _ in range(n)]
            labels = [int(l) for l in rng.integers(0, 3, size=n)]
            if len(set(labels)) < 2:
                labels[0] = (labels[0] + 1) % 3
            matrix = make_matrix(points)
            part = partition_from(
                {f"l{i:03d}": labels[i] for i in range(n)}
            )
            assert silhouette(matrix, part) == pytest.approx(
                silhouette_oracle(points, labels), abs=1e-9
            )


class TestVarianceRatio:
    def test_four_point_anchor_is_exactly_50(self):
        matrix = make_matrix(FOUR_POINTS)
        assert variance_ratio(matrix, partition_from(FOUR_LABELS)) == 50.0

    def test_perfect_separation_sentinel(self):
        points = [(0.0, 0.0), (0.0, 0.0), (9.0, 9.0), (9.0, 9.0), (9.0, 9.0)]
        labels = {f"l{i:03d}": int(i >= 2) for i in range(5)}
        assert variance_ratio(make_matrix(points), partition_from(labels)) == math.inf

    def test_true_labels_beat_random_labels(self):
        rng = np.random.default_rng(33)
        blob1 = rng.normal(0, 1, size=(15, 2))
        blob2 = rng.normal(20, 1, size=(15, 2))
        points = np.vstack([blob1, blob2])
        matrix = make_matrix(points)
        truth = {f"l{i:03d}": int(i >= 15) for i in range(30)}
        shuffled = list(truth.values())
        rng.shuffle(shuffled)
        random_labels = {f"l{i:03d}": shuffled[i] for i in range(30)}
        assert variance_ratio(matrix, partition_from(truth)) > variance_ratio(
            matrix, partition_from(random_labels)
        )

    def test_strictly_increases_with_separation(self):
        previous = 0.0
        for distance in [10.0, 20.0, 40.0]:
            points = [(0.0, 0.0), (0.0, 2.0), (distance, 0.0), (distance, 2.0)]
            value = variance_ratio(make_matrix(points), partition_from(FOUR_LABELS))
            assert value > previous
            previous = value

    def test_argument_errors(self):
        matrix = make_matrix([(0.0,), (1.0,)])
        with pytest.raises(ValueError, match="n > k"):
            variance_ratio(matrix, partition_from({"l000": 0, "l001": 1}))
        matrix3 = make_matrix([(0.0,), (1.0,), (2.0,)])
        with pytest.raises(ValueError, match="2 clusters"):
            variance_ratio(matrix3, partition_from({"l000": 0, "l001": 0, "l002": 0}))

    def test_matches_oracle_on_random_instances(self):
        rng = np.random.default_rng(34)
        for _ in range(100):
            n = int(rng.integers(4, 9))
            k = int(rng.integers(2, min(n, 4)))
            points = [tuple(map(float, rng.normal(0, 3, size=2))) for _ in range(n)]
            labels = [int(l) for l in rng.integers(0, k, size=n)]
            labels[:k] = list(range(k))  # ensure k non-empty clusters
            if n <= len(set(labels)):
                continue
            matrix = make_matrix(points)
            part = partition_from({f"l{i:03d}": labels[i] for i in range(n)})
            assert variance_ratio(matrix, part) == pytest.approx(
                variance_ratio_oracle(points, labels), abs=1e-9
            )


class TestAdjustedRandIndex:
    def test_identity(self):
        p = partition_from({"a": 0, "b": 0, "c": 1, "d": 2})
        assert adjusted_rand_index(p, p) == 1.0

    def test_split_vs_lump_is_zero(self):
        p1 = partition_from({"a": 0, "b": 0, "c": 1, "d": 1})
        p2 = partition_from({"a": 7, "b": 7, "c": 7, "d": 7})
        assert adjusted_rand_index(p1, p2) == 0.0

    def test_label_permutation_invariance(self):
        p1 = partition_from({"a": 0, "b": 0, "c": 1, "d": 2})
        p2 = partition_from({"a": 5, "b": 5, "c": 9, "d": 1})
        assert adjusted_rand_index(p1, p2) == 1.0

    def test_symmetry(self):
        p1 = partition_from({"a": 0, "b": 1, "c": 0, "d": 1})
        p2 = partition_from({"a": 0, "b": 0, "c": 1, "d": 1})
        assert adjusted_rand_index(p1, p2) == adjusted_rand_index(p2, p1)

    def test_key_mismatch_lists_missing(self):
        p1 = partition_from({"a": 0, "b": 1})
        p2 = partition_from({"a": 0, "c": 1})
        with pytest.raises(ValueError, match="'b'"):
            adjusted_rand_index(p1, p2)

    def test_both_trivial_same_way(self):
        singletons1 = partition_from({"a": 0, "b": 1, "c": 2})
        singletons2 = partition_from({"a": 5, "b": 6, "c": 7})
        assert adjusted_rand_index(singletons1, singletons2) == 1.0

    def test_exhaustive_partition_pairs_of_four(self):
        keys = ["a", "b", "c", "d"]
        partitions = list(all_partitions(keys))
        for lab1, lab2 in itertools.product(partitions, repeat=2):
            got = adjusted_rand_index(partition_from(lab1), partition_from(lab2))
            assert got == pytest.approx(ari_oracle(lab1, lab2), abs=1e-9)

    def test_matches_oracle_on_random_instances(self):
        rng = np.random.default_rng(35)
        for _ in range(200):
            n = int(rng.integers(2, 9))
            keys = [f"e{i}" for i in range(n)]
            lab1 = {k: int(rng.integers(0, 4)) for k in keys}
            lab2 = {k: int(rng.integers(0, 4)) for k in keys}
            got = adjusted_rand_index(partition_from(lab1), partition_from(lab2))
            assert got == pytest.approx(ari_oracle(lab1, lab2), abs=1e-9)


class TestNormalizedMutualInformation:
    def test_identity(self):
        p = partition_from({"a": 0, "b": 0, "c": 1, "d": 1})
        assert normalized_mutual_information(p, p) == 1.0

    def test_crossed_partitions_are_independent(self):
        p1 = partition_from({"a": 0, "b": 0, "c": 1, "d": 1})
        p2 = partition_from({"a": 0, "b": 1, "c": 0, "d": 1})
        assert normalized_mutual_information(p1, p2) == 0.0

    def test_symmetry_and_permutation_invariance(self):
        rng = np.random.default_rng(36)
        for _ in range(50):
            keys = [f"e{i}" for i in range(8)]
            lab1 = {k: int(rng.integers(0, 3)) for k in keys}
            lab2 = {k: int(rng.integers(0, 3)) for k in keys}
            p1, p2 = partition_from(lab1), partition_from(lab2)
            assert normalized_mutual_information(p1, p2) == pytest.approx(
                normalized_mutual_information(p2, p1), abs=1e-12
            )
            permuted = partition_from({k: 10 - v for k, v in lab1.items()})
            assert normalized_mutual_information(permuted, p2) == pytest.approx(
                normalized_mutual_information(p1, p2), abs=1e-12
            )

    def test_matches_oracle_on_random_eight_element_pairs(self):
        rng = np.random.default_rng(37)
        for _ in range(200):
            keys = [f"e{i}" for i in range(8)]
            lab1 = {k: int(rng.integers(0, 4)) for k in keys}
            lab2 = {k: int(rng.integers(0, 4)) for k in keys}
            got = normalized_mutual_information(partition_from(lab1), partition_from(lab2))
            assert got == pytest.approx(nmi_oracle(lab1, lab2), abs=1e-9)

    def test_alternative_normalizations(self):
        rng = np.random.default_rng(38)
        keys = [f"e{i}" for i in range(8)]
        lab1 = {k: int(rng.integers(0, 3)) for k in keys}
        lab2 = {k: int(rng.integers(0, 3)) for k in keys}
        for average in ("arithmetic", "geometric", "min", "max"):
            got = normalized_mutual_information(
                partition_from(lab1), partition_from(lab2), average=average
            )
            assert got == pytest.approx(nmi_oracle(lab1, lab2, average), abs=1e-9)

    def test_result_in_unit_interval(self):
        rng = np.random.default_rng(39)
        for _ in range(100):
            n = int(rng.integers(2, 10))
            keys = [f"e{i}" for i in range(n)]
            lab1 = {k: int(rng.integers(0, 5)) for k in keys}
            lab2 = {k: int(rng.integers(0, 5)) for k in keys}
            got = normalized_mutual_information(partition_from(lab1), partition_from(lab2))
            assert 0.0 <= got <= 1.0


class TestTrend:
    def test_collinear_points(self):
        xs = [0.0, 1.0, 2.0, 3.0]
        matrix = make_matrix([[x, 2 * x + 1] for x in xs])
        trend = fit_trend(matrix)
        assert trend.slope == pytest.approx(2.0, abs=1e-12)
        assert trend.intercept == pytest.approx(1.0, abs=1e-12)
        assert all(abs(r) < 1e-12 for r in trend.residuals.values())

    def test_two_points_interpolate(self):
        matrix = make_matrix([[0.0, 5.0], [2.0, 9.0]])
        trend = fit_trend(matrix)
        assert trend.slope == pytest.approx(2.0)
        assert trend.intercept == pytest.approx(5.0)

    def test_five_point_fixture_matches_polyfit(self):
        points = [[0.0, 1.2], [1.0, 2.9], [2.0, 5.3], [3.0, 6.8], [4.0, 9.4]]
        matrix = make_matrix(points)
        trend = fit_trend(matrix)
        slope, intercept = ols_oracle([p[0] for p in points], [p[1] for p in points])
        assert trend.slope == pytest.approx(slope, abs=1e-9)
        assert trend.intercept == pytest.approx(intercept, abs=1e-9)

    def test_residuals_sum_to_zero(self):
        rng = np.random.default_rng(40)
        for _ in range(50):
            n = int(rng.integers(2, 30))
            x = rng.normal(0, 5, size=n)
            if np.unique(x).size < 2:
                continue
            y = rng.normal(0, 5, size=n)
            trend = fit_trend(make_matrix(np.column_stack([x, y])))
            assert sum(trend.residuals.values()) == pytest.approx(0.0, abs=1e-9)

    def test_degenerate_x(self):
        matrix = make_matrix([[1.0, 0.0], [1.0, 5.0]])
        with pytest.raises(DegenerateFitError):
            fit_trend(matrix)

    def test_needs_two_columns(self):
        with pytest.raises(ValueError, match="2 variables"):
            fit_trend(make_matrix([[1.0], [2.0]]))

    def test_threshold_defaults_to_residual_std(self):
        points = [[0.0, 0.0], [1.0, 2.0], [2.0, 1.0], [3.0, 4.0]]
        trend = fit_trend(make_matrix(points))
        residuals = np.array(list(trend.residuals.values()))
        assert trend.threshold == pytest.approx(float(np.std(residuals, ddof=1)))

    def test_explicit_threshold_respected(self):
        trend = fit_trend(make_matrix([[0.0, 0.0], [1.0, 1.0]]), threshold=0.5)
        assert trend.threshold == 0.5


class TestClassifyDivergence:
    def trend(self):
        return fit_trend(
            make_matrix([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]]), threshold=1.0
        )

    def test_zero_residual_is_aligned(self):
        assert classify_divergence(self.trend(), "l000") == ALIGNED

    def test_thresholds(self):
        from lodcoverage.metrics import TrendModel
        trend = TrendModel(slope=1.0, intercept=0.0, threshold=1.0,
                           residuals={"below": -3.0, "above": 3.0, "near": 0.5})
        assert classify_divergence(trend, "below") == RIGHT_DIVERGENT
        assert classify_divergence(trend, "above") == LEFT_DIVERGENT
        assert classify_divergence(trend, "near") == ALIGNED

    def test_unknown_language(self):
        with pytest.raises(ValueError, match="zzz"):
            classify_divergence(self.trend(), "zzz")

    def test_exactly_one_class_per_language(self):
        rng = np.random.default_rng(41)
        x = rng.normal(0, 2, size=20)
        y = 1.5 * x + rng.normal(0, 1, size=20)
        trend = fit_trend(make_matrix(np.column_stack([x, y])))
        for lang in trend.residuals:
            assert classify_divergence(trend, lang) in (
                RIGHT_DIVERGENT, LEFT_DIVERGENT, ALIGNED,
            )
