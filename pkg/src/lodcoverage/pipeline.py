"""Profile pipeline: snapshot -> matrices -> categorizations -> metrics.

One analysis is produced per KG variable, pairing it with the Wikipedia
variable in a two-column matrix. Zero-coverage languages are split off before
clustering and re-attached as category 0, so a run with k categories yields
k-1 K-means clusters plus the fixed zero category whenever zero-coverage
languages exist.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .cluster import Categorization, ClusterModel, kmeans, order_categories, quantile_categorize
from .config import RunConfig
from .errors import DegenerateFitError, EmptyIntersectionError
from .features import FeatureMatrix, build_matrix, partition_zero_coverage, row_scores
from .ingest import CoverageSnapshot
from .langcatalog import Catalog, CodeMapping
from .metrics import (
    Partition,
    TrendModel,
    adjusted_rand_index,
    classify_divergence,
    fit_trend,
    normalized_mutual_information,
    silhouette,
    variance_ratio,
)

FALLBACK_CATEGORY_NAMES = {i: f"category {i}" for i in range(16)}


def compare_on_intersection(labels1: dict[str, int], labels2: dict[str, int]) -> dict:
    """ARI and NMI over the shared key set, with coverage bookkeeping."""
    common = sorted(set(labels1) & set(labels2))
    if not common:
        raise EmptyIntersectionError("the two labelings share no languages")
    p1 = Partition({k: labels1[k] for k in common})
    p2 = Partition({k: labels2[k] for k in common})
    return {
        "ari": adjusted_rand_index(p1, p2),
        "nmi": normalized_mutual_information(p1, p2),
        "intersection": len(common),
        "coverage_first": len(common) / len(labels1),
        "coverage_second": len(common) / len(labels2),
    }


@dataclass
class SourceAnalysis:
    """Everything the report needs for one (Wikipedia, KG) variable pair."""

    name: str
    source_id: str
    matrix: FeatureMatrix
    zero_group: list[str]
    active: FeatureMatrix
    model: ClusterModel | None
    kmeans_cat: Categorization
    quantile_cat: Categorization
    trend: TrendModel | None
    divergence: dict[str, str]
    silhouette: float | None
    variance_ratio: float | None
    reference_scores: dict[str, dict] = field(default_factory=dict)
    kmeans_vs_quantile: dict | None = None
    notes: list[str] = field(default_factory=list)


@dataclass
class ReportBundle:
    """All per-source analyses plus shared naming, ready for emission."""

    analyses: list[SourceAnalysis]
    names: dict[str, str]
    category_names: dict[int, str]
    k: int
    seed: int


def _categorize_active(
    config: RunConfig,
    active: FeatureMatrix,
    zero_group: list[str],
    notes: list[str],
) -> tuple[ClusterModel | None, Categorization]:
    """K-means on the active languages, zero group re-attached as category 0."""
    target_k = config.k - 1 if zero_group else config.k
    if active.n_languages == 0:
        notes.append("no active languages; every language is zero-coverage")
        return None, Categorization(
            labels={lang: 0 for lang in zero_group}, method="kmeans"
        )
    if target_k < 1:
        target_k = 1
    if target_k > active.n_languages:
        notes.append(
            f"only {active.n_languages} active languages; "
            f"clustering with k={active.n_languages} instead of {target_k}"
        )
        target_k = active.n_languages
    model = kmeans(active, target_k, seed=config.seed, restarts=config.restarts)
    return model, order_categories(model, active, zero_group)


def analyze_variable_pair(
    config: RunConfig,
    snapshot: CoverageSnapshot,
    catalog: Catalog,
    mappings: dict[str, CodeMapping],
    x_name: str,
    y_name: str,
) -> SourceAnalysis:
    by_name = {v.name: v for v in config.variables}
    x_spec, y_spec = by_name[x_name], by_name[y_name]
    matrix = build_matrix(snapshot, catalog, mappings, [x_spec, y_spec])
    zero_group, active = partition_zero_coverage(matrix)
    notes: list[str] = []

    model, kmeans_cat = _categorize_active(config, active, zero_group, notes)
    quantile_cat = quantile_categorize(row_scores(matrix), config.quantile_categories)

    ass = None
    vri = None
    if model is not None and model.k >= 2:
        active_partition = Partition(dict(model.assignments))
        ass = silhouette(active, active_partition)
        if active.n_languages > model.k:
            vri = variance_ratio(active, active_partition)
        else:
            notes.append("variance ratio undefined: n <= k on active languages")
    elif model is not None:
        notes.append("cohesion metrics undefined: single active cluster")

    trend = None
    divergence: dict[str, str] = {}
    try:
        if active.n_languages >= 2:
            trend = fit_trend(active, threshold=config.divergence_threshold)
            divergence = {
                lang: classify_divergence(trend, lang) for lang in active.languages
            }
    except DegenerateFitError:
        notes.append("trend undefined: all active x values equal")
    for lang in zero_group:
        divergence[lang] = ""

    kvq = compare_on_intersection(kmeans_cat.labels, quantile_cat.labels)
    return SourceAnalysis(
        name=y_name,
        source_id=y_spec.source_id,
        matrix=matrix,
        zero_group=zero_group,
        active=active,
        model=model,
        kmeans_cat=kmeans_cat,
        quantile_cat=quantile_cat,
        trend=trend,
        divergence=divergence,
        silhouette=ass,
        variance_ratio=vri,
        kmeans_vs_quantile=kvq,
        notes=notes,
    )


def profile_snapshot(
    config: RunConfig,
    snapshot: CoverageSnapshot,
    catalog: Catalog,
    mappings: dict[str, CodeMapping],
    references: dict[str, dict[str, int]] | None = None,
    reference_class_names: dict[int, str] | None = None,
) -> ReportBundle:
    """Run the full profile: one analysis per KG variable.

    `references` maps taxonomy name to wals-coded labels; categorizations are
    scored against each on the language intersection.
    """
    x_name = config.x_variable_name()
    y_names = [v.name for v in config.variables if v.name != x_name]
    if not y_names:
        raise ValueError("profile needs at least one KG variable besides the x variable")

    analyses = []
    for y_name in y_names:
        analysis = analyze_variable_pair(
            config, snapshot, catalog, mappings, x_name, y_name
        )
        for ref_name, ref_labels in (references or {}).items():
            try:
                analysis.reference_scores[ref_name] = compare_on_intersection(
                    analysis.kmeans_cat.labels, ref_labels
                )
            except EmptyIntersectionError:
                analysis.notes.append(
                    f"reference {ref_name!r}: no language overlap, comparison skipped"
                )
        analyses.append(analysis)

    names = {lg.wals_code: lg.name for lg in catalog}
    category_names = dict(FALLBACK_CATEGORY_NAMES)
    category_names.update(reference_class_names or {})
    return ReportBundle(
        analyses=analyses,
        names=names,
        category_names=category_names,
        k=config.k,
        seed=config.seed,
    )
