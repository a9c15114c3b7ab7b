"""Language-coverage profiling for Linked Open Data knowledge graphs."""

__version__ = "0.1.0"

from .cluster import Categorization, ClusterModel, kmeans, order_categories, quantile_categorize
from .features import (
    FeatureMatrix,
    VariableSpec,
    build_matrix,
    partition_zero_coverage,
    row_scores,
)
from .ingest import (
    CoverageRecord,
    CoverageSnapshot,
    FetchSettings,
    SourceDescriptor,
    fetch_sparql_count,
    fetch_wikipedia_counts,
    load_snapshot,
    load_stats_file,
    save_snapshot,
)
from .langcatalog import (
    Catalog,
    CodeMapping,
    Languoid,
    ProximityWeights,
    feature_overlap,
    load_mappings,
    load_wals_catalog,
    proximity,
    resolve_code,
)
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
from .transfer import (
    AlignmentRecord,
    AlignmentStats,
    RankingOutcome,
    TransferPlan,
    curate_alignments,
    hits_at_k,
    leaderboard,
    load_leaderboard,
    mean_reciprocal_rank,
    select_by_alignment_volume,
    select_by_coverage,
    select_by_proximity,
)

__all__ = [
    "AlignmentRecord",
    "AlignmentStats",
    "Catalog",
    "Categorization",
    "ClusterModel",
    "CodeMapping",
    "CoverageRecord",
    "CoverageSnapshot",
    "FeatureMatrix",
    "FetchSettings",
    "Languoid",
    "Partition",
    "ProximityWeights",
    "RankingOutcome",
    "SourceDescriptor",
    "TransferPlan",
    "TrendModel",
    "VariableSpec",
    "adjusted_rand_index",
    "build_matrix",
    "classify_divergence",
    "curate_alignments",
    "feature_overlap",
    "fetch_sparql_count",
    "fetch_wikipedia_counts",
    "fit_trend",
    "hits_at_k",
    "kmeans",
    "leaderboard",
    "load_leaderboard",
    "load_mappings",
    "load_snapshot",
    "load_stats_file",
    "load_wals_catalog",
    "mean_reciprocal_rank",
    "normalized_mutual_information",
    "order_categories",
    "partition_zero_coverage",
    "proximity",
    "quantile_categorize",
    "resolve_code",
    "row_scores",
    "save_snapshot",
    "select_by_alignment_volume",
    "select_by_coverage",
    "select_by_proximity",
    "silhouette",
    "variance_ratio",
]
