"""Join snapshots with the language catalog into numeric feature matrices.

Counts become matrix columns per VariableSpec; log1p (ln(1+x)) is the default
transform so observed-zero and treated-as-zero languages sit at the origin
instead of being dropped by a bare logarithm. Languages whose raw counts are
all zero are flagged in zero_coverage_mask and handled by partitioning, not
by transform tricks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, EmptyMatrixError
from .ingest import COUNT_FIELDS, CoverageSnapshot
from .langcatalog import Catalog, CodeMapping

TRANSFORMS = ("log1p", "identity")
MISSING_POLICIES = ("as_zero", "drop_language")


@dataclass(frozen=True)
class VariableSpec:
    """One coverage variable: a (source, count field) pair plus transforms."""

    name: str
    source_id: str
    field: str
    transform: str = "log1p"
    missing_policy: str = "as_zero"

    def __post_init__(self):
        if self.field not in COUNT_FIELDS:
            raise ValueError(f"unknown count field {self.field!r}")
        if self.transform not in TRANSFORMS:
            raise ValueError(f"unknown transform {self.transform!r}")
        if self.missing_policy not in MISSING_POLICIES:
            raise ValueError(f"unknown missing policy {self.missing_policy!r}")


def apply_transform(value: float, transform: str) -> float:
    """Transform one raw count; log1p is ln(1+x)."""
    if transform == "log1p":
        return float(np.log1p(value))
    return float(value)


@dataclass(frozen=True, eq=False)
class FeatureMatrix:
    """Languages x variables matrix of transformed coverage values."""

    languages: tuple[str, ...]
    variables: tuple[VariableSpec, ...]
    values: np.ndarray
    zero_coverage_mask: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "languages", tuple(self.languages))
        object.__setattr__(self, "variables", tuple(self.variables))
        values = np.asarray(self.values, dtype=np.float64)
        mask = np.asarray(self.zero_coverage_mask, dtype=bool)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "zero_coverage_mask", mask)
        if values.shape != (len(self.languages), len(self.variables)):
            raise ValueError(
                f"values shape {values.shape} does not match "
                f"{len(self.languages)} languages x {len(self.variables)} variables"
            )
        if mask.shape != (len(self.languages),):
            raise ValueError("zero_coverage_mask length must equal language count")
        if values.size and not np.all(np.isfinite(values)):
            raise ValueError("matrix values must be finite")

    def __eq__(self, other) -> bool:
        if not isinstance(other, FeatureMatrix):
            return NotImplemented
        return (
            self.languages == other.languages
            and self.variables == other.variables
            and np.array_equal(self.values, other.values)
            and np.array_equal(self.zero_coverage_mask, other.zero_coverage_mask)
        )

    @property
    def n_languages(self) -> int:
        return len(self.languages)

    def row(self, wals_code: str) -> np.ndarray:
        return self.values[self.languages.index(wals_code)]

    def column(self, variable_name: str) -> np.ndarray:
        names = [v.name for v in self.variables]
        return self.values[:, names.index(variable_name)]


def _raw_counts(
    snapshot: CoverageSnapshot,
    mappings: dict[str, CodeMapping],
    spec: VariableSpec,
) -> dict[str, int]:
    """Sum observed counts per wals_code for one variable.

    Multiple external codes mapping to the same languoid aggregate by sum.
    Languages with no observed value for this variable are simply absent.
    """
    totals: dict[str, int] = {}
    for rec in snapshot.records:
        if rec.source_id != spec.source_id:
            continue
        value = rec.count(spec.field)
        if value is None:
            continue
        mapping = mappings.get(rec.language)
        if mapping is None:
            continue
        totals[mapping.wals_code] = totals.get(mapping.wals_code, 0) + value
    return totals


def build_matrix(
    snapshot: CoverageSnapshot,
    catalog: Catalog,
    mappings: dict[str, CodeMapping],
    specs: list[VariableSpec],
) -> FeatureMatrix:
    """Build the languages x variables matrix for clustering and trends.

    Rows are the catalog languages reachable through the mapping table,
    sorted by wals_code; a drop_language variable removes languages it never
    observed, an as_zero variable keeps them at count 0.
    """
    if not specs:
        raise ValueError("specs must be non-empty")
    if not snapshot.records:
        raise ValueError("snapshot must be non-empty")
    names = [s.name for s in specs]
    if len(set(names)) != len(names):
        raise ValueError(f"variable names must be unique, got {names}")
    available = snapshot.source_ids()
    for spec in specs:
        if spec.source_id not in available:
            raise ConfigError(
                f"variable {spec.name!r}: source {spec.source_id!r} not in snapshot "
                f"(has {sorted(available)})"
            )

    mapped_codes = {m.wals_code for m in mappings.values() if m.wals_code in catalog}
    rows = sorted(mapped_codes)
    counts_per_spec = [_raw_counts(snapshot, mappings, spec) for spec in specs]

    kept: list[str] = []
    raw_rows: list[list[int]] = []
    for code in rows:
        raw = []
        dropped = False
        for spec, counts in zip(specs, counts_per_spec):
            value = counts.get(code)
            if value is None:
                if spec.missing_policy == "drop_language":
                    dropped = True
                    break
                value = 0
            raw.append(value)
        if not dropped:
            kept.append(code)
            raw_rows.append(raw)

    if not kept:
        raise EmptyMatrixError("every language was dropped while building the matrix")

    raw_array = np.array(raw_rows, dtype=np.float64)
    mask = np.all(raw_array == 0, axis=1)
    values = np.empty_like(raw_array)
    for j, spec in enumerate(specs):
        if spec.transform == "log1p":
            values[:, j] = np.log1p(raw_array[:, j])
        else:
            values[:, j] = raw_array[:, j]
    return FeatureMatrix(tuple(kept), tuple(specs), values, mask)


def partition_zero_coverage(matrix: FeatureMatrix) -> tuple[list[str], FeatureMatrix]:
    """Split off the zero-coverage languages before clustering.

    Returns (zero_group, active_matrix); the zero group is re-attached
    afterward as the fixed lowest category.
    """
    mask = matrix.zero_coverage_mask
    zero_group = [lang for lang, z in zip(matrix.languages, mask) if z]
    keep = ~mask
    active = FeatureMatrix(
        tuple(lang for lang, k in zip(matrix.languages, keep) if k),
        matrix.variables,
        matrix.values[keep],
        np.zeros(int(keep.sum()), dtype=bool),
    )
    return zero_group, active


def standardized(matrix: FeatureMatrix) -> FeatureMatrix:
    """Opt-in z-score post-transform for multi-variable runs.

    Constant columns become all-zero rather than dividing by zero.
    """
    values = matrix.values
    if values.size == 0:
        return matrix
    mean = values.mean(axis=0)
    std = values.std(axis=0)
    std = np.where(std == 0, 1.0, std)
    return FeatureMatrix(
        matrix.languages, matrix.variables, (values - mean) / std,
        matrix.zero_coverage_mask.copy(),
    )


def row_scores(matrix: FeatureMatrix) -> dict[str, float]:
    """Aggregate each language to a scalar score (sum over transformed values).

    With log1p variables this is the sum-of-logs score used by quantile
    categorization.
    """
    sums = matrix.values.sum(axis=1)
    return {lang: float(s) for lang, s in zip(matrix.languages, sums)}
