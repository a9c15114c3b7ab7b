"""WALS languoid catalog: loading, external-code resolution, and proximity.

The catalog file is a character-separated export (comma or tab, auto-detected
from the header) with required columns wals_code, name, genus, family,
macroarea. An iso639_3 (or iso_code) column is picked up when present; every
other column is treated as a typological feature column, with empty cells
meaning the feature is undefined for that language.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

from .errors import DuplicateKeyError, MappingError, SchemaError

REQUIRED_COLUMNS = ("wals_code", "name", "genus", "family", "macroarea")
ISO_COLUMNS = ("iso639_3", "iso_code")

CONFIDENCE_LEVELS = ("exact", "manual", "heuristic")


@dataclass(frozen=True)
class Languoid:
    """One written language from the WALS universe."""

    wals_code: str
    name: str
    family: str
    genus: str
    macroarea: str
    iso639_3: str | None = None
    features: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if not self.wals_code:
            raise ValueError("wals_code must be non-empty")
        if any(not v for v in self.features.values()):
            raise ValueError(
                f"languoid {self.wals_code}: features must not hold empty values"
            )


@dataclass(frozen=True)
class CodeMapping:
    """Join between an external language code and a WALS languoid."""

    external_code: str
    wals_code: str
    confidence: str = "manual"

    def __post_init__(self):
        if self.confidence not in CONFIDENCE_LEVELS:
            raise ValueError(
                f"confidence must be one of {CONFIDENCE_LEVELS}, got {self.confidence!r}"
            )


@dataclass(frozen=True)
class ProximityWeights:
    """Non-negative weights over the four language-proximity components.

    Weights are normalized to sum to 1 before use; the stored values may be
    on any positive scale.
    """

    family_w: float = 0.25
    genus_w: float = 0.35
    macroarea_w: float = 0.10
    feature_w: float = 0.30

    def __post_init__(self):
        values = (self.family_w, self.genus_w, self.macroarea_w, self.feature_w)
        if any(v < 0 for v in values):
            raise ValueError("proximity weights must be non-negative")
        if sum(values) <= 0:
            raise ValueError("at least one proximity weight must be positive")

    def normalized(self) -> "ProximityWeights":
        total = self.family_w + self.genus_w + self.macroarea_w + self.feature_w
        return ProximityWeights(
            self.family_w / total,
            self.genus_w / total,
            self.macroarea_w / total,
            self.feature_w / total,
        )


class Catalog:
    """Immutable collection of languoids keyed by wals_code."""

    def __init__(self, languoids: list[Languoid]):
        self._by_code: dict[str, Languoid] = {}
        for lg in languoids:
            if lg.wals_code in self._by_code:
                raise DuplicateKeyError(f"duplicate wals_code {lg.wals_code!r}")
            self._by_code[lg.wals_code] = lg

    def __len__(self) -> int:
        return len(self._by_code)

    def __iter__(self):
        return iter(self._by_code.values())

    def __contains__(self, wals_code: str) -> bool:
        return wals_code in self._by_code

    def get(self, wals_code: str) -> Languoid | None:
        return self._by_code.get(wals_code)

    def codes(self) -> list[str]:
        return sorted(self._by_code)


def _detect_delimiter(header_line: str) -> str:
    return "\t" if "\t" in header_line else ","


def load_wals_catalog(path) -> Catalog:
    """Load a languoid export into a Catalog.

    Raises SchemaError when a required column is missing, DuplicateKeyError
    on a repeated wals_code, and OSError when the file cannot be read.
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        first = fh.readline()
        if not first.strip():
            raise SchemaError(f"{path}: empty file, header row required")
        delimiter = _detect_delimiter(first)
        fh.seek(0)
        reader = csv.DictReader(fh, delimiter=delimiter)
        header = reader.fieldnames or []
        for col in REQUIRED_COLUMNS:
            if col not in header:
                raise SchemaError(f"{path}: missing required column {col!r}")
        iso_col = next((c for c in ISO_COLUMNS if c in header), None)
        reserved = set(REQUIRED_COLUMNS) | set(ISO_COLUMNS)
        feature_cols = [c for c in header if c not in reserved]

        languoids = []
        for row in reader:
            features = {
                col: row[col].strip()
                for col in feature_cols
                if row.get(col) and row[col].strip()
            }
            iso = (row.get(iso_col) or "").strip() if iso_col else ""
            languoids.append(
                Languoid(
                    wals_code=row["wals_code"].strip(),
                    name=row["name"].strip(),
                    family=row["family"].strip(),
                    genus=row["genus"].strip(),
                    macroarea=row["macroarea"].strip(),
                    iso639_3=iso or None,
                    features=features,
                )
            )
    return Catalog(languoids)


def load_mappings(path, catalog: Catalog) -> dict[str, CodeMapping]:
    """Load and validate a code-mapping table.

    Columns: external_code, wals_code, confidence. Every wals_code must exist
    in the catalog; an external code mapped to two different languoids is
    rejected so resolution stays deterministic.
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        first = fh.readline()
        if not first.strip():
            raise SchemaError(f"{path}: empty file, header row required")
        delimiter = _detect_delimiter(first)
        fh.seek(0)
        reader = csv.DictReader(fh, delimiter=delimiter)
        header = reader.fieldnames or []
        for col in ("external_code", "wals_code", "confidence"):
            if col not in header:
                raise SchemaError(f"{path}: missing required column {col!r}")
        rows = [
            CodeMapping(
                external_code=row["external_code"].strip(),
                wals_code=row["wals_code"].strip(),
                confidence=row["confidence"].strip(),
            )
            for row in reader
        ]
    return validate_mappings(rows, catalog)


def validate_mappings(rows: list[CodeMapping], catalog: Catalog) -> dict[str, CodeMapping]:
    """Check mapping invariants and index by external code."""
    seen_pairs: set[tuple[str, str]] = set()
    by_external: dict[str, CodeMapping] = {}
    for m in rows:
        pair = (m.external_code, m.wals_code)
        if pair in seen_pairs:
            raise MappingError(f"duplicate mapping {m.external_code!r} -> {m.wals_code!r}")
        seen_pairs.add(pair)
        if m.wals_code not in catalog:
            raise MappingError(
                f"mapping {m.external_code!r} references unknown wals_code {m.wals_code!r}"
            )
        previous = by_external.get(m.external_code)
        if previous is not None:
            raise MappingError(
                f"external code {m.external_code!r} mapped to both "
                f"{previous.wals_code!r} and {m.wals_code!r}"
            )
        by_external[m.external_code] = m
    return by_external


def resolve_code(
    catalog: Catalog,
    mappings: dict[str, CodeMapping],
    external_code: str,
) -> Languoid | None:
    """Resolve an external language code to a languoid, or None.

    Only exact mapping-table hits resolve; there is no fuzzy matching here.
    """
    mapping = mappings.get(external_code)
    if mapping is None:
        return None
    return catalog.get(mapping.wals_code)


def heuristic_mappings(catalog: Catalog, external_codes: list[str]) -> list[CodeMapping]:
    """Guess mappings by matching codes against iso639_3, then names.

    Opt-in helper for bootstrapping a mapping file; every produced mapping is
    tagged confidence="heuristic" and should be reviewed before use.
    """
    by_iso = {lg.iso639_3: lg for lg in catalog if lg.iso639_3}
    by_name = {lg.name.lower(): lg for lg in catalog}
    out = []
    for code in external_codes:
        hit = by_iso.get(code) or by_name.get(code.lower())
        if hit is not None:
            out.append(CodeMapping(code, hit.wals_code, "heuristic"))
    return out


def feature_overlap(a: Languoid, b: Languoid) -> float:
    """Agreement ratio over the features defined for both languoids.

    Returns 0.0 when the two languoids share no defined feature.
    """
    shared = a.features.keys() & b.features.keys()
    if not shared:
        return 0.0
    agree = sum(1 for f in shared if a.features[f] == b.features[f])
    return agree / len(shared)


def proximity(a: Languoid, b: Languoid, w: ProximityWeights) -> float:
    """Weighted similarity over family, genus, macro-area, and features."""
    w = w.normalized()
    return (
        w.family_w * (a.family == b.family)
        + w.genus_w * (a.genus == b.genus)
        + w.macroarea_w * (a.macroarea == b.macroarea)
        + w.feature_w * feature_overlap(a, b)
    )
