"""Coverage ingestion: MediaWiki statistics, SPARQL counts, stats files.

Fetch results are frozen into CoverageSnapshot documents so downstream
analyses stay reproducible after the live sources drift. A count of 0 means
"source queried, nothing there"; an absent count means "source not queried",
and the two are never conflated.
"""

from __future__ import annotations

import csv
import json
import re
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone

import requests

from .errors import (
    ParseError,
    RecordValidationError,
    SchemaError,
    ShapeError,
    SnapshotFormatError,
    TransportError,
)

SOURCE_KINDS = ("mediawiki_api", "sparql_endpoint", "stats_file")
COUNT_FIELDS = ("article_count", "entity_count", "relation_count")

SNAPSHOT_SCHEMA_VERSION = 1

# Language codes are substituted into URLs and SPARQL queries; anything
# outside this alphabet is rejected before substitution.
LANG_CODE_RE = re.compile(r"^[a-zA-Z0-9-]+$")

TRANSIENT_STATUS = frozenset({429, 500, 502, 503, 504})


@dataclass(frozen=True)
class SourceDescriptor:
    """One coverage source: a MediaWiki API, a SPARQL endpoint, or a file.

    count_field names which CoverageRecord field the source populates; for
    SPARQL endpoints this is the declared role of the counting template.
    """

    source_id: str
    kind: str
    locator: str
    query_template: str | None = None
    count_field: str = "entity_count"

    def __post_init__(self):
        if self.kind not in SOURCE_KINDS:
            raise ValueError(f"unknown source kind {self.kind!r}")
        if self.count_field not in COUNT_FIELDS:
            raise ValueError(f"unknown count field {self.count_field!r}")
        if self.kind == "sparql_endpoint":
            if not self.query_template or "{lang}" not in self.query_template:
                raise ValueError(
                    f"source {self.source_id!r}: sparql_endpoint requires a "
                    "query_template containing a {lang} placeholder"
                )


@dataclass(frozen=True)
class CoverageRecord:
    """Per-language, per-source counts. At least one count must be present."""

    language: str
    source_id: str
    article_count: int | None = None
    entity_count: int | None = None
    relation_count: int | None = None

    def __post_init__(self):
        counts = (self.article_count, self.entity_count, self.relation_count)
        if all(c is None for c in counts):
            raise RecordValidationError(
                f"record ({self.language}, {self.source_id}): no count present"
            )
        for name, value in zip(COUNT_FIELDS, counts):
            if value is not None and (not isinstance(value, int) or value < 0):
                raise RecordValidationError(
                    f"record ({self.language}, {self.source_id}): "
                    f"{name} must be a non-negative integer, got {value!r}"
                )

    def count(self, field_name: str) -> int | None:
        if field_name not in COUNT_FIELDS:
            raise ValueError(f"unknown count field {field_name!r}")
        return getattr(self, field_name)


@dataclass(frozen=True)
class CoverageSnapshot:
    """Immutable set of coverage records plus retrieval provenance."""

    records: tuple[CoverageRecord, ...]
    retrieved_at: datetime
    source_versions: dict[str, str] = field(default_factory=dict)
    warnings: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))
        object.__setattr__(self, "warnings", tuple(self.warnings))
        seen = set()
        for rec in self.records:
            key = (rec.language, rec.source_id)
            if key in seen:
                raise RecordValidationError(f"duplicate (language, source) pair {key}")
            seen.add(key)

    def source_ids(self) -> set[str]:
        return {rec.source_id for rec in self.records}

    def by_source(self, source_id: str) -> list[CoverageRecord]:
        return [rec for rec in self.records if rec.source_id == source_id]


@dataclass(frozen=True)
class FetchSettings:
    """Retry, concurrency, and politeness knobs shared by all fetchers."""

    max_attempts: int = 3
    backoff_base: float = 0.5
    concurrency: int = 4
    request_delay: float = 0.0
    timeout: float = 30.0

    def __post_init__(self):
        if self.max_attempts < 1:
            raise ValueError("max_attempts must be >= 1")
        if self.concurrency < 1:
            raise ValueError("concurrency must be >= 1")


def _validate_lang_code(code: str) -> str:
    if not LANG_CODE_RE.match(code):
        raise ValueError(f"unsafe language code {code!r}")
    return code


def _request_with_retry(
    method: str,
    url: str,
    settings: FetchSettings,
    *,
    params: dict | None = None,
    data: dict | None = None,
    headers: dict | None = None,
    language: str | None = None,
    source_id: str | None = None,
    ok_status: frozenset[int] = frozenset({200}),
) -> requests.Response:
    """Issue a request, retrying transient failures with exponential backoff.

    Returns the response when its status is in ok_status. Non-transient
    failures raise immediately; transient ones raise TransportError once the
    attempt budget is exhausted.
    """
    last_error: Exception | None = None
    for attempt in range(1, settings.max_attempts + 1):
        if settings.request_delay > 0:
            time.sleep(settings.request_delay)
        try:
            response = requests.request(
                method, url, params=params, data=data, headers=headers,
                timeout=settings.timeout,
            )
        except requests.RequestException as exc:
            last_error = exc
        else:
            if response.status_code in ok_status:
                return response
            if response.status_code not in TRANSIENT_STATUS:
                raise TransportError(
                    f"{url}: HTTP {response.status_code}",
                    language=language, source_id=source_id,
                )
            last_error = TransportError(
                f"{url}: HTTP {response.status_code}",
                language=language, source_id=source_id,
            )
        if attempt < settings.max_attempts:
            time.sleep(settings.backoff_base * 2 ** (attempt - 1))
    raise TransportError(
        f"{url}: failed after {settings.max_attempts} attempts ({last_error})",
        language=language, source_id=source_id,
    )


def _fetch_one_wikipedia(
    descriptor: SourceDescriptor, language: str, settings: FetchSettings
) -> CoverageRecord:
    _validate_lang_code(language)
    url = descriptor.locator.replace("{lang}", language)
    params = {
        "action": "query",
        "meta": "siteinfo",
        "siprop": "statistics",
        "format": "json",
    }
    response = _request_with_retry(
        "GET", url, settings, params=params,
        language=language, source_id=descriptor.source_id,
        ok_status=frozenset({200, 404}),
    )
    if response.status_code == 404:
        # Missing language edition: queried, nothing there.
        return CoverageRecord(language, descriptor.source_id, article_count=0)
    try:
        payload = response.json()
    except ValueError:
        raise ParseError(
            f"{descriptor.source_id}/{language}: response is not JSON",
            response.text,
        ) from None
    if "error" in payload:
        return CoverageRecord(language, descriptor.source_id, article_count=0)
    try:
        articles = int(payload["query"]["statistics"]["articles"])
    except (KeyError, TypeError, ValueError):
        raise ParseError(
            f"{descriptor.source_id}/{language}: no article statistic in response",
            response.text,
        ) from None
    return CoverageRecord(language, descriptor.source_id, article_count=articles)


def fetch_wikipedia_counts(
    descriptor: SourceDescriptor,
    languages: list[str],
    settings: FetchSettings = FetchSettings(),
) -> list[CoverageRecord]:
    """Fetch per-edition article counts from the MediaWiki statistics API.

    One record per language, ordered by language code; editions that do not
    exist yield article_count=0. A language that still fails after retries
    aborts the batch with a TransportError naming it.
    """
    if descriptor.kind != "mediawiki_api":
        raise ValueError(f"descriptor {descriptor.source_id!r} is not a mediawiki_api")
    if not languages:
        return []
    with ThreadPoolExecutor(max_workers=settings.concurrency) as pool:
        records = list(
            pool.map(lambda lang: _fetch_one_wikipedia(descriptor, lang, settings),
                     languages)
        )
    return sorted(records, key=lambda rec: rec.language)


def fetch_sparql_count(
    descriptor: SourceDescriptor,
    language: str,
    settings: FetchSettings = FetchSettings(),
) -> CoverageRecord:
    """Run the descriptor's counting query for one language.

    The query must yield a single row with a single numeric binding; the
    count lands in the field named by descriptor.count_field.
    """
    if descriptor.kind != "sparql_endpoint":
        raise ValueError(f"descriptor {descriptor.source_id!r} is not a sparql_endpoint")
    _validate_lang_code(language)
    query = descriptor.query_template.replace("{lang}", language)
    response = _request_with_retry(
        "GET", descriptor.locator, settings,
        params={"query": query},
        headers={"Accept": "application/sparql-results+json"},
        language=language, source_id=descriptor.source_id,
    )
    try:
        payload = response.json()
        bindings = payload["results"]["bindings"]
    except (ValueError, KeyError, TypeError):
        raise ParseError(
            f"{descriptor.source_id}/{language}: not a SPARQL JSON result",
            response.text,
        ) from None
    if len(bindings) != 1 or len(bindings[0]) != 1:
        raise ShapeError(
            f"{descriptor.source_id}/{language}: expected one row with one "
            f"binding, got {len(bindings)} row(s)"
        )
    (value,) = bindings[0].values()
    try:
        count = int(value["value"])
    except (KeyError, TypeError, ValueError):
        raise ShapeError(
            f"{descriptor.source_id}/{language}: binding is not numeric: {value!r}"
        ) from None
    if count < 0:
        raise ShapeError(f"{descriptor.source_id}/{language}: negative count {count}")
    return CoverageRecord(
        language, descriptor.source_id, **{descriptor.count_field: count}
    )


def fetch_sparql_counts(
    descriptor: SourceDescriptor,
    languages: list[str],
    settings: FetchSettings = FetchSettings(),
) -> tuple[list[CoverageRecord], list[str]]:
    """Count every language against one endpoint, isolating failures.

    Queries run one per language under the bounded concurrency contract.
    Returns (records sorted by language, warning strings for languages that
    failed after retries).
    """
    if not languages:
        return [], []

    def one(lang: str):
        try:
            return fetch_sparql_count(descriptor, lang, settings)
        except (TransportError, ShapeError, ParseError) as exc:
            return f"{descriptor.source_id}/{lang}: {exc}"

    with ThreadPoolExecutor(max_workers=settings.concurrency) as pool:
        outcomes = list(pool.map(one, languages))
    records = sorted(
        (o for o in outcomes if isinstance(o, CoverageRecord)),
        key=lambda rec: rec.language,
    )
    warnings = sorted(o for o in outcomes if isinstance(o, str))
    return records, warnings


def load_stats_file(descriptor: SourceDescriptor) -> list[CoverageRecord]:
    """Read per-language counts from a character-separated statistics file.

    Required column: language. Count columns (entity_count, relation_count,
    article_count) are optional per file but at least one must exist; empty
    cells mean "not observed" for that language.
    """
    if descriptor.kind != "stats_file":
        raise ValueError(f"descriptor {descriptor.source_id!r} is not a stats_file")
    with open(descriptor.locator, "r", encoding="utf-8", newline="") as fh:
        first = fh.readline()
        if not first.strip():
            raise SchemaError(f"{descriptor.locator}: empty file, header row required")
        delimiter = "\t" if "\t" in first else ","
        fh.seek(0)
        reader = csv.DictReader(fh, delimiter=delimiter)
        header = reader.fieldnames or []
        if "language" not in header:
            raise SchemaError(f"{descriptor.locator}: missing required column 'language'")
        count_cols = [c for c in COUNT_FIELDS if c in header]
        if not count_cols:
            raise SchemaError(
                f"{descriptor.locator}: need at least one of {COUNT_FIELDS}"
            )
        records = []
        for line_no, row in enumerate(reader, start=2):
            counts = {}
            for col in count_cols:
                cell = (row.get(col) or "").strip()
                if not cell:
                    continue
                try:
                    counts[col] = int(cell)
                except ValueError:
                    raise RecordValidationError(
                        f"{descriptor.locator}:{line_no}: {col} is not an integer: {cell!r}"
                    ) from None
            records.append(
                CoverageRecord(row["language"].strip(), descriptor.source_id, **counts)
            )
    return records


def _record_to_dict(rec: CoverageRecord) -> dict:
    return {
        "language": rec.language,
        "source_id": rec.source_id,
        "article_count": rec.article_count,
        "entity_count": rec.entity_count,
        "relation_count": rec.relation_count,
    }


def save_snapshot(snapshot: CoverageSnapshot, path) -> None:
    """Write a snapshot as canonical JSON (schema-versioned, diff-able)."""
    doc = {
        "schema_version": SNAPSHOT_SCHEMA_VERSION,
        "retrieved_at": snapshot.retrieved_at.isoformat(),
        "source_versions": snapshot.source_versions,
        "warnings": list(snapshot.warnings),
        "records": [_record_to_dict(rec) for rec in snapshot.records],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, ensure_ascii=False, indent=2, sort_keys=True)
        fh.write("\n")


def load_snapshot(path) -> CoverageSnapshot:
    """Load a snapshot, enforcing schema version and record invariants."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except ValueError as exc:
            raise SnapshotFormatError(f"{path}: not valid JSON ({exc})") from None
    version = doc.get("schema_version")
    if version != SNAPSHOT_SCHEMA_VERSION:
        raise SnapshotFormatError(
            f"{path}: schema_version {version!r} incompatible with "
            f"{SNAPSHOT_SCHEMA_VERSION}"
        )
    try:
        retrieved_at = datetime.fromisoformat(doc["retrieved_at"])
        raw_records = doc["records"]
    except (KeyError, TypeError, ValueError) as exc:
        raise SnapshotFormatError(f"{path}: malformed snapshot ({exc})") from None
    records = []
    for raw in raw_records:
        try:
            records.append(
                CoverageRecord(
                    language=raw["language"],
                    source_id=raw["source_id"],
                    article_count=raw.get("article_count"),
                    entity_count=raw.get("entity_count"),
                    relation_count=raw.get("relation_count"),
                )
            )
        except KeyError as exc:
            raise SnapshotFormatError(f"{path}: record missing field {exc}") from None
    return CoverageSnapshot(
        records=tuple(records),
        retrieved_at=retrieved_at,
        source_versions=dict(doc.get("source_versions", {})),
        warnings=tuple(doc.get("warnings", [])),
    )


def with_warnings(snapshot: CoverageSnapshot, warnings: list[str]) -> CoverageSnapshot:
    """Return a copy of the snapshot with the given warnings attached."""
    return replace(snapshot, warnings=tuple(warnings))
