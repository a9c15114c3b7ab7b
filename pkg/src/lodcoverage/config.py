"""Run configuration: TOML parsing, validation, and reference taxonomies.

Relative paths inside a config file resolve against the config file's own
directory, so bundled and user configs work from any working directory.
"""

from __future__ import annotations

import csv
import sys
from dataclasses import dataclass, field
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import ConfigError, SchemaError
from .features import VariableSpec
from .ingest import FetchSettings, SourceDescriptor
from .langcatalog import ProximityWeights


@dataclass(frozen=True)
class RunConfig:
    """Everything a pipeline run needs, validated at load time."""

    sources: tuple[SourceDescriptor, ...]
    catalog_path: Path
    mapping_path: Path
    variables: tuple[VariableSpec, ...]
    k: int = 6
    seed: int = 42
    restarts: int = 10
    quantile_categories: int = 6
    x_variable: str | None = None
    proximity_weights: ProximityWeights = ProximityWeights()
    divergence_threshold: float | None = None  # None means 1 residual std
    output_dir: Path = Path("out")
    languages: tuple[str, ...] = ()
    fetch: FetchSettings = FetchSettings()
    reference_taxonomies: dict[str, Path] = field(default_factory=dict)

    def __post_init__(self):
        if self.k < 1:
            raise ConfigError(f"k must be >= 1, got {self.k}")
        if self.quantile_categories < 1:
            raise ConfigError(
                f"quantile_categories must be >= 1, got {self.quantile_categories}"
            )
        ids = [s.source_id for s in self.sources]
        if len(set(ids)) != len(ids):
            raise ConfigError(f"source ids must be unique, got {ids}")
        names = [v.name for v in self.variables]
        if len(set(names)) != len(names):
            raise ConfigError(f"variable names must be unique, got {names}")
        if self.x_variable is not None and self.x_variable not in names:
            raise ConfigError(f"x_variable {self.x_variable!r} is not a variable name")
        for path in (self.catalog_path, self.mapping_path,
                     *self.reference_taxonomies.values()):
            if not Path(path).exists():
                raise ConfigError(f"configured path does not exist: {path}")

    def x_variable_name(self) -> str:
        """The Wikipedia-side variable: explicit, else the first article-count
        variable, else the first variable."""
        if self.x_variable:
            return self.x_variable
        for var in self.variables:
            if var.field == "article_count":
                return var.name
        return self.variables[0].name


def _build_source(raw: dict, base: Path) -> SourceDescriptor:
    try:
        kind = raw["kind"]
        locator = raw["locator"]
        source_id = raw["source_id"]
    except KeyError as exc:
        raise ConfigError(f"source entry missing key {exc}") from None
    if kind == "stats_file":
        locator = str((base / locator).resolve()) if not Path(locator).is_absolute() else locator
    try:
        return SourceDescriptor(
            source_id=source_id,
            kind=kind,
            locator=locator,
            query_template=raw.get("query_template"),
            count_field=raw.get("count_field", "entity_count"),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def load_config(path) -> RunConfig:
    """Parse and validate a TOML run configuration."""
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: invalid TOML ({exc})") from None
    base = path.parent

    def resolve(p: str) -> Path:
        candidate = Path(p)
        return candidate if candidate.is_absolute() else (base / candidate).resolve()

    try:
        catalog_path = resolve(doc["catalog_path"])
        mapping_path = resolve(doc["mapping_path"])
    except KeyError as exc:
        raise ConfigError(f"{path}: missing required key {exc}") from None

    sources = tuple(_build_source(raw, base) for raw in doc.get("sources", []))
    try:
        variables = tuple(
            VariableSpec(
                name=raw["name"],
                source_id=raw["source_id"],
                field=raw["field"],
                transform=raw.get("transform", "log1p"),
                missing_policy=raw.get("missing_policy", "as_zero"),
            )
            for raw in doc.get("variables", [])
        )
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"{path}: bad variable entry ({exc})") from None
    if not variables:
        raise ConfigError(f"{path}: at least one variable is required")

    weights_raw = doc.get("proximity_weights", {})
    try:
        weights = ProximityWeights(
            family_w=weights_raw.get("family", 0.25),
            genus_w=weights_raw.get("genus", 0.35),
            macroarea_w=weights_raw.get("macroarea", 0.10),
            feature_w=weights_raw.get("features", 0.30),
        )
    except ValueError as exc:
        raise ConfigError(f"{path}: bad proximity weights ({exc})") from None

    fetch_raw = doc.get("fetch", {})
    try:
        fetch = FetchSettings(
            max_attempts=fetch_raw.get("max_attempts", 3),
            backoff_base=fetch_raw.get("backoff_base", 0.5),
            concurrency=fetch_raw.get("concurrency", 4),
            request_delay=fetch_raw.get("request_delay", 0.0),
            timeout=fetch_raw.get("timeout", 30.0),
        )
    except ValueError as exc:
        raise ConfigError(f"{path}: bad fetch settings ({exc})") from None

    threshold = doc.get("divergence_threshold")
    if threshold is not None and threshold != "std":
        try:
            threshold = float(threshold)
        except (TypeError, ValueError):
            raise ConfigError(
                f"{path}: divergence_threshold must be a number or 'std'"
            ) from None
    if threshold == "std":
        threshold = None

    references = {
        name: resolve(p)
        for name, p in doc.get("reference_taxonomies", {}).items()
    }

    return RunConfig(
        sources=sources,
        catalog_path=catalog_path,
        mapping_path=mapping_path,
        variables=variables,
        k=doc.get("k", 6),
        seed=doc.get("seed", 42),
        restarts=doc.get("restarts", 10),
        quantile_categories=doc.get("quantile_categories", 6),
        x_variable=doc.get("x_variable"),
        proximity_weights=weights,
        divergence_threshold=threshold,
        output_dir=resolve(doc.get("output_dir", "out")),
        languages=tuple(doc.get("languages", [])),
        fetch=fetch,
        reference_taxonomies=references,
    )


@dataclass(frozen=True)
class ReferenceTaxonomy:
    """An external language classification, keyed by external (ISO) code."""

    name: str
    labels: dict[str, int]
    class_names: dict[int, str]

    def to_wals_labels(self, mappings) -> dict[str, int]:
        """Convert external codes to wals codes; unmapped codes are dropped."""
        out: dict[str, int] = {}
        for code, label in self.labels.items():
            mapping = mappings.get(code)
            if mapping is not None:
                out[mapping.wals_code] = label
        return out


def load_reference_taxonomy(path, name: str = "reference") -> ReferenceTaxonomy:
    """Load a taxonomy CSV with columns iso_code, class_index, class_name."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        first = fh.readline()
        if not first.strip():
            raise SchemaError(f"{path}: empty file, header row required")
        delimiter = "\t" if "\t" in first else ","
        fh.seek(0)
        reader = csv.DictReader(fh, delimiter=delimiter)
        header = reader.fieldnames or []
        for col in ("iso_code", "class_index"):
            if col not in header:
                raise SchemaError(f"{path}: missing required column {col!r}")
        labels: dict[str, int] = {}
        class_names: dict[int, str] = {}
        for line_no, row in enumerate(reader, start=2):
            try:
                index = int(row["class_index"])
            except ValueError:
                raise SchemaError(
                    f"{path}:{line_no}: class_index is not an integer"
                ) from None
            labels[row["iso_code"].strip()] = index
            if "class_name" in header and (row["class_name"] or "").strip():
                class_names[index] = row["class_name"].strip()
    return ReferenceTaxonomy(name=name, labels=labels, class_names=class_names)
