"""Exception hierarchy shared across the package.

The CLI maps these onto its exit-code contract: configuration and argument
problems exit 2, transport failures exit 3, empty or degenerate data exits 4.
"""

from __future__ import annotations


class LodCoverageError(Exception):
    """Base class for all package-specific errors."""


class SchemaError(LodCoverageError):
    """A delimited input file is missing a required column."""


class DuplicateKeyError(LodCoverageError):
    """A key that must be unique (e.g. a wals_code) appeared twice."""


class MappingError(LodCoverageError):
    """A code-mapping table failed validation against the catalog."""


class ConfigError(LodCoverageError):
    """A run configuration is invalid or references unknown entities."""


class TransportError(LodCoverageError):
    """An HTTP source failed after the configured retries."""

    def __init__(self, message: str, *, language: str | None = None,
                 source_id: str | None = None):
        super().__init__(message)
        self.language = language
        self.source_id = source_id


class ParseError(LodCoverageError):
    """A remote response body could not be parsed; carries an excerpt."""

    def __init__(self, message: str, payload: str = ""):
        excerpt = payload[:200]
        if excerpt:
            message = f"{message} (payload excerpt: {excerpt!r})"
        super().__init__(message)
        self.payload_excerpt = excerpt


class ShapeError(LodCoverageError):
    """A SPARQL result set did not contain a single numeric binding."""


class SnapshotFormatError(LodCoverageError):
    """A snapshot file is malformed or has an incompatible schema version."""


class RecordValidationError(LodCoverageError):
    """A coverage record or snapshot violates its invariants."""


class EmptyMatrixError(LodCoverageError):
    """Matrix construction dropped every language."""


class InsufficientDataError(LodCoverageError):
    """Fewer data points than required (e.g. rows < k for k-means)."""


class UndefinedMetricError(LodCoverageError):
    """A validation metric is undefined for the given partition."""


class DegenerateFitError(LodCoverageError):
    """Trend fitting is impossible (all x values equal)."""


class EmptyIntersectionError(LodCoverageError):
    """Two partitions share no languages, so comparison is undefined."""
