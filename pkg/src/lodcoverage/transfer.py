"""Transfer-candidate selection, seed-alignment curation, and MKGC scoring.

Candidate ranking follows three criteria: digital coverage, language
proximity, and curated seed-alignment volume, plus a combined rank
aggregation. The curation rule (exclude alignments whose merged
relation-label distribution gains entropy) is one plausible heuristic and is
pluggable by design.
"""

from __future__ import annotations

import csv
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable

from .errors import RecordValidationError, SchemaError
from .ingest import COUNT_FIELDS, CoverageSnapshot
from .langcatalog import Catalog, CodeMapping, ProximityWeights, proximity

STRATEGIES = ("coverage", "proximity", "alignment_volume", "combined")

NO_EVIDENCE = "no_evidence"
ENTROPY_INCREASE = "entropy_increase"


@dataclass(frozen=True)
class TransferPlan:
    """Ranked transfer candidates for one target language."""

    target: str
    strategy: str
    candidates: tuple[tuple[str, float], ...]
    parameters: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}")
        langs = [lang for lang, _ in self.candidates]
        if self.target in langs:
            raise ValueError("target must not appear among candidates")
        if len(set(langs)) != len(langs):
            raise ValueError("candidates must not contain duplicates")
        ordered = sorted(self.candidates, key=lambda c: (-c[1], c[0]))
        if list(self.candidates) != ordered:
            raise ValueError("candidates must be sorted by score desc, code asc")

    def languages(self) -> list[str]:
        return [lang for lang, _ in self.candidates]


@dataclass(frozen=True)
class AlignmentRecord:
    """One curated seed alignment with its relation-label context."""

    entity_a: str
    entity_b: str
    lang_a: str
    lang_b: str
    relations_a: tuple[str, ...]
    relations_b: tuple[str, ...]


class AlignmentStats:
    """Seed-alignment volumes per (source KG, language pair).

    Counts are symmetric in the language pair: storing (en, fr) and querying
    (fr, en) give the same number. Conflicting duplicate entries are rejected.
    """

    def __init__(self, pair_counts: dict[tuple[str, str, str], int],
                 records: list[AlignmentRecord] | None = None):
        self._counts: dict[tuple[str, str, str], int] = {}
        for (kg, lang_a, lang_b), count in pair_counts.items():
            if count < 0:
                raise ValueError(f"negative alignment count for {(kg, lang_a, lang_b)}")
            key = (kg, *sorted((lang_a, lang_b)))
            existing = self._counts.get(key)
            if existing is not None and existing != count:
                raise ValueError(
                    f"conflicting counts for pair {key}: {existing} vs {count}"
                )
            self._counts[key] = count
        self.records = list(records) if records else []

    @classmethod
    def from_counts_file(cls, path) -> "AlignmentStats":
        """Load pair counts from a CSV with source_kg, lang_a, lang_b, count."""
        counts: dict[tuple[str, str, str], int] = {}
        with open(path, "r", encoding="utf-8", newline="") as fh:
            first = fh.readline()
            if not first.strip():
                raise SchemaError(f"{path}: empty file, header row required")
            delimiter = "\t" if "\t" in first else ","
            fh.seek(0)
            reader = csv.DictReader(fh, delimiter=delimiter)
            for col in ("source_kg", "lang_a", "lang_b", "count"):
                if col not in (reader.fieldnames or []):
                    raise SchemaError(f"{path}: missing required column {col!r}")
            for line_no, row in enumerate(reader, start=2):
                try:
                    count = int(row["count"])
                except ValueError:
                    raise RecordValidationError(
                        f"{path}:{line_no}: count is not an integer"
                    ) from None
                key = (row["source_kg"].strip(), row["lang_a"].strip(),
                       row["lang_b"].strip())
                counts[key] = counts.get(key, 0) + count
        return cls(counts)

    def count(self, source_kg: str, lang_a: str, lang_b: str) -> int:
        return self._counts.get((source_kg, *sorted((lang_a, lang_b))), 0)

    def total_between(self, lang_a: str, lang_b: str) -> int:
        pair = tuple(sorted((lang_a, lang_b)))
        return sum(c for (kg, a, b), c in self._counts.items() if (a, b) == pair)

    def partners_of(self, language: str) -> set[str]:
        partners = set()
        for (_, a, b), count in self._counts.items():
            if count <= 0:
                continue
            if a == language and b != language:
                partners.add(b)
            elif b == language and a != language:
                partners.add(a)
        return partners


@dataclass(frozen=True)
class RankingOutcome:
    """Rank of the gold entity for one link-prediction query (1-based)."""

    query_id: str
    gold_rank: int

    def __post_init__(self):
        if self.gold_rank < 1:
            raise ValueError(f"gold_rank must be >= 1, got {self.gold_rank}")


@dataclass(frozen=True)
class ExcludedAlignment:
    record: AlignmentRecord
    reason: str
    entropy_increase: float | None = None


def _ranked_plan(
    target: str,
    strategy: str,
    scores: dict[str, float],
    n: int,
    parameters: dict,
) -> TransferPlan:
    scores = {lang: s for lang, s in scores.items() if lang != target}
    ordered = sorted(scores.items(), key=lambda item: (-item[1], item[0]))
    return TransferPlan(
        target=target,
        strategy=strategy,
        candidates=tuple((lang, float(score)) for lang, score in ordered[:n]),
        parameters=parameters,
    )


def select_by_coverage(
    target: str,
    snapshot: CoverageSnapshot,
    catalog: Catalog,
    mappings: dict[str, CodeMapping],
    n: int,
    count_field: str = "entity_count",
) -> TransferPlan:
    """Rank candidates by digital coverage: sum of log1p counts across sources.

    Entity counts are the default signal since transfer happens between KGs;
    only languages observed at least once for the chosen field are candidates.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if count_field not in COUNT_FIELDS:
        raise ValueError(f"unknown count field {count_field!r}")
    if target not in catalog:
        raise ValueError(f"target {target!r} is not in the catalog")

    totals: dict[tuple[str, str], int] = {}
    for rec in snapshot.records:
        value = rec.count(count_field)
        if value is None:
            continue
        mapping = mappings.get(rec.language)
        if mapping is None or mapping.wals_code not in catalog:
            continue
        key = (rec.source_id, mapping.wals_code)
        totals[key] = totals.get(key, 0) + value
    scores: dict[str, float] = {}
    for (_, wals_code), total in totals.items():
        scores[wals_code] = scores.get(wals_code, 0.0) + math.log1p(total)
    return _ranked_plan(target, "coverage", scores, n, {"count_field": count_field})


def select_by_proximity(
    target: str,
    catalog: Catalog,
    weights: ProximityWeights,
    n: int,
) -> TransferPlan:
    """Rank candidates by typological proximity to the target."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    target_lg = catalog.get(target)
    if target_lg is None:
        raise ValueError(f"target {target!r} is not in the catalog")
    scores = {
        lg.wals_code: proximity(target_lg, lg, weights)
        for lg in catalog
        if lg.wals_code != target
    }
    normalized = weights.normalized()
    return _ranked_plan(
        target, "proximity", scores, n,
        {"weights": [normalized.family_w, normalized.genus_w,
                     normalized.macroarea_w, normalized.feature_w]},
    )


def select_by_alignment_volume(
    target: str,
    stats: AlignmentStats,
    n: int,
) -> TransferPlan:
    """Rank candidates by curated seed-alignment volume with the target.

    Counts are summed across source KGs; languages with no alignments to the
    target do not appear.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    scores = {
        partner: float(stats.total_between(target, partner))
        for partner in stats.partners_of(target)
    }
    return _ranked_plan(target, "alignment_volume", scores, n, {})


def select_combined(
    target: str,
    plans: list[TransferPlan],
    n: int,
) -> TransferPlan:
    """Aggregate several plans by mean reciprocal rank of candidate positions.

    A language absent from a plan contributes 0 for that plan, so candidates
    ranked well everywhere come out on top.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not plans:
        raise ValueError("need at least one plan to combine")
    positions: list[dict[str, int]] = []
    universe: set[str] = set()
    for plan in plans:
        ranks = {lang: i + 1 for i, lang in enumerate(plan.languages())}
        positions.append(ranks)
        universe.update(ranks)
    scores = {
        lang: sum(1.0 / ranks[lang] for ranks in positions if lang in ranks) / len(plans)
        for lang in universe
    }
    return _ranked_plan(
        target, "combined", scores, n,
        {"component_strategies": [p.strategy for p in plans]},
    )


def label_entropy(labels: tuple[str, ...]) -> float:
    """Shannon entropy (natural log) of a relation-label multiset."""
    if not labels:
        return 0.0
    counts = Counter(labels)
    total = len(labels)
    return -sum((c / total) * math.log(c / total) for c in counts.values())


def merged_entropy_increase(record: AlignmentRecord) -> float:
    """Entropy of the merged label distribution minus the mean of the parts."""
    merged = record.relations_a + record.relations_b
    return label_entropy(merged) - (
        label_entropy(record.relations_a) + label_entropy(record.relations_b)
    ) / 2


def curate_alignments(
    records: list[AlignmentRecord],
    entropy_threshold: float,
    scorer: Callable[[AlignmentRecord], float] = merged_entropy_increase,
) -> tuple[list[AlignmentRecord], list[ExcludedAlignment]]:
    """Split alignments into kept and excluded by noise score.

    A record is excluded when its score (default: merged-distribution entropy
    increase) exceeds the threshold, or with reason "no_evidence" when both
    relation-label multisets are empty. kept + excluded always re-assembles
    the input.
    """
    kept: list[AlignmentRecord] = []
    excluded: list[ExcludedAlignment] = []
    for record in records:
        if not record.relations_a and not record.relations_b:
            excluded.append(ExcludedAlignment(record, NO_EVIDENCE))
            continue
        increase = scorer(record)
        if increase > entropy_threshold:
            excluded.append(ExcludedAlignment(record, ENTROPY_INCREASE, increase))
        else:
            kept.append(record)
    return kept, excluded


def load_alignment_records(path) -> list[AlignmentRecord]:
    """Read alignment records; relation labels are |-joined lists."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        first = fh.readline()
        if not first.strip():
            raise SchemaError(f"{path}: empty file, header row required")
        delimiter = "\t" if "\t" in first else ","
        fh.seek(0)
        reader = csv.DictReader(fh, delimiter=delimiter)
        required = ("entity_a", "entity_b", "lang_a", "lang_b",
                    "relations_a", "relations_b")
        for col in required:
            if col not in (reader.fieldnames or []):
                raise SchemaError(f"{path}: missing required column {col!r}")

        def labels(cell: str) -> tuple[str, ...]:
            cell = (cell or "").strip()
            return tuple(part for part in cell.split("|") if part) if cell else ()

        return [
            AlignmentRecord(
                entity_a=row["entity_a"].strip(),
                entity_b=row["entity_b"].strip(),
                lang_a=row["lang_a"].strip(),
                lang_b=row["lang_b"].strip(),
                relations_a=labels(row["relations_a"]),
                relations_b=labels(row["relations_b"]),
            )
            for row in reader
        ]


def mean_reciprocal_rank(outcomes: list[RankingOutcome]) -> float:
    """Mean of 1/gold_rank over all queries."""
    if not outcomes:
        raise ValueError("outcomes must be non-empty")
    return sum(1.0 / o.gold_rank for o in outcomes) / len(outcomes)


def hits_at_k(outcomes: list[RankingOutcome], k: int) -> float:
    """Fraction of queries whose gold entity ranks within the top k."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if not outcomes:
        raise ValueError("outcomes must be non-empty")
    return sum(1 for o in outcomes if o.gold_rank <= k) / len(outcomes)


def read_ranking_outcomes(path) -> list[RankingOutcome]:
    """Read (query_id, gold_rank) rows from a character-separated file."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        first = fh.readline()
        if not first.strip():
            raise SchemaError(f"{path}: empty file, header row required")
        delimiter = "\t" if "\t" in first else ","
        fh.seek(0)
        reader = csv.DictReader(fh, delimiter=delimiter)
        for col in ("query_id", "gold_rank"):
            if col not in (reader.fieldnames or []):
                raise SchemaError(f"{path}: missing required column {col!r}")
        outcomes = []
        for line_no, row in enumerate(reader, start=2):
            try:
                rank = int(row["gold_rank"])
            except ValueError:
                raise RecordValidationError(
                    f"{path}:{line_no}: gold_rank is not an integer"
                ) from None
            try:
                outcomes.append(RankingOutcome(row["query_id"].strip(), rank))
            except ValueError as exc:
                raise RecordValidationError(f"{path}:{line_no}: {exc}") from None
    return outcomes


@dataclass(frozen=True)
class LeaderboardTable:
    """Hits@1 comparison of MKGC models across evaluation languages."""

    models: tuple[str, ...]
    languages: tuple[str, ...]
    scores: dict[tuple[str, str], float]
    families: dict[str, str] = field(default_factory=dict)

    def score(self, model: str, language: str) -> float:
        return self.scores[(model, language)]

    def ranking(self, language: str) -> list[tuple[str, float]]:
        """Models ordered by score for one language, best first."""
        pairs = [(m, self.scores[(m, language)]) for m in self.models]
        return sorted(pairs, key=lambda item: (-item[1], item[0]))

    def best(self, language: str) -> str:
        return self.ranking(language)[0][0]

    def render_text(self) -> str:
        """Fixed-width table, models ordered by mean score, best flagged *."""
        if not self.models or not self.languages:
            return ""
        best_per_lang = {lang: self.best(lang) for lang in self.languages}
        by_mean = sorted(
            self.models,
            key=lambda m: (-sum(self.scores[(m, lang)] for lang in self.languages)
                           / len(self.languages), m),
        )
        name_width = max(len("model"), max(len(m) for m in self.models))
        col_width = max(8, max(len(lang) for lang in self.languages) + 1)
        header = "model".ljust(name_width) + "".join(
            lang.rjust(col_width) for lang in self.languages
        )
        lines = [header]
        for model in by_mean:
            cells = []
            for lang in self.languages:
                value = format(self.scores[(model, lang)], ".9g")
                if best_per_lang[lang] == model:
                    value += "*"
                cells.append(value.rjust(col_width))
            lines.append(model.ljust(name_width) + "".join(cells))
        return "\n".join(lines) + "\n"


def leaderboard(results: dict[str, dict[str, float]]) -> LeaderboardTable:
    """Build a leaderboard from per-model, per-language Hits@1 percentages.

    Every model must report every language appearing anywhere in the results.
    """
    models = tuple(results)
    languages: list[str] = []
    for per_lang in results.values():
        for lang in per_lang:
            if lang not in languages:
                languages.append(lang)
    scores: dict[tuple[str, str], float] = {}
    for model, per_lang in results.items():
        for lang in languages:
            if lang not in per_lang:
                raise ValueError(f"model {model!r} has no score for {lang!r}")
            scores[(model, lang)] = float(per_lang[lang])
    return LeaderboardTable(models=models, languages=tuple(languages), scores=scores)


def load_leaderboard(path) -> LeaderboardTable:
    """Load a leaderboard CSV: model, optional family, one column per language."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        first = fh.readline()
        if not first.strip():
            raise SchemaError(f"{path}: empty file, header row required")
        delimiter = "\t" if "\t" in first else ","
        fh.seek(0)
        reader = csv.DictReader(fh, delimiter=delimiter)
        header = reader.fieldnames or []
        if "model" not in header:
            raise SchemaError(f"{path}: missing required column 'model'")
        lang_cols = [c for c in header if c not in ("model", "family")]
        results: dict[str, dict[str, float]] = {}
        families: dict[str, str] = {}
        for row in reader:
            model = row["model"].strip()
            results[model] = {lang: float(row[lang]) for lang in lang_cols}
            if "family" in header:
                families[model] = row["family"].strip()
    table = leaderboard(results)
    return LeaderboardTable(
        models=table.models, languages=table.languages,
        scores=table.scores, families=families,
    )
