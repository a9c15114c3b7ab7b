"""Command-line interface: ingest, profile, compare, transfer, eval-mkgc.

Exit codes are a stable contract: 0 success, 2 configuration or argument
problems, 3 transport failures (partial snapshots are still persisted),
4 empty or degenerate data.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .config import RunConfig, load_config, load_reference_taxonomy
from .errors import (
    ConfigError,
    DegenerateFitError,
    DuplicateKeyError,
    EmptyIntersectionError,
    EmptyMatrixError,
    InsufficientDataError,
    MappingError,
    ParseError,
    RecordValidationError,
    SchemaError,
    ShapeError,
    SnapshotFormatError,
    TransportError,
    UndefinedMetricError,
)
from .ingest import (
    CoverageSnapshot,
    fetch_sparql_counts,
    fetch_wikipedia_counts,
    load_snapshot,
    load_stats_file,
    save_snapshot,
)
from .langcatalog import load_mappings, load_wals_catalog
from .pipeline import compare_on_intersection, profile_snapshot
from .report import emit_report
from .transfer import (
    AlignmentStats,
    TransferPlan,
    hits_at_k,
    mean_reciprocal_rank,
    read_ranking_outcomes,
    select_by_alignment_volume,
    select_by_coverage,
    select_by_proximity,
    select_combined,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_TRANSPORT = 3
EXIT_EMPTY = 4

_CONFIG_ERRORS = (
    ConfigError, SchemaError, MappingError, DuplicateKeyError,
    RecordValidationError, SnapshotFormatError, ValueError, OSError,
)
_EMPTY_ERRORS = (
    EmptyMatrixError, EmptyIntersectionError, InsufficientDataError,
    UndefinedMetricError, DegenerateFitError,
)


def _write_json(doc: dict, path: Path | None) -> None:
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
        print(f"wrote {path}")


def _load_catalog_and_mappings(config: RunConfig):
    catalog = load_wals_catalog(config.catalog_path)
    mappings = load_mappings(config.mapping_path, catalog)
    return catalog, mappings


def cmd_ingest(config_path: str, out: str | None) -> int:
    config = load_config(config_path)
    if not config.sources:
        raise ConfigError("no sources configured")
    catalog, mappings = _load_catalog_and_mappings(config)
    languages = list(config.languages) if config.languages else sorted(mappings)

    records = []
    warnings: list[str] = []
    transport_failed = False
    for source in config.sources:
        print(f"ingesting {source.source_id} ({source.kind})")
        if source.kind == "stats_file":
            records.extend(load_stats_file(source))
        elif source.kind == "mediawiki_api":
            try:
                records.extend(fetch_wikipedia_counts(source, languages, config.fetch))
            except (TransportError, ParseError) as exc:
                warnings.append(f"{source.source_id}: {exc}")
                transport_failed = True
        else:
            source_records, source_warnings = fetch_sparql_counts(
                source, languages, config.fetch
            )
            records.extend(source_records)
            if source_warnings:
                warnings.extend(source_warnings)
                transport_failed = True

    snapshot = CoverageSnapshot(
        records=tuple(records),
        retrieved_at=datetime.now(timezone.utc),
        source_versions={s.source_id: s.locator for s in config.sources},
        warnings=tuple(warnings),
    )
    out_path = Path(out) if out else config.output_dir / "snapshot.json"
    out_path.parent.mkdir(parents=True, exist_ok=True)
    save_snapshot(snapshot, out_path)
    print(f"wrote {out_path} ({len(records)} records, {len(warnings)} warnings)")
    for warning in warnings:
        print(f"warning: {warning}", file=sys.stderr)
    return EXIT_TRANSPORT if transport_failed else EXIT_OK


def cmd_profile(
    config_path: str,
    snapshot_path: str,
    out: str | None,
    k: int | None,
    seed: int | None,
) -> int:
    config = load_config(config_path)
    if k is not None or seed is not None:
        config = dataclasses.replace(
            config,
            k=k if k is not None else config.k,
            seed=seed if seed is not None else config.seed,
        )
    snapshot = load_snapshot(snapshot_path)
    catalog, mappings = _load_catalog_and_mappings(config)

    references: dict[str, dict[str, int]] = {}
    class_names: dict[int, str] = {}
    for name, path in config.reference_taxonomies.items():
        taxonomy = load_reference_taxonomy(path, name)
        references[name] = taxonomy.to_wals_labels(mappings)
        if taxonomy.class_names and not class_names:
            class_names = taxonomy.class_names

    bundle = profile_snapshot(config, snapshot, catalog, mappings,
                              references, class_names)
    outdir = Path(out) if out else config.output_dir
    written = emit_report(bundle, outdir)
    meta = {
        "generated_at": datetime.now(timezone.utc).isoformat(),
        "tool_version": __version__,
        "config": str(Path(config_path).resolve()),
        "snapshot": str(Path(snapshot_path).resolve()),
        "k": bundle.k,
        "seed": bundle.seed,
    }
    meta_path = outdir / "run_meta.json"
    meta_path.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n",
                         encoding="utf-8")
    for path in written:
        print(f"wrote {path}")
    print(f"wrote {meta_path}")
    return EXIT_OK


def read_categorization_labels(path, column: str | None = None) -> dict[str, int]:
    """Read language labels back from a categorization CSV.

    Works with the profile output (pick a column, default the first
    *_kmeans one) and with bare two-column (language, label) files.
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        first = fh.readline()
        if not first.strip():
            raise SchemaError(f"{path}: empty file, header row required")
        delimiter = "\t" if "\t" in first else ","
        fh.seek(0)
        reader = csv.DictReader(fh, delimiter=delimiter)
        header = reader.fieldnames or []
        key_col = "wals_code" if "wals_code" in header else header[0]
        if column is None:
            kmeans_cols = [c for c in header if c.endswith("_kmeans")]
            if kmeans_cols:
                column = kmeans_cols[0]
            elif len(header) == 2:
                column = header[1]
            else:
                raise ConfigError(
                    f"{path}: ambiguous label column; pass --column "
                    f"(available: {header})"
                )
        if column not in header:
            raise ConfigError(f"{path}: no column {column!r} (available: {header})")
        labels: dict[str, int] = {}
        for row in reader:
            cell = (row.get(column) or "").strip()
            if not cell:
                continue
            try:
                labels[row[key_col].strip()] = int(cell)
            except ValueError:
                raise RecordValidationError(
                    f"{path}: non-integer label {cell!r} in column {column!r}"
                ) from None
    if not labels:
        raise EmptyMatrixError(f"{path}: no labeled languages in column {column!r}")
    return labels


def _read_reference_labels(path, config_path: str | None) -> dict[str, int]:
    """A reference may be an ISO-keyed taxonomy or a wals-keyed categorization."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        header_line = fh.readline()
    delimiter = "\t" if "\t" in header_line else ","
    header = [c.strip() for c in header_line.strip().split(delimiter)]
    if "iso_code" in header:
        if config_path is None:
            raise ConfigError(
                "an ISO-keyed reference taxonomy needs --config for the mapping table"
            )
        config = load_config(config_path)
        _, mappings = _load_catalog_and_mappings(config)
        taxonomy = load_reference_taxonomy(path)
        return taxonomy.to_wals_labels(mappings)
    return read_categorization_labels(path)


def cmd_compare(
    categorization_path: str,
    reference_path: str,
    config_path: str | None,
    column: str | None,
    out: str | None,
) -> int:
    labels = read_categorization_labels(categorization_path, column)
    reference = _read_reference_labels(reference_path, config_path)
    result = compare_on_intersection(labels, reference)
    _write_json(result, Path(out) if out else None)
    return EXIT_OK


def cmd_transfer(
    config_path: str,
    target: str,
    strategy: str,
    n: int,
    snapshot_path: str | None,
    alignments_path: str | None,
    out: str | None,
) -> int:
    config = load_config(config_path)
    catalog, mappings = _load_catalog_and_mappings(config)
    if target not in catalog:
        mapping = mappings.get(target)
        if mapping is None:
            raise ValueError(f"target {target!r} resolves to no catalog language")
        target = mapping.wals_code

    def coverage_plan() -> TransferPlan:
        if snapshot_path is None:
            raise ConfigError("strategy 'coverage' needs --snapshot")
        snapshot = load_snapshot(snapshot_path)
        return select_by_coverage(target, snapshot, catalog, mappings, n)

    def alignment_plan() -> TransferPlan:
        if alignments_path is None:
            raise ConfigError("strategy 'alignment_volume' needs --alignments")
        stats = AlignmentStats.from_counts_file(alignments_path)
        return select_by_alignment_volume(target, stats, n)

    if strategy == "proximity":
        plan = select_by_proximity(target, catalog, config.proximity_weights, n)
    elif strategy == "coverage":
        plan = coverage_plan()
    elif strategy == "alignment_volume":
        plan = alignment_plan()
    elif strategy == "combined":
        components = [select_by_proximity(target, catalog, config.proximity_weights, n)]
        if snapshot_path is not None:
            components.append(coverage_plan())
        if alignments_path is not None:
            components.append(alignment_plan())
        plan = select_combined(target, components, n)
    else:
        raise ValueError(f"unknown strategy {strategy!r}")

    doc = {
        "target": plan.target,
        "strategy": plan.strategy,
        "parameters": plan.parameters,
        "candidates": [
            {"language": lang, "score": score} for lang, score in plan.candidates
        ],
    }
    _write_json(doc, Path(out) if out else None)
    return EXIT_OK


def cmd_eval_mkgc(rankings_path: str, k_list: list[int], out: str | None) -> int:
    outcomes = read_ranking_outcomes(rankings_path)
    doc = {
        "num_queries": len(outcomes),
        "mrr": mean_reciprocal_rank(outcomes),
        "hits": {str(k): hits_at_k(outcomes, k) for k in k_list},
    }
    _write_json(doc, Path(out) if out else None)
    return EXIT_OK


def _parse_k_list(raw: str) -> list[int]:
    try:
        values = [int(part) for part in raw.split(",") if part.strip()]
    except ValueError:
        raise ValueError(f"--k-list must be comma-separated integers, got {raw!r}") from None
    if not values:
        raise ValueError("--k-list must not be empty")
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lodcoverage",
        description="Profile language coverage in Linked Open Data.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_ingest = sub.add_parser("ingest", help="fetch coverage counts into a snapshot")
    p_ingest.add_argument("--config", required=True)
    p_ingest.add_argument("--out", help="snapshot path (default: <output_dir>/snapshot.json)")

    p_profile = sub.add_parser("profile", help="categorize languages and emit reports")
    p_profile.add_argument("--config", required=True)
    p_profile.add_argument("--snapshot", required=True)
    p_profile.add_argument("--out", help="report directory (default: <output_dir>)")
    p_profile.add_argument("--k", type=int, help="total number of categories")
    p_profile.add_argument("--seed", type=int, help="clustering seed")

    p_compare = sub.add_parser("compare", help="score a categorization against a reference")
    p_compare.add_argument("--config", help="needed when the reference is ISO-keyed")
    p_compare.add_argument("--categorization", required=True)
    p_compare.add_argument("--reference", required=True)
    p_compare.add_argument("--column", help="label column in the categorization CSV")
    p_compare.add_argument("--out", help="metrics JSON path (default: stdout)")

    p_transfer = sub.add_parser("transfer", help="rank transfer candidates for a target")
    p_transfer.add_argument("--config", required=True)
    p_transfer.add_argument("--target", required=True)
    p_transfer.add_argument("--strategy", default="proximity",
                            choices=["coverage", "proximity", "alignment_volume",
                                     "combined"])
    p_transfer.add_argument("--n", type=int, default=10)
    p_transfer.add_argument("--snapshot", help="snapshot for the coverage strategy")
    p_transfer.add_argument("--alignments", help="alignment counts CSV")
    p_transfer.add_argument("--out", help="plan JSON path (default: stdout)")

    p_eval = sub.add_parser("eval-mkgc", help="score a ranking-outcome file")
    p_eval.add_argument("--config", help="accepted for symmetry; unused")
    p_eval.add_argument("--rankings", required=True)
    p_eval.add_argument("--k-list", default="1,3,10")
    p_eval.add_argument("--out", help="metrics JSON path (default: stdout)")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "ingest":
            return cmd_ingest(args.config, args.out)
        if args.command == "profile":
            return cmd_profile(args.config, args.snapshot, args.out, args.k, args.seed)
        if args.command == "compare":
            return cmd_compare(args.categorization, args.reference, args.config,
                               args.column, args.out)
        if args.command == "transfer":
            return cmd_transfer(args.config, args.target, args.strategy, args.n,
                                args.snapshot, args.alignments, args.out)
        if args.command == "eval-mkgc":
            return cmd_eval_mkgc(args.rankings, _parse_k_list(args.k_list), args.out)
        raise ValueError(f"unknown command {args.command!r}")
    except _EMPTY_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_EMPTY
    except (TransportError, ParseError, ShapeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_TRANSPORT
    except _CONFIG_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
