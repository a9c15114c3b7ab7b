from __future__ import annotations

import csv
import json
import math
from datetime import datetime, timezone
from pathlib import Path

import pytest

from lodcoverage.cli import main
from lodcoverage.ingest import CoverageRecord, CoverageSnapshot, load_snapshot, save_snapshot

from .fixture_server import SPARQL_TEMPLATE, FixtureState, run_fixture_server
from .oracles import silhouette_oracle

CATALOG_4 = """wals_code,name,iso639_3,family,genus,macroarea,81A
nap,Neapolitan,nap,Indo-European,Romance,Eurasia,1
lad,Ladino,lad,Indo-European,Romance,Eurasia,1
deu,German,deu,Indo-European,Germanic,Eurasia,2
jpn,Japanese,jpn,Japanese,Japanese,Eurasia,3
"""

MAPPINGS_4 = """external_code,wals_code,confidence
nap,nap,exact
lad,lad,exact
de,deu,exact
ja,jpn,exact
"""

VARIABLES_WIKI_KG = """
[[variables]]
name = "wiki"
source_id = "wikipedia"
field = "article_count"

[[variables]]
name = "kg"
source_id = "dbpedia"
field = "entity_count"
"""


def write_inputs(tmp_path: Path, catalog=CATALOG_4, mappings=MAPPINGS_4) -> None:
    (tmp_path / "catalog.csv").write_text(catalog, encoding="utf-8")
    (tmp_path / "mappings.csv").write_text(mappings, encoding="utf-8")


def write_config(tmp_path: Path, body: str, name="config.toml") -> Path:
    header = 'catalog_path = "catalog.csv"\nmapping_path = "mappings.csv"\n'
    path = tmp_path / name
    path.write_text(header + body, encoding="utf-8")
    return path


def snapshot_file(tmp_path: Path, records, name="snapshot.json") -> Path:
    snapshot = CoverageSnapshot(
        tuple(records), datetime(2025, 1, 1, tzinfo=timezone.utc)
    )
    path = tmp_path / name
    save_snapshot(snapshot, path)
    return path


class TestIngest:
    def test_stats_file_source(self, tmp_path):
        write_inputs(tmp_path)
        (tmp_path / "stats.csv").write_text(
            "language,entity_count\nnap,10\nlad,5\n", encoding="utf-8"
        )
        config = write_config(tmp_path, """
[[sources]]
source_id = "babelnet"
kind = "stats_file"
locator = "stats.csv"

[[variables]]
name = "bn"
source_id = "babelnet"
field = "entity_count"
""")
        out = tmp_path / "snap.json"
        assert main(["ingest", "--config", str(config), "--out", str(out)]) == 0
        snapshot = load_snapshot(out)
        assert len(snapshot.records) == 2
        assert snapshot.warnings == ()

    def test_zero_sources_is_config_error(self, tmp_path, capsys):
        write_inputs(tmp_path)
        config = write_config(tmp_path, """
[[variables]]
name = "bn"
source_id = "babelnet"
field = "entity_count"
""")
        assert main(["ingest", "--config", str(config)]) == 2
        assert "no sources" in capsys.readouterr().err

    def test_live_sources_against_fixture_server(self, tmp_path):
        write_inputs(tmp_path)
        state = FixtureState()
        state.wiki_counts = {"nap": 100, "lad": 50, "de": 2000, "ja": 1500}
        state.sparql_counts = {"nap": 7, "lad": 3, "de": 90, "ja": 80}
        with run_fixture_server(state) as base:
            config = write_config(tmp_path, f"""
[fetch]
max_attempts = 2
backoff_base = 0.001

[[sources]]
source_id = "wikipedia"
kind = "mediawiki_api"
locator = "{base}/wiki/{{lang}}/w/api.php"
count_field = "article_count"

[[sources]]
source_id = "dbpedia"
kind = "sparql_endpoint"
locator = "{base}/sparql"
count_field = "entity_count"
query_template = "{SPARQL_TEMPLATE}"
""" + VARIABLES_WIKI_KG)
            out = tmp_path / "snap.json"
            assert main(["ingest", "--config", str(config), "--out", str(out)]) == 0
        snapshot = load_snapshot(out)
        assert len(snapshot.records) == 8
        by_key = {(r.language, r.source_id): r for r in snapshot.records}
        assert by_key[("nap", "wikipedia")].article_count == 100
        assert by_key[("nap", "dbpedia")].entity_count == 7

    def test_unreachable_endpoint_exits_3_with_partial_snapshot(self, tmp_path):
        write_inputs(tmp_path)
        state = FixtureState()
        state.sparql_counts = {"nap": 7, "lad": 3, "de": 90, "ja": 80}
        state.always_503 = {"nap", "lad", "de", "ja"}  # wikipedia keys fail
        with run_fixture_server(state) as base:
            config = write_config(tmp_path, f"""
[fetch]
max_attempts = 2
backoff_base = 0.001

[[sources]]
source_id = "wikipedia"
kind = "mediawiki_api"
locator = "{base}/wiki/{{lang}}/w/api.php"
count_field = "article_count"
""" + """
[[variables]]
name = "wiki"
source_id = "wikipedia"
field = "article_count"
""")
            out = tmp_path / "snap.json"
            assert main(["ingest", "--config", str(config), "--out", str(out)]) == 3
        snapshot = load_snapshot(out)
        assert snapshot.records == ()
        assert snapshot.warnings and "wikipedia" in snapshot.warnings[0]


def profile_records():
    # Two obvious strata plus nothing zero-coverage.
    records = []
    low = [("nap", 20, 7), ("lad", 25, 8)]
    high = [("de", 150_000, 40_000), ("ja", 120_000, 35_000)]
    for lang, articles, entities in low + high:
        records.append(CoverageRecord(lang, "wikipedia", article_count=articles))
        records.append(CoverageRecord(lang, "dbpedia", entity_count=entities))
    return records


class TestProfile:
    def run_profile(self, tmp_path, records, body, out="report"):
        write_inputs(tmp_path)
        config = write_config(tmp_path, body)
        snap = snapshot_file(tmp_path, records)
        code = main(["profile", "--config", str(config), "--snapshot", str(snap),
                     "--out", str(tmp_path / out)])
        return code, tmp_path / out

    def test_two_strata_silhouette_above_half(self, tmp_path):
        code, outdir = self.run_profile(
            tmp_path, profile_records(), "k = 2\n" + VARIABLES_WIKI_KG
        )
        assert code == 0
        doc = json.loads((outdir / "metrics.json").read_text())
        entry = doc["analyses"]["kg"]
        assert entry["silhouette"] > 0.5
        # Cross-check the reported value against the brute-force oracle using
        # the emitted scatter dataset (no zero-coverage rows here). The CSV
        # carries 9 significant digits, so the tolerance is looser than the
        # full-precision oracle checks in test_metrics.
        with open(outdir / "scatter_kg.csv") as fh:
            rows = list(csv.DictReader(fh))
        points = [(float(r["x"]), float(r["y"])) for r in rows]
        labels = [int(r["category"]) for r in rows]
        assert entry["silhouette"] == pytest.approx(
            silhouette_oracle(points, labels), abs=1e-6
        )

    def test_outputs_are_deterministic(self, tmp_path):
        code1, out1 = self.run_profile(
            tmp_path, profile_records(), "k = 2\n" + VARIABLES_WIKI_KG, out="r1"
        )
        code2, out2 = self.run_profile(
            tmp_path, profile_records(), "k = 2\n" + VARIABLES_WIKI_KG, out="r2"
        )
        assert code1 == code2 == 0
        for name in ("categorization.csv", "metrics.json", "scatter_kg.csv",
                     "report.html"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()

    def test_all_zero_counts_collapse_to_category_zero(self, tmp_path):
        records = []
        for lang in ("nap", "lad", "de", "ja"):
            records.append(CoverageRecord(lang, "wikipedia", article_count=0))
            records.append(CoverageRecord(lang, "dbpedia", entity_count=0))
        code, outdir = self.run_profile(tmp_path, records, VARIABLES_WIKI_KG)
        assert code == 0
        with open(outdir / "categorization.csv") as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 4
        assert all(r["kg_kmeans"] == "0" for r in rows)
        with open(outdir / "scatter_kg.csv") as fh:
            scatter = list(csv.DictReader(fh))
        assert all(r["x"] == "0" and r["y"] == "0" for r in scatter)

    def test_empty_matrix_exits_4(self, tmp_path):
        records = [CoverageRecord("zz-unmapped", "wikipedia", article_count=5),
                   CoverageRecord("zz-unmapped", "dbpedia", entity_count=5)]
        body = """
[[variables]]
name = "wiki"
source_id = "wikipedia"
field = "article_count"
missing_policy = "drop_language"

[[variables]]
name = "kg"
source_id = "dbpedia"
field = "entity_count"
missing_policy = "drop_language"
"""
        code, _ = self.run_profile(tmp_path, records, body)
        assert code == 4

    def test_k_override_controls_category_count(self, tmp_path):
        write_inputs(tmp_path)
        config = write_config(tmp_path, "k = 2\n" + VARIABLES_WIKI_KG)
        snap = snapshot_file(tmp_path, profile_records())
        outdir = tmp_path / "r3"
        assert main(["profile", "--config", str(config), "--snapshot", str(snap),
                     "--out", str(outdir), "--k", "3"]) == 0
        doc = json.loads((outdir / "metrics.json").read_text())
        assert doc["k"] == 3
        assert doc["analyses"]["kg"]["categories"] == 3

    def test_invalid_k_exits_2(self, tmp_path):
        write_inputs(tmp_path)
        config = write_config(tmp_path, VARIABLES_WIKI_KG)
        snap = snapshot_file(tmp_path, profile_records())
        assert main(["profile", "--config", str(config), "--snapshot", str(snap),
                     "--out", str(tmp_path / "r"), "--k", "0"]) == 2

    def test_timestamps_only_in_sidecar(self, tmp_path):
        code, outdir = self.run_profile(
            tmp_path, profile_records(), "k = 2\n" + VARIABLES_WIKI_KG
        )
        assert code == 0
        meta = json.loads((outdir / "run_meta.json").read_text())
        assert "generated_at" in meta
        primary = (outdir / "metrics.json").read_text()
        assert "generated_at" not in primary


class TestCompare:
    def make_categorization(self, tmp_path, labels, name="cat.csv"):
        lines = ["wals_code,kg_kmeans"] + [f"{k},{v}" for k, v in labels.items()]
        path = tmp_path / name
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return path

    def test_self_comparison_is_perfect(self, tmp_path, capsys):
        path = self.make_categorization(tmp_path, {"a": 0, "b": 0, "c": 1, "d": 2})
        assert main(["compare", "--categorization", str(path),
                     "--reference", str(path)]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["ari"] == 1.0 and doc["nmi"] == 1.0
        assert doc["intersection"] == 4

    def test_label_permuted_copy_is_perfect(self, tmp_path, capsys):
        p1 = self.make_categorization(tmp_path, {"a": 0, "b": 0, "c": 1, "d": 2})
        p2 = self.make_categorization(
            tmp_path, {"a": 9, "b": 9, "c": 4, "d": 0}, name="cat2.csv"
        )
        assert main(["compare", "--categorization", str(p1),
                     "--reference", str(p2)]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["ari"] == 1.0 and doc["nmi"] == 1.0

    def test_disjoint_reference_exits_4(self, tmp_path):
        p1 = self.make_categorization(tmp_path, {"a": 0, "b": 1})
        p2 = self.make_categorization(tmp_path, {"x": 0, "y": 1}, name="cat2.csv")
        assert main(["compare", "--categorization", str(p1),
                     "--reference", str(p2)]) == 4

    def test_iso_keyed_reference_uses_mapping_table(self, tmp_path, capsys):
        write_inputs(tmp_path)
        config = write_config(tmp_path, VARIABLES_WIKI_KG)
        cat = self.make_categorization(
            tmp_path, {"nap": 0, "lad": 0, "deu": 1, "jpn": 1}
        )
        reference = tmp_path / "ref.csv"
        reference.write_text(
            "iso_code,class_index,class_name\n"
            "nap,0,Left-Behinds\nlad,0,Left-Behinds\nde,5,Winner\nja,5,Winner\n",
            encoding="utf-8",
        )
        assert main(["compare", "--config", str(config), "--categorization", str(cat),
                     "--reference", str(reference)]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["ari"] == 1.0 and doc["intersection"] == 4

    def test_iso_keyed_reference_without_config_exits_2(self, tmp_path):
        cat = self.make_categorization(tmp_path, {"nap": 0})
        reference = tmp_path / "ref.csv"
        reference.write_text("iso_code,class_index\nnap,0\n", encoding="utf-8")
        assert main(["compare", "--categorization", str(cat),
                     "--reference", str(reference)]) == 2


class TestTransferCommand:
    def test_proximity_plan_matches_hand_computation(self, tmp_path, capsys):
        write_inputs(tmp_path)
        config = write_config(tmp_path, """
[proximity_weights]
family = 0.0
genus = 1.0
macroarea = 0.0
features = 0.0
""" + VARIABLES_WIKI_KG)
        assert main(["transfer", "--config", str(config), "--target", "nap",
                     "--strategy", "proximity", "--n", "3"]) == 0
        doc = json.loads(capsys.readouterr().out)
        # Genus-only: lad shares Romance (1.0); deu and jpn share nothing (0.0).
        assert doc["candidates"][0] == {"language": "lad", "score": 1.0}
        assert [c["language"] for c in doc["candidates"]] == ["lad", "deu", "jpn"]
        assert [c["score"] for c in doc["candidates"][1:]] == [0.0, 0.0]

    def test_external_code_target_resolves(self, tmp_path, capsys):
        write_inputs(tmp_path)
        config = write_config(tmp_path, VARIABLES_WIKI_KG)
        assert main(["transfer", "--config", str(config), "--target", "ja",
                     "--strategy", "proximity", "--n", "1"]) == 0
        assert json.loads(capsys.readouterr().out)["target"] == "jpn"

    def test_unresolved_target_exits_2(self, tmp_path):
        write_inputs(tmp_path)
        config = write_config(tmp_path, VARIABLES_WIKI_KG)
        assert main(["transfer", "--config", str(config), "--target", "zzz"]) == 2

    def test_coverage_strategy(self, tmp_path, capsys):
        write_inputs(tmp_path)
        config = write_config(tmp_path, VARIABLES_WIKI_KG)
        snap = snapshot_file(tmp_path, [
            CoverageRecord("de", "dbpedia", entity_count=1000),
            CoverageRecord("ja", "dbpedia", entity_count=10),
        ])
        assert main(["transfer", "--config", str(config), "--target", "nap",
                     "--strategy", "coverage", "--snapshot", str(snap),
                     "--n", "2"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert [c["language"] for c in doc["candidates"]] == ["deu", "jpn"]
        assert doc["candidates"][0]["score"] == pytest.approx(math.log1p(1000))

    def test_coverage_without_snapshot_exits_2(self, tmp_path):
        write_inputs(tmp_path)
        config = write_config(tmp_path, VARIABLES_WIKI_KG)
        assert main(["transfer", "--config", str(config), "--target", "nap",
                     "--strategy", "coverage"]) == 2

    def test_alignment_strategy(self, tmp_path, capsys):
        write_inputs(tmp_path)
        config = write_config(tmp_path, VARIABLES_WIKI_KG)
        counts = tmp_path / "alignments.csv"
        counts.write_text(
            "source_kg,lang_a,lang_b,count\nkgA,deu,nap,40\nkgA,jpn,nap,100\n",
            encoding="utf-8",
        )
        assert main(["transfer", "--config", str(config), "--target", "nap",
                     "--strategy", "alignment_volume", "--alignments", str(counts),
                     "--n", "5"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert [c["language"] for c in doc["candidates"]] == ["jpn", "deu"]

    def test_combined_strategy(self, tmp_path, capsys):
        write_inputs(tmp_path)
        config = write_config(tmp_path, VARIABLES_WIKI_KG)
        snap = snapshot_file(tmp_path, [
            CoverageRecord("lad", "dbpedia", entity_count=1000),
            CoverageRecord("de", "dbpedia", entity_count=10),
        ])
        assert main(["transfer", "--config", str(config), "--target", "nap",
                     "--strategy", "combined", "--snapshot", str(snap),
                     "--n", "3"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["strategy"] == "combined"
        # lad leads both component plans, so it leads the aggregation.
        assert doc["candidates"][0] == {"language": "lad", "score": 1.0}


class TestEvalMkgc:
    def test_fixture_values(self, tmp_path, capsys):
        path = tmp_path / "rankings.csv"
        path.write_text("query_id,gold_rank\nq1,1\nq2,2\nq3,4\n", encoding="utf-8")
        assert main(["eval-mkgc", "--rankings", str(path), "--k-list", "1,3"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["mrr"] == pytest.approx(7 / 12, abs=1e-12)
        assert doc["hits"]["1"] == pytest.approx(1 / 3)
        assert doc["hits"]["3"] == pytest.approx(2 / 3)

    def test_missing_file_exits_2(self, tmp_path):
        assert main(["eval-mkgc", "--rankings", str(tmp_path / "nope.csv")]) == 2

    def test_bad_k_list_exits_2(self, tmp_path):
        path = tmp_path / "rankings.csv"
        path.write_text("query_id,gold_rank\nq1,1\n", encoding="utf-8")
        assert main(["eval-mkgc", "--rankings", str(path), "--k-list", "a,b"]) == 2


class TestBundledFixtureConfig:
    def test_offline_ingest_with_bundled_config(self, tmp_path, data_dir):
        out = tmp_path / "snap.json"
        assert main(["ingest", "--config", str(data_dir / "fixture_config.toml"),
                     "--out", str(out)]) == 0
        snapshot = load_snapshot(out)
        assert snapshot.source_ids() == {"babelnet"}
        assert len(snapshot.records) == 70
