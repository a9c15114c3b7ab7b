#!/usr/bin/env python3
"""Regenerate the bundled fixture data under src/lodcoverage/data/.

Everything is derived from a fixed seed so reruns are byte-stable. The
snapshot mimics the qualitative shape of real LOD coverage: a handful of
dominant languages, a long skewed tail, stratified KG counts, a few languages
diverging from the log-log trend in either direction, and a zero-coverage
block of more than 40% of the catalog.
"""

from __future__ import annotations

import sys
from datetime import datetime
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from lodcoverage.ingest import CoverageRecord, CoverageSnapshot, save_snapshot

DATA_DIR = Path(__file__).resolve().parents[1] / "src" / "lodcoverage" / "data"
SEED = 20251120
RETRIEVED_AT = datetime.fromisoformat("2025-11-20T12:00:00+00:00")

FEATURE_IDS = ["81A", "82A", "83A", "85A", "88A", "92A", "97A", "112A"]

# (wals_code, name, iso639_3, external_code, family, genus, macroarea, wiki_articles)
ANCHORS = [
    ("eng", "English", "eng", "en", "Indo-European", "Germanic", "Eurasia", 6_900_000),
    ("deu", "German", "deu", "de", "Indo-European", "Germanic", "Eurasia", 2_900_000),
    ("dut", "Dutch", "nld", "nl", "Indo-European", "Germanic", "Eurasia", 2_100_000),
    ("fre", "French", "fra", "fr", "Indo-European", "Romance", "Eurasia", 2_600_000),
    ("spa", "Spanish", "spa", "es", "Indo-European", "Romance", "Eurasia", 2_000_000),
    ("ita", "Italian", "ita", "it", "Indo-European", "Romance", "Eurasia", 1_900_000),
    ("por", "Portuguese", "por", "pt", "Indo-European", "Romance", "Eurasia", 1_100_000),
    ("rom", "Romanian", "ron", "ro", "Indo-European", "Romance", "Eurasia", 440_000),
    ("nap", "Neapolitan", "nap", "nap", "Indo-European", "Romance", "Eurasia", 15_000),
    ("lad", "Ladino", "lad", "lad", "Indo-European", "Romance", "Eurasia", 4_600),
    ("grk", "Greek (Modern)", "ell", "el", "Indo-European", "Greek", "Eurasia", 230_000),
    ("rus", "Russian", "rus", "ru", "Indo-European", "Slavic", "Eurasia", 2_000_000),
    ("pol", "Polish", "pol", "pl", "Indo-European", "Slavic", "Eurasia", 1_600_000),
    ("hin", "Hindi", "hin", "hi", "Indo-European", "Indic", "Eurasia", 160_000),
    ("ben", "Bengali", "ben", "bn", "Indo-European", "Indic", "Eurasia", 150_000),
    ("jpn", "Japanese", "jpn", "ja", "Japanese", "Japanese", "Eurasia", 1_400_000),
    ("kor", "Korean", "kor", "ko", "Korean", "Korean", "Eurasia", 660_000),
    ("mnd", "Mandarin", "cmn", "zh", "Sino-Tibetan", "Chinese", "Eurasia", 1_400_000),
    ("ams", "Arabic (Modern Standard)", "arb", "ar", "Afro-Asiatic", "Semitic", "Eurasia", 1_200_000),
    ("heb", "Hebrew (Modern)", "heb", "he", "Afro-Asiatic", "Semitic", "Eurasia", 350_000),
    ("tur", "Turkish", "tur", "tr", "Altaic", "Turkic", "Eurasia", 620_000),
    ("fin", "Finnish", "fin", "fi", "Uralic", "Finnic", "Eurasia", 570_000),
    ("swa", "Swahili", "swh", "sw", "Niger-Congo", "Bantoid", "Africa", 80_000),
    ("yor", "Yoruba", "yor", "yo", "Niger-Congo", "Defoid", "Africa", 33_000),
    ("ind", "Indonesian", "ind", "id", "Austronesian", "Malayo-Small", "Papunesia", 690_000),
    ("tag", "Tagalog", "tgl", "tl", "Austronesian", "Philippine", "Papunesia", 48_000),
    ("vie", "Vietnamese", "vie", "vi", "Austro-Asiatic", "Viet-Muong", "Eurasia", 1_300_000),
    ("tha", "Thai", "tha", "th", "Tai-Kadai", "Kam-Tai", "Eurasia", 160_000),
    ("qim", "Quechua (Imbabura)", "qvi", "qu", "Quechuan", "Quechuan", "South America", 24_000),
    ("gua", "Guarani", "gug", "gn", "Tupian", "Tupi-Guarani", "South America", 5_500),
    ("nav", "Navajo", "nav", "nv", "Na-Dene", "Athapaskan", "North America", 7_400),
]

SYNTHETIC_FAMILIES = [
    ("Niger-Congo", ["Bantoid", "Defoid", "Kwa", "Gur"], "Africa"),
    ("Afro-Asiatic", ["Semitic", "Chadic", "Cushitic"], "Africa"),
    ("Austronesian", ["Oceanic", "Philippine", "Malayo-Small"], "Papunesia"),
    ("Trans-New Guinea", ["Madang", "Finisterre-Huon", "Engan"], "Papunesia"),
    ("Sino-Tibetan", ["Bodic", "Kuki-Chin", "Burmese-Lolo"], "Eurasia"),
    ("Australian", ["Pama-Nyungan", "Gunwinyguan"], "Australia"),
    ("Arawakan", ["Inland Northern Arawakan", "Campa"], "South America"),
    ("Uto-Aztecan", ["Numic", "Aztecan"], "North America"),
    ("Algic", ["Algonquian"], "North America"),
    ("Dravidian", ["Southern Dravidian", "South-Central Dravidian"], "Eurasia"),
]

SYLLABLES = ["ka", "ri", "to", "mu", "sa", "ne", "lo", "vi", "da", "pe",
             "shu", "mi", "ra", "ku", "te", "ya", "bo", "ze", "fa", "ni"]

CLASS_NAMES = {
    0: "Left-Behinds",
    1: "Scrapping-Bys",
    2: "Hopefuls",
    3: "Rising Stars",
    4: "Underdogs",
    5: "Winner",
}

N_SYNTHETIC_ACTIVE = 39
N_ZERO_EXPLICIT = 10
N_ZERO_ABSENT = 40


def make_codes(rng: np.random.Generator, count: int, taken: set[str]) -> list[str]:
    letters = "abcdefghijklmnopqrstuvwxyz"
    codes = []
    while len(codes) < count:
        code = "".join(rng.choice(list(letters), size=3))
        if code not in taken:
            taken.add(code)
            codes.append(code)
    return codes


def make_name(rng: np.random.Generator, taken: set[str]) -> str:
    while True:
        n_syll = int(rng.integers(2, 4))
        name = "".join(rng.choice(SYLLABLES) for _ in range(n_syll)).capitalize()
        if name not in taken:
            taken.add(name)
            return name


def genus_prototypes(genera: list[str], rng: np.random.Generator) -> dict[str, dict[str, str]]:
    protos = {}
    for genus in sorted(set(genera)):
        protos[genus] = {
            fid: str(int(rng.integers(1, 6))) for fid in FEATURE_IDS
        }
    return protos


def language_features(proto: dict[str, str], rng: np.random.Generator) -> dict[str, str]:
    features = {}
    for fid in FEATURE_IDS:
        if rng.random() < 0.72:
            if rng.random() < 0.82:
                features[fid] = proto[fid]
            else:
                features[fid] = str(int(rng.integers(1, 6)))
    return features


def main() -> None:
    rng = np.random.default_rng(SEED)
    DATA_DIR.mkdir(parents=True, exist_ok=True)

    taken_codes = {a[0] for a in ANCHORS}
    taken_names = {a[1] for a in ANCHORS}
    n_synth = N_SYNTHETIC_ACTIVE + N_ZERO_EXPLICIT + N_ZERO_ABSENT
    synth_codes = make_codes(rng, n_synth, taken_codes)

    languages = []  # dicts with all per-language info
    for code, name, iso, ext, family, genus, area, wiki in ANCHORS:
        languages.append(dict(
            wals=code, name=name, iso=iso, ext=ext, family=family,
            genus=genus, area=area, wiki=wiki, tier="anchor",
        ))
    for i, code in enumerate(synth_codes):
        family, genera, area = SYNTHETIC_FAMILIES[i % len(SYNTHETIC_FAMILIES)]
        genus = genera[int(rng.integers(len(genera)))]
        tier = ("active" if i < N_SYNTHETIC_ACTIVE
                else "zero_explicit" if i < N_SYNTHETIC_ACTIVE + N_ZERO_EXPLICIT
                else "zero_absent")
        wiki = 0
        if tier == "active":
            wiki = int(round(float(np.exp(rng.uniform(np.log(80), np.log(200_000))))))
        languages.append(dict(
            wals=code, name=make_name(rng, taken_names), iso=code, ext=code,
            family=family, genus=genus, area=area, wiki=wiki, tier=tier,
        ))

    protos = genus_prototypes([lg["genus"] for lg in languages], rng)
    for lg in languages:
        lg["features"] = language_features(protos[lg["genus"]], rng)

    active = [lg for lg in languages if lg["wiki"] > 0]
    # Divergence special cases: strong wiki but near-empty KG and vice versa.
    right_divergent = {"vie", "tha", active[34]["wals"]}
    left_divergent = {"gua", active[38]["wals"], active[42]["wals"]}

    strata = [-0.9, 0.0, 0.9]
    for lg in active:
        log_a = np.log(lg["wiki"])
        stratum = strata[int(rng.integers(3))]
        if lg["wals"] in right_divergent:
            lg["dbpedia"] = int(rng.integers(5, 25))
        elif lg["wals"] in left_divergent:
            lg["dbpedia"] = int(rng.integers(40_000, 90_000))
        else:
            lg["dbpedia"] = int(round(float(np.exp(
                0.92 * log_a - 1.3 + stratum + rng.normal(0, 0.12)
            ))))
        group = int(rng.integers(3))
        if group == 0:
            lg["wikidata"] = int(round(float(np.exp(1.02 * log_a - 0.6 + rng.normal(0, 0.25)))))
        elif group == 1:
            lg["wikidata"] = int(round(float(np.exp(0.55 * log_a + 2.2 + rng.normal(0, 0.25)))))
        else:
            lg["wikidata"] = int(round(float(np.exp(8.0 + rng.normal(0, 0.4)))))
        lg["babelnet"] = int(round(float(np.exp(0.58 * log_a + 4.4 + rng.normal(0, 0.18)))))
        lg["dbpedia_relations"] = int(rng.integers(40, 700))

    # --- catalog ---
    lines = ["wals_code,name,iso639_3,family,genus,macroarea," + ",".join(FEATURE_IDS)]
    for lg in sorted(languages, key=lambda d: d["wals"]):
        cells = [lg["wals"], lg["name"], lg["iso"], lg["family"], lg["genus"], lg["area"]]
        cells += [lg["features"].get(fid, "") for fid in FEATURE_IDS]
        lines.append(",".join(cells))
    (DATA_DIR / "fixture_catalog.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")

    # --- mappings ---
    lines = ["external_code,wals_code,confidence"]
    for lg in sorted(languages, key=lambda d: d["ext"]):
        lines.append(f"{lg['ext']},{lg['wals']},exact")
    (DATA_DIR / "fixture_mappings.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")

    # --- snapshot ---
    records = []
    for lg in sorted(languages, key=lambda d: d["ext"]):
        if lg["tier"] == "zero_absent":
            continue
        if lg["tier"] == "zero_explicit":
            records.append(CoverageRecord(lg["ext"], "wikipedia", article_count=0))
            continue
        records.append(CoverageRecord(lg["ext"], "wikipedia", article_count=lg["wiki"]))
        # A handful of active languages are missing from individual KGs so
        # the absent-vs-zero distinction stays exercised downstream.
        if rng.random() > 0.08:
            records.append(CoverageRecord(
                lg["ext"], "dbpedia",
                entity_count=lg["dbpedia"],
                relation_count=lg["dbpedia_relations"],
            ))
        if rng.random() > 0.12:
            records.append(CoverageRecord(lg["ext"], "wikidata", entity_count=lg["wikidata"]))
        if rng.random() > 0.20:
            records.append(CoverageRecord(lg["ext"], "babelnet", entity_count=lg["babelnet"]))
    snapshot = CoverageSnapshot(
        records=tuple(records),
        retrieved_at=RETRIEVED_AT,
        source_versions={
            "wikipedia": "fixture generator, synthetic site statistics",
            "dbpedia": "fixture generator, synthetic label counts",
            "wikidata": "fixture generator, synthetic label counts",
            "babelnet": "fixture generator, synthetic synset statistics",
        },
    )
    save_snapshot(snapshot, DATA_DIR / "fixture_snapshot.json")

    # --- babelnet stats file (offline ingest demo) ---
    lines = ["language,entity_count"]
    for lg in sorted(active, key=lambda d: d["ext"]):
        lines.append(f"{lg['ext']},{lg['babelnet']}")
    (DATA_DIR / "fixture_babelnet_stats.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")

    # --- reference taxonomy (Joshi-style classes, externally keyed) ---
    scored = sorted(active, key=lambda d: d["wiki"])
    classes: dict[str, int] = {}
    for rank, lg in enumerate(scored):
        base = 1 + int(5 * rank / len(scored))  # 1..5 across active languages
        if rng.random() < 0.25:
            base += int(rng.integers(-1, 2))
        classes[lg["ext"]] = int(np.clip(base, 1, 5))
    zero_langs = [lg for lg in languages if lg["wiki"] == 0]
    for lg in zero_langs[:20]:
        classes[lg["ext"]] = 0 if rng.random() < 0.8 else 1
    lines = ["iso_code,class_index,class_name"]
    for ext in sorted(classes):
        index = classes[ext]
        lines.append(f"{ext},{index},{CLASS_NAMES[index]}")
    (DATA_DIR / "reference_taxonomy.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")

    # --- MKGC leaderboard fixture (published Hits@1 percentages) ---
    table = [
        "model,family,Greek,Japanese,English,Spanish,French",
        "KENS,GRAPH,27.5,32.9,14.4,22.3,25.2",
        "SS-AGA,GRAPH,30.8,34.6,16.3,25.5,27.1",
        "AlignKGC,HYBRID,57.6,53.2,37.2,53.0,52.9",
        "JMAC,HYBRID,55.2,53.3,29.5,45.4,49.3",
        "DMGNNSI,HYBRID,63.6,59.7,38.7,57.3,60.2",
        "CA-MKGC,HYBRID,59.6,54.6,34.9,49.1,51.3",
    ]
    (DATA_DIR / "table1_hits_at_1.csv").write_text("\n".join(table) + "\n", encoding="utf-8")

    print(f"regenerated fixture data in {DATA_DIR}")
    print(f"  languages: {len(languages)} "
          f"(active {len(active)}, zero-coverage {len(languages) - len(active)})")
    print(f"  snapshot records: {len(records)}")


if __name__ == "__main__":
    main()
