"""Report emission: categorization CSV, metrics JSON, scatter data, figures.

Primary outputs (CSV/JSON/HTML) are byte-deterministic for a fixed input:
floats are printed with 9 significant digits, rows sort by wals_code, JSON
keys are sorted, and matplotlib's SVG output is pinned with a fixed hash salt
and no embedded date. Timestamps live only in the run_meta.json sidecar.
"""

from __future__ import annotations

import io
import json
import math
from html import escape
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .pipeline import ReportBundle, SourceAnalysis  # noqa: E402

matplotlib.rcParams["svg.hashsalt"] = "lodcoverage"

CATEGORY_COLORS = [
    "#2ca02c",  # 0: zero coverage (green)
    "#1f77b4",  # 1: blue
    "#9467bd",  # 2: purple
    "#e0c020",  # 3: yellow
    "#ff7f0e",  # 4: orange
    "#d62728",  # 5: red
]
EXTRA_COLOR = "#7f7f7f"


def fmt_float(value: float) -> str:
    """Canonical float formatting: 9 significant digits, '.' separator."""
    return format(value, ".9g")


def category_color(index: int) -> str:
    return CATEGORY_COLORS[index] if index < len(CATEGORY_COLORS) else EXTRA_COLOR


def _json_safe(value):
    if isinstance(value, float) and math.isinf(value):
        return "inf"
    return value


def write_categorization_csv(bundle: ReportBundle, path: Path) -> None:
    """One row per language; per-analysis K-means, quantile, and divergence."""
    languages = sorted({lang for a in bundle.analyses for lang in a.matrix.languages})
    header = ["wals_code", "name"]
    for analysis in bundle.analyses:
        header += [
            f"{analysis.name}_kmeans",
            f"{analysis.name}_quantile",
            f"{analysis.name}_divergence",
        ]
    lines = [",".join(header)]
    for lang in languages:
        row = [lang, bundle.names.get(lang, "")]
        for analysis in bundle.analyses:
            km = analysis.kmeans_cat.labels.get(lang)
            qt = analysis.quantile_cat.labels.get(lang)
            row.append("" if km is None else str(km))
            row.append("" if qt is None else str(qt))
            row.append(analysis.divergence.get(lang, ""))
        lines.append(",".join(row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_scatter_csv(analysis: SourceAnalysis, path: Path) -> None:
    """Scatter dataset: language, x, y (log space), K-means category."""
    lines = ["language,x,y,category"]
    for i, lang in enumerate(analysis.matrix.languages):
        x, y = analysis.matrix.values[i]
        category = analysis.kmeans_cat.labels[lang]
        lines.append(f"{lang},{fmt_float(float(x))},{fmt_float(float(y))},{category}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def metrics_document(bundle: ReportBundle) -> dict:
    doc: dict = {"k": bundle.k, "seed": bundle.seed, "analyses": {}}
    for analysis in bundle.analyses:
        entry = {
            "source_id": analysis.source_id,
            "languages": analysis.matrix.n_languages,
            "zero_coverage": len(analysis.zero_group),
            "categories": analysis.kmeans_cat.num_categories(),
            "silhouette": analysis.silhouette,
            "variance_ratio": _json_safe(analysis.variance_ratio),
            "kmeans_vs_quantile": analysis.kmeans_vs_quantile,
            "references": analysis.reference_scores,
            "notes": analysis.notes,
        }
        if analysis.trend is not None:
            entry["trend"] = {
                "slope": analysis.trend.slope,
                "intercept": analysis.trend.intercept,
                "threshold": analysis.trend.threshold,
            }
            counts = {"right_divergent": 0, "left_divergent": 0, "aligned": 0}
            for value in analysis.divergence.values():
                if value:
                    counts[value] += 1
            entry["divergence_counts"] = counts
        doc["analyses"][analysis.name] = entry
    return doc


def write_metrics_json(bundle: ReportBundle, path: Path) -> None:
    path.write_text(
        json.dumps(metrics_document(bundle), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )


def render_scatter_figure(bundle: ReportBundle, analysis: SourceAnalysis):
    """Figure-per-source scatter in log space with the category legend."""
    fig, ax = plt.subplots(figsize=(7.0, 5.5))
    matrix = analysis.matrix
    labels = analysis.kmeans_cat.labels
    categories = sorted(set(labels.values()))
    for category in categories:
        xs, ys = [], []
        for i, lang in enumerate(matrix.languages):
            if labels[lang] == category:
                xs.append(matrix.values[i, 0])
                ys.append(matrix.values[i, 1])
        name = bundle.category_names.get(category, f"category {category}")
        ax.scatter(xs, ys, s=18, color=category_color(category),
                   label=f"{category} {name}", alpha=0.8, edgecolors="none")
    if analysis.trend is not None:
        x_min = float(matrix.values[:, 0].min())
        x_max = float(matrix.values[:, 0].max())
        ax.plot(
            [x_min, x_max],
            [analysis.trend.fitted(x_min), analysis.trend.fitted(x_max)],
            color="black", linewidth=1.0, linestyle="--", label="trend",
        )
    ax.set_xlabel("Wikipedia articles, ln(1+x)")
    ax.set_ylabel(f"{analysis.source_id} coverage, ln(1+x)")
    ax.set_title(f"Language coverage: {analysis.name}")
    ax.legend(fontsize=8, loc="upper left")
    fig.tight_layout()
    return fig


def figure_outputs(bundle: ReportBundle, analysis: SourceAnalysis,
                   png_path: Path) -> str:
    """Save the PNG next to the delimited output; return the inline SVG."""
    fig = render_scatter_figure(bundle, analysis)
    fig.savefig(png_path, dpi=150)
    buffer = io.StringIO()
    fig.savefig(buffer, format="svg", metadata={"Date": None})
    plt.close(fig)
    svg = buffer.getvalue()
    # Strip the XML prolog so the SVG can sit inline in HTML.
    start = svg.find("<svg")
    return svg[start:] if start >= 0 else svg


def _metric_rows(analysis: SourceAnalysis) -> list[tuple[str, str]]:
    rows = [
        ("languages", str(analysis.matrix.n_languages)),
        ("zero-coverage languages", str(len(analysis.zero_group))),
        ("categories", str(analysis.kmeans_cat.num_categories())),
    ]
    if analysis.silhouette is not None:
        rows.append(("silhouette", fmt_float(analysis.silhouette)))
    if analysis.variance_ratio is not None:
        value = analysis.variance_ratio
        rows.append(("variance ratio", "inf" if math.isinf(value) else fmt_float(value)))
    if analysis.kmeans_vs_quantile is not None:
        rows.append(("ARI kmeans vs quantile", fmt_float(analysis.kmeans_vs_quantile["ari"])))
        rows.append(("NMI kmeans vs quantile", fmt_float(analysis.kmeans_vs_quantile["nmi"])))
    for ref_name, scores in sorted(analysis.reference_scores.items()):
        rows.append((f"ARI vs {ref_name}", fmt_float(scores["ari"])))
        rows.append((f"NMI vs {ref_name}", fmt_float(scores["nmi"])))
        rows.append((f"overlap with {ref_name}", str(scores["intersection"])))
    if analysis.trend is not None:
        rows.append(("trend slope", fmt_float(analysis.trend.slope)))
        rows.append(("trend intercept", fmt_float(analysis.trend.intercept)))
        rows.append(("divergence threshold", fmt_float(analysis.trend.threshold)))
    return rows


def write_html_report(bundle: ReportBundle, svgs: dict[str, str], path: Path) -> None:
    """Self-contained HTML: inline SVG scatters, metric and language tables."""
    parts = [
        "<!doctype html>",
        '<html lang="en"><head><meta charset="utf-8">',
        "<title>Language coverage report</title>",
        "<style>",
        "body { font-family: sans-serif; margin: 2rem auto; max-width: 64rem; color: #222; }",
        "h1 { border-bottom: 2px solid #444; padding-bottom: 0.3rem; }",
        "table { border-collapse: collapse; margin: 0.8rem 0; }",
        "th, td { border: 1px solid #bbb; padding: 0.25rem 0.6rem; text-align: left; }",
        "th { background: #eee; }",
        ".legend span { display: inline-block; margin-right: 1rem; }",
        ".swatch { display: inline-block; width: 0.8em; height: 0.8em; margin-right: 0.3em; }",
        "details { margin: 1rem 0; }",
        "</style></head><body>",
        "<h1>Language coverage report</h1>",
        f"<p>K-means categories: {bundle.k} (seed {bundle.seed}). "
        "Category 0 collects languages with zero observed coverage.</p>",
        '<p class="legend">',
    ]
    for index in sorted({c for a in bundle.analyses for c in set(a.kmeans_cat.labels.values())}):
        name = bundle.category_names.get(index, f"category {index}")
        parts.append(
            f'<span><span class="swatch" style="background:{category_color(index)}">'
            f"</span>{index} {escape(name)}</span>"
        )
    parts.append("</p>")

    for analysis in bundle.analyses:
        parts.append(f"<h2>{escape(analysis.name)} ({escape(analysis.source_id)})</h2>")
        parts.append(svgs.get(analysis.name, ""))
        parts.append("<table><tbody>")
        for label, value in _metric_rows(analysis):
            parts.append(f"<tr><th>{escape(label)}</th><td>{escape(value)}</td></tr>")
        parts.append("</tbody></table>")
        for note in analysis.notes:
            parts.append(f"<p><em>{escape(note)}</em></p>")

    languages = sorted({lang for a in bundle.analyses for lang in a.matrix.languages})
    parts.append("<details><summary>Per-language categories "
                 f"({len(languages)} languages)</summary>")
    parts.append("<table><thead><tr><th>wals_code</th><th>name</th>")
    for analysis in bundle.analyses:
        parts.append(f"<th>{escape(analysis.name)} kmeans</th>"
                     f"<th>{escape(analysis.name)} quantile</th>"
                     f"<th>{escape(analysis.name)} divergence</th>")
    parts.append("</tr></thead><tbody>")
    for lang in languages:
        parts.append(f"<tr><td>{escape(lang)}</td>"
                     f"<td>{escape(bundle.names.get(lang, ''))}</td>")
        for analysis in bundle.analyses:
            km = analysis.kmeans_cat.labels.get(lang)
            qt = analysis.quantile_cat.labels.get(lang)
            parts.append(f"<td>{'' if km is None else km}</td>"
                         f"<td>{'' if qt is None else qt}</td>"
                         f"<td>{escape(analysis.divergence.get(lang, ''))}</td>")
        parts.append("</tr>")
    parts.append("</tbody></table></details>")
    parts.append("</body></html>")
    path.write_text("\n".join(parts) + "\n", encoding="utf-8")


def emit_report(bundle: ReportBundle, outdir: Path) -> list[Path]:
    """Write every report artifact into outdir; returns the written paths."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []

    cat_path = outdir / "categorization.csv"
    write_categorization_csv(bundle, cat_path)
    written.append(cat_path)

    metrics_path = outdir / "metrics.json"
    write_metrics_json(bundle, metrics_path)
    written.append(metrics_path)

    svgs: dict[str, str] = {}
    for analysis in bundle.analyses:
        scatter_path = outdir / f"scatter_{analysis.name}.csv"
        write_scatter_csv(analysis, scatter_path)
        written.append(scatter_path)
        png_path = outdir / f"scatter_{analysis.name}.png"
        svgs[analysis.name] = figure_outputs(bundle, analysis, png_path)
        written.append(png_path)

    html_path = outdir / "report.html"
    write_html_report(bundle, svgs, html_path)
    written.append(html_path)
    return written
