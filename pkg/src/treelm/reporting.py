"""Report bundles and native SVG rendering of grouped bar charts.

Charts mirror the measurement conventions: by-condition means grouped by
model, 95% confidence-interval whiskers, and grammaticality markers per
condition. A numeric table is always emitted alongside every figure so each
figure datum is traceable to a result row.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import asdict, dataclass, field


@dataclass
class FigureDatum:
    group: str  # condition
    series: str  # model
    value: float
    ci_half: float = float("nan")
    marker: str = ""  # "strong" | "reduced" | ""


@dataclass
class ReportBundle:
    suite: str
    analysis: str
    meta: dict = field(default_factory=dict)
    tables: dict[str, list[list[str]]] = field(default_factory=dict)
    figure_title: str = ""
    figure_ylabel: str = "summed surprisal (bits)"
    figure: list[FigureDatum] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "suite": self.suite,
            "analysis": self.analysis,
            "meta": self.meta,
            "tables": self.tables,
            "figure_title": self.figure_title,
            "figure_ylabel": self.figure_ylabel,
            "figure": [asdict(d) for d in self.figure],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ReportBundle":
        return cls(
            suite=data["suite"],
            analysis=data["analysis"],
            meta=data.get("meta", {}),
            tables=data.get("tables", {}),
            figure_title=data.get("figure_title", ""),
            figure_ylabel=data.get("figure_ylabel", "summed surprisal (bits)"),
            figure=[FigureDatum(**d) for d in data.get("figure", [])],
        )


def save_bundle(bundle: ReportBundle, path):
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8") as f:
        json.dump(bundle.to_dict(), f, indent=1, sort_keys=True)
        f.write("\n")
    os.replace(tmp, path)


def load_bundle(path) -> ReportBundle:
    with open(path, encoding="utf-8") as f:
        return ReportBundle.from_dict(json.load(f))


def write_table_tsv(rows: list[list[str]], path, header_meta: dict | None = None):
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8") as f:
        for key in sorted(header_meta or {}):
            f.write(f"# {key}: {(header_meta or {})[key]}\n")
        for row in rows:
            f.write("\t".join(row) + "\n")
    os.replace(tmp, path)


MARKER_GLYPHS = {"strong": "▲", "reduced": "−"}
SERIES_COLORS = ("#4878a8", "#e49444", "#6aa56e", "#b65c5c", "#8a7bb5", "#7f7f7f")


def render_bar_chart_svg(bundle: ReportBundle, path):
    """Grouped bars by condition and model with CI whiskers and markers."""
    svg = bar_chart_svg(bundle)
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8") as f:
        f.write(svg)
    os.replace(tmp, path)


def bar_chart_svg(bundle: ReportBundle) -> str:
    data = bundle.figure
    groups = sorted({d.group for d in data})
    series = sorted({d.series for d in data})
    width, height = 720, 420
    margin_l, margin_r, margin_t, margin_b = 70, 20, 50, 80
    plot_w = width - margin_l - margin_r
    plot_h = height - margin_t - margin_b

    lo, hi = 0.0, 0.0
    for d in data:
        half = d.ci_half if math.isfinite(d.ci_half) else 0.0
        lo = min(lo, d.value - half)
        hi = max(hi, d.value + half)
    if hi == lo:
        hi = lo + 1.0
    span = (hi - lo) * 1.1
    hi = lo + span

    def y_pos(v: float) -> float:
        return margin_t + plot_h * (1.0 - (v - lo) / (hi - lo))

    group_w = plot_w / max(len(groups), 1)
    bar_w = group_w * 0.8 / max(len(series), 1)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.1f}" y="24" text-anchor="middle" font-size="15">'
        f"{_esc(bundle.figure_title or bundle.suite)}</text>",
    ]
    # y axis with ticks
    parts.append(
        f'<line x1="{margin_l}" y1="{margin_t}" x2="{margin_l}" y2="{margin_t + plot_h}" stroke="black"/>'
    )
    for frac in range(6):
        v = lo + (hi - lo) * frac / 5.0
        y = y_pos(v)
        parts.append(f'<line x1="{margin_l - 4}" y1="{y:.1f}" x2="{margin_l}" y2="{y:.1f}" stroke="black"/>')
        parts.append(
            f'<text x="{margin_l - 8}" y="{y + 4:.1f}" text-anchor="end">{v:.2f}</text>'
        )
    parts.append(
        f'<text x="18" y="{margin_t + plot_h / 2:.1f}" text-anchor="middle" '
        f'transform="rotate(-90 18 {margin_t + plot_h / 2:.1f})">{_esc(bundle.figure_ylabel)}</text>'
    )
    # zero line and x axis
    y0 = y_pos(0.0)
    parts.append(
        f'<line x1="{margin_l}" y1="{y0:.1f}" x2="{margin_l + plot_w}" y2="{y0:.1f}" stroke="#999"/>'
    )
    lookup = {(d.group, d.series): d for d in data}
    for gi, group in enumerate(groups):
        gx = margin_l + gi * group_w
        for si, s in enumerate(series):
            d = lookup.get((group, s))
            if d is None:
                continue
            x = gx + group_w * 0.1 + si * bar_w
            top = y_pos(max(d.value, 0.0))
            bot = y_pos(min(d.value, 0.0))
            color = SERIES_COLORS[si % len(SERIES_COLORS)]
            parts.append(
                f'<rect x="{x:.1f}" y="{top:.1f}" width="{bar_w * 0.9:.1f}" '
                f'height="{max(bot - top, 0.5):.1f}" fill="{color}"/>'
            )
            if math.isfinite(d.ci_half) and d.ci_half > 0:
                cx = x + bar_w * 0.45
                y_top, y_bot = y_pos(d.value + d.ci_half), y_pos(d.value - d.ci_half)
                parts.append(f'<line x1="{cx:.1f}" y1="{y_top:.1f}" x2="{cx:.1f}" y2="{y_bot:.1f}" stroke="black"/>')
                parts.append(
                    f'<line x1="{cx - 4:.1f}" y1="{y_top:.1f}" x2="{cx + 4:.1f}" y2="{y_top:.1f}" stroke="black"/>'
                )
                parts.append(
                    f'<line x1="{cx - 4:.1f}" y1="{y_bot:.1f}" x2="{cx + 4:.1f}" y2="{y_bot:.1f}" stroke="black"/>'
                )
        glyphs = {lookup[(group, s)].marker for s in series if (group, s) in lookup}
        glyph = MARKER_GLYPHS.get(next(iter(g for g in glyphs if g), ""), "")
        label_y = margin_t + plot_h + 18
        parts.append(
            f'<text x="{gx + group_w / 2:.1f}" y="{label_y}" text-anchor="middle">{_esc(group)}</text>'
        )
        if glyph:
            parts.append(
                f'<text x="{gx + group_w / 2:.1f}" y="{label_y + 16}" text-anchor="middle">{glyph}</text>'
            )
    # legend
    for si, s in enumerate(series):
        lx = margin_l + 10 + si * 140
        ly = height - 24
        color = SERIES_COLORS[si % len(SERIES_COLORS)]
        parts.append(f'<rect x="{lx}" y="{ly - 10}" width="12" height="12" fill="{color}"/>')
        parts.append(f'<text x="{lx + 18}" y="{ly}">{_esc(s)}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _esc(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
