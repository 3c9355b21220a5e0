"""Result tables, CSV serialisation and a small deterministic SVG plotter."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence
from xml.sax.saxutils import escape

NONE = "none"


@dataclass
class ResultTable:
    columns: list[str]
    rows: list[list[Any]] = field(default_factory=list)
    metadata: dict[str, Any] = field(default_factory=dict)

    def add(self, *row):
        if len(row) != len(self.columns):
            raise ValueError(f"row has {len(row)} cells, table has {len(self.columns)} columns")
        self.rows.append(list(row))

    def column(self, name: str) -> list[Any]:
        if name not in self.columns:
            raise KeyError(name)
        j = self.columns.index(name)
        return [row[j] for row in self.rows]


def format_cell(value) -> str:
    if value is None:
        return NONE
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return repr(value) if math.isfinite(value) else NONE
    if isinstance(value, (tuple, list)):
        return " ".join(format_cell(v) for v in value)
    return str(value)


def to_csv(table: ResultTable) -> str:
    buf = io.StringIO()
    for key, value in table.metadata.items():
        buf.write(f"# {key}: {format_cell(value)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow([format_cell(v) for v in row])
    return buf.getvalue()


def read_csv(text: str) -> tuple[list[str], list[list[str]]]:
    lines = [line for line in text.splitlines() if not line.startswith("#")]
    rows = list(csv.reader(lines))
    return rows[0], rows[1:]


def write_csv(table: ResultTable, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(to_csv(table), encoding="utf-8", newline="")
    return path


class PlotError(ValueError):
    pass


@dataclass
class PlotSpec:
    x: str
    series: Sequence[str]
    labels: Sequence[str] | None = None
    title: str = ""
    xlabel: str | None = None
    ylabel: str | None = None
    log_y: bool = False


_COLORS = ("#d62728", "#1f77b4", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b")
_W, _H = 640, 420
_LEFT, _RIGHT, _TOP, _BOTTOM = 70, 170, 40, 50


def _num(v) -> float | None:
    if v is None or isinstance(v, bool):
        return None
    try:
        v = float(v)
    except (TypeError, ValueError):
        return None
    return v if math.isfinite(v) else None


def _fmt(v: float) -> str:
    return f"{v:.6g}"


def emit_svg(table: ResultTable, spec: PlotSpec) -> str:
    """Render one polyline per series; log-scale y drops nonpositive points."""
    for name in [spec.x, *spec.series]:
        if name not in table.columns:
            raise PlotError(f"missing column {name!r}")
    labels = list(spec.labels or spec.series)
    xs = [_num(v) for v in table.column(spec.x)]
    lines = []
    for name in spec.series:
        pts = []
        for x, y in zip(xs, (_num(v) for v in table.column(name))):
            if x is None or y is None or (spec.log_y and y <= 0):
                continue
            pts.append((x, math.log10(y) if spec.log_y else y))
        lines.append(pts)

    all_pts = [p for pts in lines for p in pts]
    x0, x1 = (min(p[0] for p in all_pts), max(p[0] for p in all_pts)) if all_pts else (0.0, 1.0)
    y0, y1 = (min(p[1] for p in all_pts), max(p[1] for p in all_pts)) if all_pts else (0.0, 1.0)
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    pw, ph = _W - _LEFT - _RIGHT, _H - _TOP - _BOTTOM

    def sx(x):
        return _LEFT + (x - x0) / (x1 - x0) * pw

    def sy(y):
        return _TOP + ph - (y - y0) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" viewBox="0 0 {_W} {_H}">',
        f'<rect x="0" y="0" width="{_W}" height="{_H}" fill="white"/>',
        f'<text x="{_LEFT + pw / 2:.1f}" y="22" text-anchor="middle" font-size="14">{escape(spec.title)}</text>',
        f'<g class="axes" stroke="black" fill="none">'
        f'<line x1="{_LEFT}" y1="{_TOP + ph}" x2="{_LEFT + pw}" y2="{_TOP + ph}"/>'
        f'<line x1="{_LEFT}" y1="{_TOP}" x2="{_LEFT}" y2="{_TOP + ph}"/></g>',
    ]
    ticks = ['<g class="ticks" font-size="10">']
    for t in range(5):
        xv = x0 + (x1 - x0) * t / 4
        yv = y0 + (y1 - y0) * t / 4
        ylab = _fmt(10**yv) if spec.log_y else _fmt(yv)
        ticks.append(f'<text x="{sx(xv):.1f}" y="{_TOP + ph + 15}" text-anchor="middle">{_fmt(xv)}</text>')
        ticks.append(f'<text x="{_LEFT - 5}" y="{sy(yv) + 3:.1f}" text-anchor="end">{ylab}</text>')
    ticks.append("</g>")
    out += ticks
    ylabel = spec.ylabel or ", ".join(spec.series)
    if spec.log_y:
        ylabel += " (log scale)"
    out.append(
        f'<text x="{_LEFT + pw / 2:.1f}" y="{_H - 12}" text-anchor="middle" font-size="12">'
        f"{escape(spec.xlabel or spec.x)}</text>"
    )
    out.append(
        f'<text x="16" y="{_TOP + ph / 2:.1f}" text-anchor="middle" font-size="12" '
        f'transform="rotate(-90 16 {_TOP + ph / 2:.1f})">{escape(ylabel)}</text>'
    )
    for j, pts in enumerate(lines):
        if not pts:
            continue
        color = _COLORS[j % len(_COLORS)]
        coords = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in pts)
        out.append(f'<polyline class="series" fill="none" stroke="{color}" stroke-width="2" points="{coords}"/>')
    out.append('<g class="legend" font-size="11">')
    for j, label in enumerate(labels):
        y = _TOP + 10 + 18 * j
        color = _COLORS[j % len(_COLORS)]
        out.append(
            f'<g class="legend-entry"><line x1="{_W - _RIGHT + 10}" y1="{y}" x2="{_W - _RIGHT + 30}" y2="{y}" '
            f'stroke="{color}" stroke-width="2"/><text x="{_W - _RIGHT + 35}" y="{y + 4}">{escape(label)}</text></g>'
        )
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"
