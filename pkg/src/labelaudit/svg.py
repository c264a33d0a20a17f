"""Dependency-free SVG line charts for learning curves.

Self-contained SVG 1.1, fixed 800x500 viewBox, fixed palette and float
formatting so identical input renders byte-identical files.
"""
from __future__ import annotations

from dataclasses import dataclass
from xml.sax.saxutils import escape

from .util import atomic_write_text

WIDTH, HEIGHT = 800, 500
MARGIN_LEFT, MARGIN_RIGHT = 70, 160
MARGIN_TOP, MARGIN_BOTTOM = 50, 60

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
           "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf")


@dataclass(frozen=True)
class Series:
    """One curve: points are (prefix size, F1); the optional band is a
    per-x (lower, upper) envelope for multi-seed spread."""

    name: str
    color: str
    points: tuple[tuple[float, float], ...]
    band: tuple[tuple[float, float, float], ...] = ()  # (x, lower, upper)


@dataclass(frozen=True)
class PlotSpec:
    title: str
    x_label: str = "sentences fed"
    y_label: str = "F1"
    series: tuple[Series, ...] = ()
    description: str = ""


def _fmt(value: float) -> str:
    return f"{value:.2f}"


def _x_scale(spec: PlotSpec) -> tuple[float, float]:
    xs = [x for s in spec.series for x, _ in s.points]
    lo, hi = (min(xs), max(xs)) if xs else (0.0, 1.0)
    if lo == hi:
        hi = lo + 1.0
    return lo, hi


def _project(x: float, y: float, x_lo: float, x_hi: float) -> tuple[float, float]:
    plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT
    plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM
    px = MARGIN_LEFT + (x - x_lo) / (x_hi - x_lo) * plot_w
    py = MARGIN_TOP + (1.0 - y) * plot_h  # y axis is F1 in [0, 1]
    return px, py


def svg_document(spec: PlotSpec) -> str:
    """Render a PlotSpec to SVG text; deterministic for identical input."""
    x_lo, x_hi = _x_scale(spec)
    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" width="{WIDTH}" height="{HEIGHT}">',
    ]
    if spec.description:
        parts.append(f"<desc>{escape(spec.description)}</desc>")
    parts.append(f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" '
                 'fill="white"/>')
    parts.append(f'<text x="{WIDTH // 2}" y="28" text-anchor="middle" '
                 f'font-family="sans-serif" font-size="16">'
                 f'{escape(spec.title)}</text>')

    plot_bottom = HEIGHT - MARGIN_BOTTOM
    plot_right = WIDTH - MARGIN_RIGHT
    # axes
    parts.append(f'<line x1="{MARGIN_LEFT}" y1="{MARGIN_TOP}" '
                 f'x2="{MARGIN_LEFT}" y2="{plot_bottom}" stroke="black"/>')
    parts.append(f'<line x1="{MARGIN_LEFT}" y1="{plot_bottom}" '
                 f'x2="{plot_right}" y2="{plot_bottom}" stroke="black"/>')
    # y ticks at 0, 0.2 .. 1.0
    for i in range(6):
        y = i / 5
        _, py = _project(x_lo, y, x_lo, x_hi)
        parts.append(f'<line x1="{MARGIN_LEFT - 4}" y1="{_fmt(py)}" '
                     f'x2="{MARGIN_LEFT}" y2="{_fmt(py)}" stroke="black"/>')
        parts.append(f'<text x="{MARGIN_LEFT - 8}" y="{_fmt(py + 4)}" '
                     f'text-anchor="end" font-family="sans-serif" '
                     f'font-size="11">{y:.1f}</text>')
    # x ticks at 5 even positions
    for i in range(6):
        x = x_lo + (x_hi - x_lo) * i / 5
        px, _ = _project(x, 0.0, x_lo, x_hi)
        parts.append(f'<line x1="{_fmt(px)}" y1="{plot_bottom}" '
                     f'x2="{_fmt(px)}" y2="{plot_bottom + 4}" stroke="black"/>')
        parts.append(f'<text x="{_fmt(px)}" y="{plot_bottom + 18}" '
                     f'text-anchor="middle" font-family="sans-serif" '
                     f'font-size="11">{x:.0f}</text>')
    # axis labels
    parts.append(f'<text x="{(MARGIN_LEFT + plot_right) // 2}" '
                 f'y="{HEIGHT - 16}" text-anchor="middle" '
                 f'font-family="sans-serif" font-size="13">'
                 f'{escape(spec.x_label)}</text>')
    parts.append(f'<text x="20" y="{(MARGIN_TOP + plot_bottom) // 2}" '
                 f'text-anchor="middle" font-family="sans-serif" '
                 f'font-size="13" transform="rotate(-90 20 '
                 f'{(MARGIN_TOP + plot_bottom) // 2})">'
                 f'{escape(spec.y_label)}</text>')

    # seed-spread bands under the lines
    for series in spec.series:
        if not series.band:
            continue
        upper = [_project(x, hi, x_lo, x_hi) for x, _, hi in series.band]
        lower = [_project(x, lo, x_lo, x_hi) for x, lo, _ in series.band]
        ring = upper + lower[::-1]
        coords = " ".join(f"{_fmt(px)},{_fmt(py)}" for px, py in ring)
        parts.append(f'<polygon points="{coords}" fill="{series.color}" '
                     'fill-opacity="0.15" stroke="none"/>')
    for series in spec.series:
        coords = " ".join(
            f"{_fmt(px)},{_fmt(py)}"
            for px, py in (_project(x, y, x_lo, x_hi)
                           for x, y in series.points))
        parts.append(f'<polyline points="{coords}" fill="none" '
                     f'stroke="{series.color}" stroke-width="2"/>')

    # legend
    ly = MARGIN_TOP + 10
    for series in spec.series:
        lx = plot_right + 12
        parts.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 22}" y2="{ly}" '
                     f'stroke="{series.color}" stroke-width="2"/>')
        parts.append(f'<text x="{lx + 28}" y="{ly + 4}" '
                     f'font-family="sans-serif" font-size="12">'
                     f'{escape(series.name)}</text>')
        ly += 18
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def render_svg(spec: PlotSpec, path: str) -> None:
    """Write the SVG atomically; identical specs give identical bytes."""
    atomic_write_text(path, svg_document(spec))
