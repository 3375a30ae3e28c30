"""Standalone SVG figures: contour overlays and diverging heat maps.

Output is plain text with fixed float formatting so identical inputs give
byte-identical files.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .zone import Extent, ProbabilityGrid, RulebookZone

WIDTH = 560
HEIGHT = 600
MARGIN = 60
PALETTE = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2"]
# Heat-map colors are quantized so neighbouring cells can share one rect.
COLOR_LEVELS = 64


def _escape(text: str) -> str:
    return (
        text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;").replace('"', "&quot;")
    )


class _Frame:
    def __init__(self, extent: Extent):
        self.extent = extent
        span_x = extent.x_max - extent.x_min
        span_y = extent.y_max - extent.y_min
        plot_w = WIDTH - 2 * MARGIN
        plot_h = HEIGHT - 2 * MARGIN
        self.scale = min(plot_w / span_x, plot_h / span_y)
        self.left = MARGIN + (plot_w - span_x * self.scale) / 2
        self.bottom = HEIGHT - MARGIN - (plot_h - span_y * self.scale) / 2

    def px(self, x: float) -> float:
        return self.left + (x - self.extent.x_min) * self.scale

    def py(self, y: float) -> float:
        return self.bottom - (y - self.extent.y_min) * self.scale


def _header(title: str) -> list[str]:
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        '<rect x="0" y="0" width="100%" height="100%" fill="#ffffff"/>',
        f'<text x="{WIDTH / 2:.1f}" y="30" text-anchor="middle" font-size="16" '
        f'font-family="sans-serif">{_escape(title)}</text>',
    ]


def _axes(frame: _Frame) -> list[str]:
    e = frame.extent
    out = [
        f'<rect x="{frame.px(e.x_min):.2f}" y="{frame.py(e.y_max):.2f}" '
        f'width="{(e.x_max - e.x_min) * frame.scale:.2f}" '
        f'height="{(e.y_max - e.y_min) * frame.scale:.2f}" fill="none" stroke="#888888"/>'
    ]
    for x in np.arange(np.ceil(e.x_min * 2) / 2, e.x_max + 1e-9, 0.5):
        out.append(
            f'<text x="{frame.px(x):.2f}" y="{frame.py(e.y_min) + 16:.2f}" text-anchor="middle" '
            f'font-size="10" font-family="sans-serif">{x:.1f}</text>'
        )
    for y in np.arange(np.ceil(e.y_min * 2) / 2, e.y_max + 1e-9, 0.5):
        out.append(
            f'<text x="{frame.px(e.x_min) - 6:.2f}" y="{frame.py(y) + 3:.2f}" text-anchor="end" '
            f'font-size="10" font-family="sans-serif">{y:.1f}</text>'
        )
    out.append(
        f'<text x="{WIDTH / 2:.1f}" y="{HEIGHT - 16}" text-anchor="middle" font-size="12" '
        'font-family="sans-serif">x (ft)</text>'
    )
    out.append(
        f'<text x="16" y="{HEIGHT / 2:.1f}" text-anchor="middle" font-size="12" '
        f'font-family="sans-serif" transform="rotate(-90 16 {HEIGHT / 2:.1f})">y (ft)</text>'
    )
    return out


def _rulebook(frame: _Frame, zone: RulebookZone) -> str:
    return (
        f'<rect x="{frame.px(-zone.x_half):.2f}" y="{frame.py(zone.y_high):.2f}" '
        f'width="{2 * zone.x_half * frame.scale:.2f}" '
        f'height="{(zone.y_high - zone.y_low) * frame.scale:.2f}" '
        'fill="none" stroke="#000000" stroke-width="2"/>'
    )


def contour_svg(
    curves: Sequence[tuple[str, np.ndarray]],
    zone: RulebookZone,
    extent: Extent,
    title: str = "Strike-zone contours",
) -> str:
    """Closed polylines, one per ``(label, vertices)``, over the rule-book box."""
    frame = _Frame(extent)
    lines = _header(title) + _axes(frame)
    lines.append(_rulebook(frame, zone))
    for i, (label, pts) in enumerate(curves):
        color = PALETTE[i % len(PALETTE)]
        coords = " ".join(f"{frame.px(x):.2f},{frame.py(y):.2f}" for x, y in pts)
        lines.append(
            f'<polygon points="{coords}" fill="none" stroke="{color}" stroke-width="1.5"/>'
        )
        ly = 60 + 18 * i
        lines.append(
            f'<line x1="{WIDTH - MARGIN - 60}" y1="{ly}" x2="{WIDTH - MARGIN - 40}" y2="{ly}" '
            f'stroke="{color}" stroke-width="2"/>'
        )
        lines.append(
            f'<text x="{WIDTH - MARGIN - 34}" y="{ly + 4}" font-size="11" '
            f'font-family="sans-serif">{_escape(label)}</text>'
        )
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def _diverging(t: float) -> str:
    """Blue (-1) through white (0) to red (+1)."""
    t = max(-1.0, min(1.0, t))
    if t >= 0:
        r, g, b = 255, round(255 * (1 - t)), round(255 * (1 - t))
    else:
        r, g, b = round(255 * (1 + t)), round(255 * (1 + t)), 255
    return f"#{r:02x}{g:02x}{b:02x}"


def _sequential(t: float) -> str:
    """White (0) to dark red (1)."""
    t = max(0.0, min(1.0, t))
    return f"#{255:02x}{round(255 * (1 - t)):02x}{round(255 * (1 - 0.8 * t)):02x}"


def heatmap_svg(
    grid: ProbabilityGrid,
    zone: RulebookZone,
    title: str = "Strike probability difference",
    diverging: bool = True,
) -> str:
    """Cell heat map. Diverging maps are centred at 0 and scaled by ``max|value|``."""
    extent = Extent(grid.x_min, grid.x_max, grid.y_min, grid.y_max)
    frame = _Frame(extent)
    lines = _header(title)
    values = grid.values
    if diverging:
        vmax = float(np.abs(values).max())
        scaled = values / vmax if vmax > 0 else np.zeros_like(values)
        q = np.round(scaled * COLOR_LEVELS).astype(int)
        color_of = lambda level: _diverging(level / COLOR_LEVELS)  # noqa: E731
    else:
        vmax = 1.0
        q = np.round(np.clip(values, 0, 1) * COLOR_LEVELS).astype(int)
        color_of = lambda level: _sequential(level / COLOR_LEVELS)  # noqa: E731
    cell = grid.step * frame.scale
    xs = grid.x_min + grid.step * np.arange(grid.shape[1])
    ys = grid.y_min + grid.step * np.arange(grid.shape[0])
    for i, row in enumerate(q):
        j = 0
        ncols = row.size
        while j < ncols:
            run = j + 1
            while run < ncols and row[run] == row[j]:
                run += 1
            lines.append(
                f'<rect x="{frame.px(xs[j]):.2f}" y="{frame.py(ys[i]) - cell:.2f}" '
                f'width="{cell * (run - j):.2f}" height="{cell:.2f}" '
                f'fill="{color_of(row[j])}"/>'
            )
            j = run
    lines += _axes(frame)
    lines.append(_rulebook(frame, zone))
    label = f"scale: ±{vmax:.3f}" if diverging else "scale: 0 to 1"
    lines.append(
        f'<text x="{WIDTH - MARGIN}" y="50" text-anchor="end" font-size="11" '
        f'font-family="sans-serif">{_escape(label)}</text>'
    )
    lines.append("</svg>")
    return "\n".join(lines) + "\n"
