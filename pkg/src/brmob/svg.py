"""Hand-emitted SVG line charts, no plotting dependency.

Draws regret-versus-data-size curves: one line per algorithm showing the
mean over runs, with a shaded band between the run-wise 2.5th and 97.5th
percentiles.
"""

from __future__ import annotations

from collections import defaultdict
from pathlib import Path
from typing import Sequence
from xml.sax.saxutils import escape

import numpy as np

from .errors import SpecInvalid
from .harness import ResultRow

WIDTH, HEIGHT = 640, 420
MARGIN_LEFT, MARGIN_RIGHT, MARGIN_TOP, MARGIN_BOTTOM = 70, 160, 20, 50

PALETTE = (
    "#1f77b4",
    "#d62728",
    "#2ca02c",
    "#9467bd",
    "#ff7f0e",
    "#8c564b",
    "#17becf",
)


def _series(rows: Sequence[ResultRow]) -> dict[str, list[tuple[int, float, float, float]]]:
    """Per algorithm: sorted (n, mean, low, high) over runs, skipping error cells."""
    grouped: dict[tuple[str, int], list[float]] = defaultdict(list)
    for row in rows:
        if row.regret is not None:
            grouped[(row.algorithm, row.n)].append(row.regret)
    series: dict[str, list[tuple[int, float, float, float]]] = defaultdict(list)
    for (algorithm, n), values in grouped.items():
        arr = np.asarray(values)
        series[algorithm].append(
            (
                n,
                float(arr.mean()),
                float(np.percentile(arr, 2.5)),
                float(np.percentile(arr, 97.5)),
            )
        )
    for algorithm in series:
        series[algorithm].sort()
    return dict(sorted(series.items()))


def _ticks(low: float, high: float, count: int = 5) -> list[float]:
    if high <= low:
        high = low + 1.0
    return list(np.linspace(low, high, count))


def emit_figure(rows: Sequence[ResultRow], path: str | Path) -> None:
    """Render rows to a standalone SVG file."""
    series = _series(rows)
    if not series:
        raise SpecInvalid("no evaluated rows to plot")

    xs = sorted({point[0] for points in series.values() for point in points})
    x_low, x_high = float(min(xs)), float(max(xs))
    if x_high == x_low:
        x_high = x_low + 1.0
    y_low = 0.0
    y_high = max(point[3] for points in series.values() for point in points)
    if y_high <= y_low:
        y_high = y_low + 1.0
    y_high *= 1.05

    plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT
    plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM

    def sx(value: float) -> float:
        return MARGIN_LEFT + (value - x_low) / (x_high - x_low) * plot_w

    def sy(value: float) -> float:
        return MARGIN_TOP + plot_h - (value - y_low) / (y_high - y_low) * plot_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<line x1="{MARGIN_LEFT}" y1="{MARGIN_TOP + plot_h}" x2="{MARGIN_LEFT + plot_w}" '
        f'y2="{MARGIN_TOP + plot_h}" stroke="black"/>',
        f'<line x1="{MARGIN_LEFT}" y1="{MARGIN_TOP}" x2="{MARGIN_LEFT}" '
        f'y2="{MARGIN_TOP + plot_h}" stroke="black"/>',
    ]
    for tick in _ticks(x_low, x_high):
        x = sx(tick)
        parts.append(
            f'<line x1="{x:.2f}" y1="{MARGIN_TOP + plot_h}" x2="{x:.2f}" '
            f'y2="{MARGIN_TOP + plot_h + 5}" stroke="black"/>'
        )
        parts.append(
            f'<text x="{x:.2f}" y="{MARGIN_TOP + plot_h + 20}" font-size="11" '
            f'text-anchor="middle">{tick:g}</text>'
        )
    for tick in _ticks(y_low, y_high):
        y = sy(tick)
        parts.append(
            f'<line x1="{MARGIN_LEFT - 5}" y1="{y:.2f}" x2="{MARGIN_LEFT}" '
            f'y2="{y:.2f}" stroke="black"/>'
        )
        parts.append(
            f'<text x="{MARGIN_LEFT - 8}" y="{y + 4:.2f}" font-size="11" '
            f'text-anchor="end">{tick:.3g}</text>'
        )
    parts.append(
        f'<text x="{MARGIN_LEFT + plot_w / 2:.2f}" y="{HEIGHT - 10}" font-size="13" '
        f'text-anchor="middle">n</text>'
    )
    parts.append(
        f'<text x="18" y="{MARGIN_TOP + plot_h / 2:.2f}" font-size="13" '
        f'text-anchor="middle" transform="rotate(-90 18 {MARGIN_TOP + plot_h / 2:.2f})">regret</text>'
    )

    for idx, (algorithm, points) in enumerate(series.items()):
        color = PALETTE[idx % len(PALETTE)]
        upper = [(sx(n), sy(high)) for n, _, _, high in points]
        lower = [(sx(n), sy(low)) for n, _, low, _ in reversed(points)]
        band = " ".join(f"{x:.2f},{y:.2f}" for x, y in upper + lower)
        parts.append(f'<polygon points="{band}" fill="{color}" fill-opacity="0.15"/>')
        line = " ".join(f"{sx(n):.2f},{sy(mean):.2f}" for n, mean, _, _ in points)
        parts.append(
            f'<polyline points="{line}" fill="none" stroke="{color}" stroke-width="1.8"/>'
        )
        legend_y = MARGIN_TOP + 14 + idx * 18
        parts.append(
            f'<line x1="{WIDTH - MARGIN_RIGHT + 12}" y1="{legend_y}" '
            f'x2="{WIDTH - MARGIN_RIGHT + 34}" y2="{legend_y}" '
            f'stroke="{color}" stroke-width="1.8"/>'
        )
        parts.append(
            f'<text x="{WIDTH - MARGIN_RIGHT + 40}" y="{legend_y + 4}" '
            f'font-size="12">{escape(algorithm)}</text>'
        )

    parts.append("</svg>")
    Path(path).write_text("\n".join(parts) + "\n")
