"""Self-contained deterministic SVG line and scatter plots.

No plotting stack: plots are assembled as text with fixed viewport and fixed
coordinate formatting, so the same input always yields byte-identical output
and test code can read coordinates straight out of the file.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConfigError

WIDTH, HEIGHT = 800, 500
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 70, 20, 40, 50

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


@dataclass(frozen=True)
class Series:
    label: str
    x: list
    y: list


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _nice_ticks(lo: float, hi: float, target: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    span = hi - lo
    step = 10.0 ** math.floor(math.log10(span / target))
    for mult in (1.0, 2.0, 2.5, 5.0, 10.0):
        if span / (step * mult) <= target:
            step *= mult
            break
    first = math.ceil(lo / step) * step
    ticks = []
    v = first
    while v <= hi + 1e-12 * span:
        ticks.append(0.0 if abs(v) < step * 1e-9 else v)
        v += step
    return ticks


def _axes(x_lo, x_hi, y_lo, y_hi, title, xlabel, ylabel) -> tuple[list[str], callable, callable]:
    if x_hi == x_lo:
        x_lo, x_hi = x_lo - 0.5, x_hi + 0.5
    if y_hi == y_lo:
        y_lo, y_hi = y_lo - 0.5, y_hi + 0.5
    px_w = WIDTH - MARGIN_L - MARGIN_R
    px_h = HEIGHT - MARGIN_T - MARGIN_B

    def sx(x):
        return MARGIN_L + (x - x_lo) / (x_hi - x_lo) * px_w

    def sy(y):
        return HEIGHT - MARGIN_B - (y - y_lo) / (y_hi - y_lo) * px_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH // 2}" y="24" text-anchor="middle" font-size="16" '
        f'font-family="sans-serif">{title}</text>',
        f'<line x1="{MARGIN_L}" y1="{HEIGHT - MARGIN_B}" x2="{WIDTH - MARGIN_R}" '
        f'y2="{HEIGHT - MARGIN_B}" stroke="black"/>',
        f'<line x1="{MARGIN_L}" y1="{MARGIN_T}" x2="{MARGIN_L}" '
        f'y2="{HEIGHT - MARGIN_B}" stroke="black"/>',
        f'<text x="{WIDTH // 2}" y="{HEIGHT - 12}" text-anchor="middle" font-size="13" '
        f'font-family="sans-serif">{xlabel}</text>',
        f'<text x="18" y="{HEIGHT // 2}" text-anchor="middle" font-size="13" '
        f'font-family="sans-serif" transform="rotate(-90 18 {HEIGHT // 2})">{ylabel}</text>',
    ]
    for tx in _nice_ticks(x_lo, x_hi):
        parts.append(
            f'<line x1="{_fmt(sx(tx))}" y1="{HEIGHT - MARGIN_B}" x2="{_fmt(sx(tx))}" '
            f'y2="{HEIGHT - MARGIN_B + 5}" stroke="black"/>'
        )
        parts.append(
            f'<text x="{_fmt(sx(tx))}" y="{HEIGHT - MARGIN_B + 18}" text-anchor="middle" '
            f'font-size="11" font-family="sans-serif">{tx:g}</text>'
        )
    for ty in _nice_ticks(y_lo, y_hi):
        parts.append(
            f'<line x1="{MARGIN_L - 5}" y1="{_fmt(sy(ty))}" x2="{MARGIN_L}" '
            f'y2="{_fmt(sy(ty))}" stroke="black"/>'
        )
        parts.append(
            f'<text x="{MARGIN_L - 8}" y="{_fmt(sy(ty))}" text-anchor="end" '
            f'font-size="11" font-family="sans-serif">{ty:g}</text>'
        )
    return parts, sx, sy


def _legend(parts: list[str], labels: list[str]) -> None:
    for k, label in enumerate(labels):
        color = PALETTE[k % len(PALETTE)]
        y = MARGIN_T + 14 + 16 * k
        parts.append(
            f'<rect x="{WIDTH - MARGIN_R - 150}" y="{y - 9}" width="10" height="10" '
            f'fill="{color}"/>'
        )
        parts.append(
            f'<text x="{WIDTH - MARGIN_R - 135}" y="{y}" font-size="11" '
            f'font-family="sans-serif">{label}</text>'
        )


def _bounds(series: list[Series]) -> tuple[float, float, float, float]:
    xs = [float(x) for s in series for x in s.x]
    ys = [float(y) for s in series for y in s.y]
    if not xs:
        raise ConfigError("plot: no points")
    return min(xs), max(xs), min(ys), max(ys)


def line_plot(series: list[Series], title: str, xlabel: str, ylabel: str) -> str:
    """Polyline plot; each series may contain gaps encoded as None."""
    cleaned = [
        Series(s.label, *zip(*[(x, y) for x, y in zip(s.x, s.y) if y is not None]))
        if any(y is not None for y in s.y) else Series(s.label, (), ())
        for s in series
    ]
    cleaned = [s for s in cleaned if len(s.x)]
    if not cleaned:
        raise ConfigError("line_plot: all series empty")
    x_lo, x_hi, y_lo, y_hi = _bounds(cleaned)
    parts, sx, sy = _axes(x_lo, x_hi, y_lo, y_hi, title, xlabel, ylabel)
    for k, s in enumerate(cleaned):
        color = PALETTE[k % len(PALETTE)]
        pts = " ".join(f"{_fmt(sx(float(x)))},{_fmt(sy(float(y)))}"
                       for x, y in zip(s.x, s.y))
        parts.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>'
        )
    if len(cleaned) > 1:
        _legend(parts, [s.label for s in cleaned])
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def scatter_plot(series: list[Series], title: str, xlabel: str, ylabel: str,
                 fit_lines: dict[str, tuple[float, float]] | None = None) -> str:
    """Point cloud per series with optional per-series fitted lines
    (label -> (slope, intercept))."""
    series = [s for s in series if len(s.x)]
    if not series:
        raise ConfigError("scatter_plot: all series empty")
    x_lo, x_hi, y_lo, y_hi = _bounds(series)
    parts, sx, sy = _axes(x_lo, x_hi, y_lo, y_hi, title, xlabel, ylabel)
    for k, s in enumerate(series):
        color = PALETTE[k % len(PALETTE)]
        for x, y in zip(s.x, s.y):
            parts.append(
                f'<circle cx="{_fmt(sx(float(x)))}" cy="{_fmt(sy(float(y)))}" r="2" '
                f'fill="{color}" fill-opacity="0.5"/>'
            )
        if fit_lines and s.label in fit_lines:
            slope, intercept = fit_lines[s.label]
            y0, y1 = slope * x_lo + intercept, slope * x_hi + intercept
            parts.append(
                f'<line x1="{_fmt(sx(x_lo))}" y1="{_fmt(sy(y0))}" x2="{_fmt(sx(x_hi))}" '
                f'y2="{_fmt(sy(y1))}" stroke="{color}" stroke-width="1.5" '
                f'stroke-dasharray="6 3"/>'
            )
    if len(series) > 1:
        _legend(parts, [s.label for s in series])
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
