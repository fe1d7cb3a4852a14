"""Deterministic SVG box plots from five-number summaries.

The emitter writes every coordinate with fixed two-decimal formatting and
visits inputs in argument order, so identical inputs give byte-identical
SVG. One ``<g class="box">`` group is emitted per corpus: whisker stem,
whisker caps at min and max, the interquartile rectangle, the median line,
and a label under the x axis. A degenerate summary (all five numbers equal)
collapses to coincident lines, which is the intended rendering.
"""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

MARGIN_LEFT = 60.0
MARGIN_RIGHT = 20.0
MARGIN_TOP = 20.0
MARGIN_BOTTOM = 40.0
SLOT_WIDTH = 100.0
BOX_WIDTH = 48.0
PLOT_HEIGHT = 320.0
TICK_TARGET = 5  # aimed-for tick count; actual count depends on the nice step


def _fmt(value: float) -> str:
    text = f"{value:.2f}"
    return "0.00" if text == "-0.00" else text


def nice_ticks(lo: float, hi: float, target: int = TICK_TARGET) -> list[float]:
    """Tick positions at a step of 1, 2, or 5 times a power of ten."""
    if not lo < hi:
        raise ValueError(f"need lo < hi, got [{lo}, {hi}]")
    raw = (hi - lo) / target
    magnitude = 10.0 ** math.floor(math.log10(raw))
    step = next(m * magnitude for m in (1.0, 2.0, 5.0, 10.0) if raw <= m * magnitude)
    first = math.ceil(lo / step)
    ticks = []
    k = first
    while k * step <= hi + step * 1e-9:
        ticks.append(k * step)
        k += 1
    return ticks


def render_box_plot(summaries, metric: str) -> str:
    """SVG document with one box per (label, five-number summary) pair.

    Each summary is (min, q1, median, q3, max) as box_stats returns. The y
    axis spans the pooled value range with 5% padding (plus and minus one
    when every value coincides).
    """
    summaries = [(str(label), tuple(float(v) for v in stats)) for label, stats in summaries]
    if not summaries:
        raise ValueError("nothing to plot")
    for label, stats in summaries:
        if (
            len(stats) != 5
            or not all(math.isfinite(v) for v in stats)
            or any(a > b for a, b in zip(stats, stats[1:]))
        ):
            raise ValueError(f"summary for {label!r} is not an ordered five-number summary")

    lo = min(stats[0] for _, stats in summaries)
    hi = max(stats[4] for _, stats in summaries)
    if lo == hi:
        lo, hi = lo - 1.0, hi + 1.0
    else:
        pad = 0.05 * (hi - lo)
        lo, hi = lo - pad, hi + pad

    width = MARGIN_LEFT + SLOT_WIDTH * len(summaries) + MARGIN_RIGHT
    height = MARGIN_TOP + PLOT_HEIGHT + MARGIN_BOTTOM
    axis_bottom = MARGIN_TOP + PLOT_HEIGHT

    def y(value: float) -> float:
        return MARGIN_TOP + PLOT_HEIGHT * (hi - value) / (hi - lo)

    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_fmt(width)}" height="{_fmt(height)}" '
        f'viewBox="0 0 {_fmt(width)} {_fmt(height)}">',
        f'<text x="{_fmt(width / 2)}" y="14.00" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12">{escape(metric)}</text>',
        '<g class="axis" stroke="black" fill="none">',
        f'<line x1="{_fmt(MARGIN_LEFT)}" y1="{_fmt(MARGIN_TOP)}" '
        f'x2="{_fmt(MARGIN_LEFT)}" y2="{_fmt(axis_bottom)}"/>',
    ]
    for tick in nice_ticks(lo, hi):
        ty = y(tick)
        parts.append(
            f'<line x1="{_fmt(MARGIN_LEFT - 6)}" y1="{_fmt(ty)}" '
            f'x2="{_fmt(MARGIN_LEFT)}" y2="{_fmt(ty)}"/>'
        )
        parts.append(
            f'<text x="{_fmt(MARGIN_LEFT - 9)}" y="{_fmt(ty + 3)}" text-anchor="end" '
            f'font-family="sans-serif" font-size="10" stroke="none" fill="black">{_fmt(tick)}</text>'
        )
    parts.append("</g>")

    for i, (label, (v_min, q1, med, q3, v_max)) in enumerate(summaries):
        cx = MARGIN_LEFT + SLOT_WIDTH * i + SLOT_WIDTH / 2
        x0, x1 = cx - BOX_WIDTH / 2, cx + BOX_WIDTH / 2
        cap0, cap1 = cx - BOX_WIDTH / 4, cx + BOX_WIDTH / 4
        parts.append('<g class="box" stroke="black" fill="none">')
        parts.append(f'<line x1="{_fmt(cx)}" y1="{_fmt(y(v_min))}" x2="{_fmt(cx)}" y2="{_fmt(y(q1))}"/>')
        parts.append(f'<line x1="{_fmt(cx)}" y1="{_fmt(y(q3))}" x2="{_fmt(cx)}" y2="{_fmt(y(v_max))}"/>')
        parts.append(f'<line x1="{_fmt(cap0)}" y1="{_fmt(y(v_min))}" x2="{_fmt(cap1)}" y2="{_fmt(y(v_min))}"/>')
        parts.append(f'<line x1="{_fmt(cap0)}" y1="{_fmt(y(v_max))}" x2="{_fmt(cap1)}" y2="{_fmt(y(v_max))}"/>')
        parts.append(
            f'<rect x="{_fmt(x0)}" y="{_fmt(y(q3))}" width="{_fmt(BOX_WIDTH)}" '
            f'height="{_fmt(y(q1) - y(q3))}"/>'
        )
        parts.append(f'<line x1="{_fmt(x0)}" y1="{_fmt(y(med))}" x2="{_fmt(x1)}" y2="{_fmt(y(med))}"/>')
        parts.append(
            f'<text x="{_fmt(cx)}" y="{_fmt(axis_bottom + 16)}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="11" stroke="none" fill="black">{escape(label)}</text>'
        )
        parts.append("</g>")

    parts.append("</svg>")
    return "\n".join(parts) + "\n"
