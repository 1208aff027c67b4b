"""Minimal static SVG line charts for the CLI's plot-data files."""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _range(values) -> tuple:
    v = np.asarray(values, dtype=float)
    v = v[np.isfinite(v)]
    if v.size == 0:
        return 0.0, 1.0
    lo, hi = float(v.min()), float(v.max())
    if hi == lo:
        pad = abs(lo) * 0.05 or 1.0
        return lo - pad, hi + pad
    pad = 0.04 * (hi - lo)
    return lo - pad, hi + pad


def line_chart(
    series: Sequence[tuple],
    *,
    title: str = "",
    xlabel: str = "",
    ylabel: str = "",
    width: int = 640,
    height: int = 420,
    markers: bool = False,
    ylim=None,
) -> str:
    """Render ``[(label, x, y), ...]`` as an SVG document string.

    A fourth tuple element ``"markers"`` draws that series as points.

    Non-finite points break a line into segments. Output depends only on the
    data, so repeated renders are byte-identical.
    """
    left, right, top, bottom = 64, 16, 32, 48
    pw, ph = width - left - right, height - top - bottom
    xs = np.concatenate([np.asarray(s[1], dtype=float) for s in series]) if series else np.array([0.0])
    ys = np.concatenate([np.asarray(s[2], dtype=float) for s in series]) if series else np.array([0.0])
    x0, x1 = _range(xs)
    y0, y1 = ylim if ylim is not None else _range(ys)

    def px(x):
        return left + (x - x0) / (x1 - x0) * pw

    def py(y):
        return top + (1 - (y - y0) / (y1 - y0)) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
        f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="#444"/>',
    ]
    if title:
        out.append(f'<text x="{width / 2:.1f}" y="20" text-anchor="middle" font-size="13">{_esc(title)}</text>')
    for t in _ticks(x0, x1):
        out.append(f'<line x1="{_fmt(px(t))}" y1="{top + ph}" x2="{_fmt(px(t))}" y2="{top + ph + 4}" stroke="#444"/>')
        out.append(f'<text x="{_fmt(px(t))}" y="{top + ph + 16}" text-anchor="middle">{t:.6g}</text>')
    for t in _ticks(y0, y1):
        out.append(f'<line x1="{left - 4}" y1="{_fmt(py(t))}" x2="{left}" y2="{_fmt(py(t))}" stroke="#444"/>')
        out.append(f'<text x="{left - 6}" y="{_fmt(py(t) + 4)}" text-anchor="end">{t:.6g}</text>')
    if xlabel:
        out.append(f'<text x="{left + pw / 2:.1f}" y="{height - 8}" text-anchor="middle">{_esc(xlabel)}</text>')
    if ylabel:
        out.append(
            f'<text x="14" y="{top + ph / 2:.1f}" text-anchor="middle" '
            f'transform="rotate(-90 14 {top + ph / 2:.1f})">{_esc(ylabel)}</text>'
        )
    out.append(f'<clipPath id="plot"><rect x="{left}" y="{top}" width="{pw}" height="{ph}"/></clipPath>')
    for i, (label, x, y, *style) in enumerate(series):
        dots = markers or "markers" in style
        color = _COLORS[i % len(_COLORS)]
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        good = np.isfinite(x) & np.isfinite(y)
        if dots:
            for a, b in zip(x[good], y[good]):
                out.append(f'<circle cx="{_fmt(px(a))}" cy="{_fmt(py(b))}" r="2.5" fill="{color}" clip-path="url(#plot)"/>')
        else:
            seg = []
            for a, b, g in zip(x, y, good):
                if g:
                    seg.append(f"{_fmt(px(a))},{_fmt(py(b))}")
                elif seg:
                    out.append(_polyline(seg, color))
                    seg = []
            if seg:
                out.append(_polyline(seg, color))
        if label:
            ly = top + 14 + 14 * i
            out.append(f'<rect x="{left + pw - 120}" y="{ly - 8}" width="10" height="3" fill="{color}"/>')
            out.append(f'<text x="{left + pw - 105}" y="{ly}">{_esc(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _polyline(points, color) -> str:
    return f'<polyline fill="none" stroke="{color}" stroke-width="1.2" clip-path="url(#plot)" points="{" ".join(points)}"/>'


def _ticks(lo: float, hi: float, n: int = 5) -> list:
    span = hi - lo
    raw = span / n
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=10 * mag)
    start = math.ceil(lo / step) * step
    out = []
    t = start
    while t <= hi + 1e-12 * span:
        out.append(round(t / step) * step)
        t += step
    return out


def _esc(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
