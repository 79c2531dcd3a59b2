"""Minimal hand-emitted SVG line/scatter documents.

CSV files are the source of truth for every run; these plots are
byte-deterministic conveniences with no plotting dependency.
"""

from __future__ import annotations

import math

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf")
_W, _H = 640, 420
_MARGIN = 46


def _fmt(x: float) -> str:
    return f"{x:.6g}"


def _scaler(lo: float, hi: float, out_lo: float, out_hi: float):
    if not (math.isfinite(lo) and math.isfinite(hi)) or hi - lo < 1e-300:
        lo, hi = lo - 1.0, hi + 1.0
    span = hi - lo
    return lambda v: out_lo + (v - lo) / span * (out_hi - out_lo), lo, hi


def _frame(title: str, xlo, xhi, ylo, yhi) -> list[str]:
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" viewBox="0 0 {_W} {_H}">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<rect x="{_MARGIN}" y="{_MARGIN}" width="{_W - 2 * _MARGIN}" height="{_H - 2 * _MARGIN}" '
        'fill="none" stroke="#444" stroke-width="1"/>',
        f'<text x="{_W // 2}" y="{_MARGIN - 16}" text-anchor="middle" font-family="monospace" '
        f'font-size="13">{title}</text>',
        f'<text x="{_MARGIN}" y="{_H - _MARGIN + 16}" font-family="monospace" font-size="10">{_fmt(xlo)}</text>',
        f'<text x="{_W - _MARGIN}" y="{_H - _MARGIN + 16}" text-anchor="end" font-family="monospace" '
        f'font-size="10">{_fmt(xhi)}</text>',
        f'<text x="{_MARGIN - 4}" y="{_H - _MARGIN}" text-anchor="end" font-family="monospace" '
        f'font-size="10">{_fmt(ylo)}</text>',
        f'<text x="{_MARGIN - 4}" y="{_MARGIN + 4}" text-anchor="end" font-family="monospace" '
        f'font-size="10">{_fmt(yhi)}</text>',
    ]
    return parts


def line_chart(series, title: str = "") -> str:
    """Polyline chart of ``series`` = [(xs, ys), ...]; returns SVG text."""
    xs_all = [float(x) for xs, _ in series for x in xs]
    ys_all = [float(y) for _, ys in series for y in ys]
    sx, xlo, xhi = _scaler(min(xs_all), max(xs_all), _MARGIN, _W - _MARGIN)
    sy, ylo, yhi = _scaler(min(ys_all), max(ys_all), _H - _MARGIN, _MARGIN)
    parts = _frame(title, xlo, xhi, ylo, yhi)
    for i, (xs, ys) in enumerate(series):
        color = _PALETTE[i % len(_PALETTE)]
        pts = " ".join(f"{_fmt(sx(float(x)))},{_fmt(sy(float(y)))}" for x, y in zip(xs, ys))
        parts.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.2" points="{pts}"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def scatter_chart(points, title: str = "", groups=None) -> str:
    """Scatter of (x, y) pairs; optional integer ``groups`` pick colors."""
    xs = [float(p[0]) for p in points]
    ys = [float(p[1]) for p in points]
    sx, xlo, xhi = _scaler(min(xs), max(xs), _MARGIN, _W - _MARGIN)
    sy, ylo, yhi = _scaler(min(ys), max(ys), _H - _MARGIN, _MARGIN)
    parts = _frame(title, xlo, xhi, ylo, yhi)
    for i, (x, y) in enumerate(zip(xs, ys)):
        g = 0 if groups is None else int(groups[i])
        color = _PALETTE[g % len(_PALETTE)]
        parts.append(f'<circle cx="{_fmt(sx(x))}" cy="{_fmt(sy(y))}" r="2.2" fill="{color}"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
