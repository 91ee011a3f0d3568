"""Minimal self-contained SVG line charts."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from xml.sax.saxutils import escape

import numpy as np

COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


@dataclass
class Line:
    label: str
    x: np.ndarray
    y: np.ndarray
    dashed: bool = False


@dataclass
class Panel:
    title: str
    xlabel: str
    ylabel: str
    lines: list[Line] = field(default_factory=list)
    logy: bool = False


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / n
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=raw)
    start = math.ceil(lo / step) * step
    return [start + k * step for k in range(int((hi - start) / step + 1e-9) + 1)]


def _fmt(v: float) -> str:
    return f"{v:.4g}"


def _panel(p: Panel, x0: float, y0: float, w: float, h: float) -> list[str]:
    out = []
    xs, ys = [], []
    for ln in p.lines:
        y = np.asarray(ln.y, dtype=float)
        x = np.asarray(ln.x, dtype=float)
        ok = np.isfinite(x) & np.isfinite(y)
        if p.logy:
            ok &= y > 0
        xs.append(x[ok])
        ys.append(np.log10(y[ok]) if p.logy else y[ok])
    allx = np.concatenate(xs) if xs else np.array([0.0, 1.0])
    ally = np.concatenate(ys) if ys else np.array([0.0, 1.0])
    if allx.size == 0:
        allx, ally = np.array([0.0, 1.0]), np.array([0.0, 1.0])
    xlo, xhi = float(allx.min()), float(allx.max())
    ylo, yhi = float(ally.min()), float(ally.max())
    if xhi == xlo:
        xhi = xlo + 1.0
    if yhi == ylo:
        ylo, yhi = ylo - 0.5, yhi + 0.5
    pad = 0.05 * (yhi - ylo)
    ylo, yhi = ylo - pad, yhi + pad
    left, bottom = x0 + 60, y0 + h - 40
    pw, ph = w - 80, h - 70

    def sx(v):
        return left + (v - xlo) / (xhi - xlo) * pw

    def sy(v):
        return bottom - (v - ylo) / (yhi - ylo) * ph

    out.append(f'<text x="{x0 + w / 2:.1f}" y="{y0 + 18:.1f}" text-anchor="middle" font-size="14">{escape(p.title)}</text>')
    out.append(f'<rect x="{left:.1f}" y="{bottom - ph:.1f}" width="{pw:.1f}" height="{ph:.1f}" fill="none" stroke="#444"/>')
    for tx in _ticks(xlo, xhi):
        out.append(f'<line x1="{sx(tx):.1f}" y1="{bottom:.1f}" x2="{sx(tx):.1f}" y2="{bottom + 4:.1f}" stroke="#444"/>')
        out.append(f'<text x="{sx(tx):.1f}" y="{bottom + 16:.1f}" text-anchor="middle" font-size="10">{_fmt(tx)}</text>')
    for ty in _ticks(ylo, yhi):
        label = _fmt(10**ty) if p.logy else _fmt(ty)
        out.append(f'<line x1="{left - 4:.1f}" y1="{sy(ty):.1f}" x2="{left:.1f}" y2="{sy(ty):.1f}" stroke="#444"/>')
        out.append(f'<text x="{left - 6:.1f}" y="{sy(ty) + 3:.1f}" text-anchor="end" font-size="10">{label}</text>')
    out.append(f'<text x="{left + pw / 2:.1f}" y="{bottom + 32:.1f}" text-anchor="middle" font-size="11">{escape(p.xlabel)}</text>')
    ylab = p.ylabel + (" (log)" if p.logy else "")
    out.append(
        f'<text x="{x0 + 14:.1f}" y="{bottom - ph / 2:.1f}" text-anchor="middle" font-size="11" '
        f'transform="rotate(-90 {x0 + 14:.1f} {bottom - ph / 2:.1f})">{escape(ylab)}</text>'
    )
    for k, (ln, x, y) in enumerate(zip(p.lines, xs, ys)):
        color = COLORS[k % len(COLORS)]
        if x.size:
            pts = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in zip(x, y))
            dash = ' stroke-dasharray="5,3"' if ln.dashed else ""
            out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"{dash}/>')
        ly = bottom - ph + 14 + 14 * k
        out.append(f'<line x1="{left + 8:.1f}" y1="{ly - 4:.1f}" x2="{left + 26:.1f}" y2="{ly - 4:.1f}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{left + 30:.1f}" y="{ly:.1f}" font-size="10">{escape(ln.label)}</text>')
    return out


def render(panels: list[Panel], width: int = 640, panel_height: int = 300) -> str:
    height = panel_height * len(panels)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
    ]
    for i, p in enumerate(panels):
        parts.extend(_panel(p, 0.0, float(i * panel_height), float(width), float(panel_height)))
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
