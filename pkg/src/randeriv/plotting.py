"""Dependency-free SVG scatter plots of point clouds in the complex plane."""
from __future__ import annotations

from pathlib import Path

import numpy as np

SIZE = 800
MARGIN = 40

STYLES = (
    {"glyph": "circle", "color": "#1f77b4"},
    {"glyph": "cross", "color": "#d62728"},
    {"glyph": "dot", "color": "#2ca02c"},
)


def _glyph(kind, x, y, color, r=4.0):
    if kind == "circle":
        return f'<circle cx="{x:.2f}" cy="{y:.2f}" r="{r}" fill="none" stroke="{color}" stroke-width="1.2"/>'
    if kind == "cross":
        return (f'<path d="M{x - r:.2f},{y - r:.2f}L{x + r:.2f},{y + r:.2f}'
                f'M{x - r:.2f},{y + r:.2f}L{x + r:.2f},{y - r:.2f}" stroke="{color}" stroke-width="1.2"/>')
    return f'<circle cx="{x:.2f}" cy="{y:.2f}" r="{r * 0.6}" fill="{color}"/>'


def scatter_svg(layers, title="", path=None) -> str:
    """Overlay point layers; ``layers`` is a list of (label, complex array).

    A dashed unit circle is drawn when every point has modulus <= 2.
    """
    allpts = np.concatenate([np.asarray(p, dtype=complex).ravel() for _, p in layers])
    extent = float(np.abs(np.concatenate([allpts.real, allpts.imag])).max(initial=1.0))
    draw_circle = bool(np.all(np.abs(allpts) <= 2.0))
    if draw_circle:
        extent = max(extent, 1.0)
    extent *= 1.08
    scale = (SIZE - 2 * MARGIN) / (2 * extent)

    def to_px(z):
        return MARGIN + (z.real + extent) * scale, SIZE - MARGIN - (z.imag + extent) * scale

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" '
        f'viewBox="0 0 {SIZE} {SIZE}">',
        f'<rect width="{SIZE}" height="{SIZE}" fill="white"/>',
    ]
    cx, cy = to_px(0j)
    out.append(f'<line x1="{MARGIN}" y1="{cy:.2f}" x2="{SIZE - MARGIN}" y2="{cy:.2f}" stroke="#bbb"/>')
    out.append(f'<line x1="{cx:.2f}" y1="{MARGIN}" x2="{cx:.2f}" y2="{SIZE - MARGIN}" stroke="#bbb"/>')
    if draw_circle:
        out.append(f'<circle cx="{cx:.2f}" cy="{cy:.2f}" r="{scale:.2f}" fill="none" '
                   f'stroke="#888" stroke-dasharray="6,4"/>')
    for i, (label, pts) in enumerate(layers):
        style = STYLES[i % len(STYLES)]
        for z in np.asarray(pts, dtype=complex).ravel():
            x, y = to_px(z)
            out.append(_glyph(style["glyph"], x, y, style["color"]))
        lx, ly = SIZE - 220, 28 + 20 * i
        out.append(_glyph(style["glyph"], lx, ly - 4, style["color"]))
        out.append(f'<text x="{lx + 12}" y="{ly}" font-family="sans-serif" font-size="14">'
                   f'{_escape(label)}</text>')
    if title:
        out.append(f'<text x="{MARGIN}" y="28" font-family="sans-serif" font-size="16">'
                   f'{_escape(title)}</text>')
    out.append("</svg>")
    svg = "\n".join(out) + "\n"
    if path is not None:
        Path(path).write_text(svg)
    return svg


def _escape(s):
    return str(s).replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
