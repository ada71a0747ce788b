"""Dependency-free SVG emitters for persistence diagrams and barcodes."""

from __future__ import annotations

import numpy as np

from .homology import PersistenceDiagram

_COLORS = {0: "#1f77b4", 1: "#ff7f0e", 2: "#2ca02c"}
_SIZE = 420
_MARGIN = 50
_SCHEMA = "<!-- schema=eegtda/svg/v1 -->"


def _scale(v, vmax):
    return _MARGIN + (v / vmax) * (_SIZE - 2 * _MARGIN)


def persistence_diagram_svg(pd: PersistenceDiagram, title: str = "") -> str:
    """Birth-death scatter with diagonal and an infinity line near the top."""
    finite_max = pd.threshold if pd.threshold > 0 else 1.0
    inf_y = finite_max * 1.08
    vmax = finite_max * 1.15

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_SIZE}" height="{_SIZE}">',
        _SCHEMA,
        f'<rect width="{_SIZE}" height="{_SIZE}" fill="white"/>',
    ]
    x0, x1 = _scale(0, vmax), _scale(finite_max, vmax)
    y = lambda v: _SIZE - _scale(v, vmax)
    parts.append(f'<line x1="{x0:.1f}" y1="{y(0):.1f}" x2="{x1:.1f}" '
                 f'y2="{y(finite_max):.1f}" stroke="#888" stroke-dasharray="4 3"/>')
    parts.append(f'<line x1="{x0:.1f}" y1="{y(inf_y):.1f}" x2="{x1:.1f}" '
                 f'y2="{y(inf_y):.1f}" stroke="#444" stroke-dasharray="2 3"/>')
    parts.append(f'<text x="{x0 - 35:.1f}" y="{y(inf_y) + 4:.1f}" '
                 f'font-size="14">inf</text>')
    for dim in range(pd.max_dim + 1):
        b, d = pd.pairs(dim, include_zero=False)
        color = _COLORS.get(dim, "#000")
        for bi, di in zip(b, d):
            dv = inf_y if np.isinf(di) else di
            parts.append(f'<circle cx="{_scale(bi, vmax):.2f}" '
                         f'cy="{y(dv):.2f}" r="3.5" fill="{color}" '
                         f'fill-opacity="0.75"/>')
    if title:
        parts.append(f'<text x="{_MARGIN}" y="20" font-size="13">{title}</text>')
    for dim in range(pd.max_dim + 1):
        parts.append(f'<circle cx="{_SIZE - 90}" cy="{18 + 16 * dim}" r="4" '
                     f'fill="{_COLORS.get(dim, "#000")}"/>')
        parts.append(f'<text x="{_SIZE - 80}" y="{22 + 16 * dim}" '
                     f'font-size="12">H{dim}</text>')
    parts.append("</svg>")
    return "\n".join(parts)


def barcode_svg(pd: PersistenceDiagram, title: str = "") -> str:
    """Horizontal bars per dimension; infinite bars run to the right edge."""
    finite_max = pd.threshold if pd.threshold > 0 else 1.0
    bars = []
    for dim in range(pd.max_dim + 1):
        b, d = pd.pairs(dim, include_zero=False)
        for bi, di in zip(b, d):
            bars.append((dim, bi, di))
    height = max(120, 30 + 8 * len(bars))
    width = _SIZE

    def x(v):
        return _MARGIN + (v / (finite_max * 1.05)) * (width - 2 * _MARGIN)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        _SCHEMA,
        f'<rect width="{width}" height="{height}" fill="white"/>',
    ]
    if title:
        parts.append(f'<text x="{_MARGIN}" y="16" font-size="13">{title}</text>')
    for row, (dim, bi, di) in enumerate(bars):
        yy = 26 + 8 * row
        end = width - _MARGIN if np.isinf(di) else x(di)
        parts.append(f'<line x1="{x(bi):.2f}" y1="{yy}" x2="{end:.2f}" '
                     f'y2="{yy}" stroke="{_COLORS.get(dim, "#000")}" '
                     f'stroke-width="3"/>')
        if np.isinf(di):
            parts.append(f'<text x="{width - _MARGIN + 3}" y="{yy + 4}" '
                         f'font-size="10">inf</text>')
    parts.append("</svg>")
    return "\n".join(parts)
