"""Dependency-free SVG rendering for the comparison artifacts: a radar
chart of per-method metrics and a grid of confusion matrices.

Radar axes are Accuracy, Precision, F1-Score and G-Mean on linear [0, 1]
scales; recall is omitted because weighted recall always equals accuracy.
"""

from __future__ import annotations

import math

RADAR_AXES = (("accuracy", "Accuracy"), ("precision", "Precision"),
              ("f1", "F1-Score"), ("g_mean", "G-Mean"))

PALETTE = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
           "#9467bd", "#8c564b", "#e377c2", "#7f7f7f")


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _radar_point(cx: float, cy: float, radius: float, axis: int, value: float) -> tuple[float, float]:
    # axis 0 points up, then clockwise
    angle = math.pi / 2 - axis * (2 * math.pi / len(RADAR_AXES))
    return cx + radius * value * math.cos(angle), cy - radius * value * math.sin(angle)


def radar_svg(entries: list[dict]) -> str:
    """Radar chart; ``entries`` are dicts with a ``method`` name and one
    value per RADAR_AXES key, all in [0, 1]."""
    size, cx, cy, radius = 560, 250, 250, 180
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="500" viewBox="0 0 {size} 500">',
        '<rect width="100%" height="100%" fill="white"/>',
    ]
    for ring in (0.25, 0.5, 0.75, 1.0):
        pts = " ".join(
            f"{_fmt(x)},{_fmt(y)}"
            for x, y in (_radar_point(cx, cy, radius, a, ring) for a in range(len(RADAR_AXES)))
        )
        out.append(f'<polygon points="{pts}" fill="none" stroke="#cccccc" stroke-width="1"/>')
        x, y = _radar_point(cx, cy, radius, 0, ring)
        out.append(f'<text x="{_fmt(x + 4)}" y="{_fmt(y)}" font-size="10" fill="#888888">{ring:g}</text>')
    for a, (_, label) in enumerate(RADAR_AXES):
        x, y = _radar_point(cx, cy, radius, a, 1.0)
        out.append(f'<line x1="{cx}" y1="{cy}" x2="{_fmt(x)}" y2="{_fmt(y)}" stroke="#999999" stroke-width="1"/>')
        lx, ly = _radar_point(cx, cy, radius * 1.12, a, 1.0)
        out.append(
            f'<text x="{_fmt(lx)}" y="{_fmt(ly)}" font-size="13" text-anchor="middle">{label}</text>'
        )
    for i, entry in enumerate(entries):
        color = PALETTE[i % len(PALETTE)]
        pts = " ".join(
            f"{_fmt(x)},{_fmt(y)}"
            for x, y in (
                _radar_point(cx, cy, radius, a, float(entry[key]))
                for a, (key, _) in enumerate(RADAR_AXES)
            )
        )
        out.append(
            f'<polygon class="method" points="{pts}" fill="{color}" fill-opacity="0.08" '
            f'stroke="{color}" stroke-width="2"/>'
        )
    # legend (weighted recall equals accuracy, so it has no axis of its own)
    lx, ly = 440, 40
    for i, entry in enumerate(entries):
        color = PALETTE[i % len(PALETTE)]
        y = ly + 18 * i
        out.append(f'<rect x="{lx}" y="{y - 9}" width="12" height="12" fill="{color}"/>')
        out.append(f'<text class="legend" x="{lx + 18}" y="{y + 1}" font-size="12">{entry["method"]}</text>')
    out.append(
        f'<text x="{lx}" y="{ly + 18 * len(entries) + 14}" font-size="9" fill="#666666">'
        "(recall = accuracy under weighted averaging)</text>"
    )
    out.append("</svg>")
    return "\n".join(out)


def confusion_grid_svg(items: list[tuple[str, list[list[int]]]], columns: int = 4) -> str:
    """Grid of 2x2 confusion matrices, one cell block per (method, matrix)."""
    cell, pad, title_h = 56, 26, 22
    block_w = 2 * cell + pad
    block_h = 2 * cell + pad + title_h
    rows = math.ceil(len(items) / columns)
    width = columns * block_w + pad
    height = rows * block_h + pad
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        '<rect width="100%" height="100%" fill="white"/>',
    ]
    for i, (method, cm) in enumerate(items):
        ox = pad + (i % columns) * block_w
        oy = pad + (i // columns) * block_h
        out.append(
            f'<text x="{ox + cell}" y="{oy + 12}" font-size="13" text-anchor="middle" '
            f'font-weight="bold">{method}</text>'
        )
        total = max(sum(sum(r) for r in cm), 1)
        for t in (0, 1):
            for p in (0, 1):
                x, y = ox + p * cell, oy + title_h + t * cell
                shade = 255 - int(180 * cm[t][p] / total)
                fill = f"rgb({shade},{shade},255)"
                out.append(
                    f'<rect x="{x}" y="{y}" width="{cell}" height="{cell}" fill="{fill}" '
                    'stroke="#333333"/>'
                )
                out.append(
                    f'<text x="{x + cell // 2}" y="{y + cell // 2 + 5}" font-size="13" '
                    f'text-anchor="middle">{cm[t][p]}</text>'
                )
        out.append(
            f'<text x="{ox - 6}" y="{oy + title_h + cell}" font-size="9" text-anchor="end">true</text>'
        )
        out.append(
            f'<text x="{ox + cell}" y="{oy + title_h + 2 * cell + 12}" font-size="9" '
            f'text-anchor="middle">predicted</text>'
        )
    out.append("</svg>")
    return "\n".join(out)
