"""Hand-rolled SVG line and scatter charts.

Plots are conveniences for eyeballing runs; the CSVs next to them are the
canonical outputs. No styling beyond what reading the charts requires.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

PALETTE = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b")


@dataclass
class Panel:
    title: str = ""
    xlabel: str = ""
    ylabel: str = ""
    series: list = field(default_factory=list)   # (x, y, color, label)
    hlines: tuple = ()                           # guide y-values
    scatter: bool = False


def _limits(values, pad=0.05):
    lo = min((float(np.min(v)) for v in values if len(v)), default=0.0)
    hi = max((float(np.max(v)) for v in values if len(v)), default=1.0)
    if hi <= lo:
        hi = lo + 1.0
    span = hi - lo
    return lo - pad * span, hi + pad * span


def _fmt_tick(v):
    return f"{v:.4g}"


def _render_panel(p: Panel, ox, oy, w, h):
    xs = [s[0] for s in p.series]
    ys = [s[1] for s in p.series]
    if p.hlines:
        ys = ys + [np.array(p.hlines)]
    x_lo, x_hi = _limits(xs)
    y_lo, y_hi = _limits(ys)

    def px(x):
        return ox + (x - x_lo) / (x_hi - x_lo) * w

    def py(y):
        return oy + h - (y - y_lo) / (y_hi - y_lo) * h

    out = [f'<rect x="{ox}" y="{oy}" width="{w}" height="{h}" fill="none" stroke="#999"/>']
    if p.title:
        out.append(f'<text x="{ox + w / 2:.1f}" y="{oy - 6}" text-anchor="middle" '
                   f'font-size="11">{p.title}</text>')
    for y in p.hlines:
        out.append(f'<line x1="{ox}" y1="{py(y):.1f}" x2="{ox + w}" y2="{py(y):.1f}" '
                   f'stroke="#bbb" stroke-dasharray="4,3"/>')
    for (x, y, color, label) in p.series:
        if len(x) == 0:
            continue
        if p.scatter:
            dots = "".join(f'<circle cx="{px(a):.1f}" cy="{py(b):.1f}" r="1.2" '
                           f'fill="{color}"/>' for a, b in zip(x, y))
            out.append(dots)
        else:
            pts = " ".join(f"{px(a):.1f},{py(b):.1f}" for a, b in zip(x, y))
            out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" '
                       f'stroke-width="1.2"/>')
    # min/max ticks
    out.append(f'<text x="{ox}" y="{oy + h + 12}" font-size="9">{_fmt_tick(x_lo)}</text>')
    out.append(f'<text x="{ox + w}" y="{oy + h + 12}" text-anchor="end" '
               f'font-size="9">{_fmt_tick(x_hi)}</text>')
    out.append(f'<text x="{ox - 4}" y="{oy + h}" text-anchor="end" font-size="9">'
               f'{_fmt_tick(y_lo)}</text>')
    out.append(f'<text x="{ox - 4}" y="{oy + 8}" text-anchor="end" font-size="9">'
               f'{_fmt_tick(y_hi)}</text>')
    if p.xlabel:
        out.append(f'<text x="{ox + w / 2:.1f}" y="{oy + h + 24}" text-anchor="middle" '
                   f'font-size="10">{p.xlabel}</text>')
    if p.ylabel:
        out.append(f'<text x="{ox - 34}" y="{oy + h / 2:.1f}" font-size="10" '
                   f'transform="rotate(-90 {ox - 34} {oy + h / 2:.1f})" '
                   f'text-anchor="middle">{p.ylabel}</text>')
    return out


def write_chart(path, panels, ncols=1, panel_w=420, panel_h=180):
    """Lay panels out on a grid and write the SVG document."""
    n = len(panels)
    ncols = max(1, ncols)
    nrows = (n + ncols - 1) // ncols
    ml, mt, gx, gy = 60, 30, 40, 50
    width = ml + ncols * (panel_w + gx)
    height = mt + nrows * (panel_h + gy)
    body = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
            f'height="{height}" font-family="sans-serif">',
            f'<rect width="{width}" height="{height}" fill="white"/>']
    for i, p in enumerate(panels):
        r, c = divmod(i, ncols)
        body.extend(_render_panel(p, ml + c * (panel_w + gx),
                                  mt + r * (panel_h + gy), panel_w, panel_h))
    # one shared legend from the first panel that has labels
    for p in panels:
        labels = [(s[2], s[3]) for s in p.series if s[3]]
        if labels:
            for j, (color, label) in enumerate(labels):
                y = height - 8
                x = ml + j * 160
                body.append(f'<rect x="{x}" y="{y - 9}" width="12" height="3" '
                            f'fill="{color}"/>')
                body.append(f'<text x="{x + 16}" y="{y - 4}" font-size="10">{label}</text>')
            break
    body.append("</svg>")
    Path(path).write_text("\n".join(body) + "\n")
