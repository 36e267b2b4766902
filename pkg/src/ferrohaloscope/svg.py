"""Minimal self-contained SVG output: line plots and heatmaps."""

from __future__ import annotations

from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

W, H = 640, 420
LEFT, RIGHT, TOP, BOTTOM = 70, 20, 30, 50
COLORS = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b")


def _scale(v, lo, hi, a, b):
    span = hi - lo if hi > lo else 1.0
    return a + (v - lo) / span * (b - a)


def _frame(title, xlabel, ylabel, xlim, ylim) -> list[str]:
    x0, x1, y0, y1 = LEFT, W - RIGHT, H - BOTTOM, TOP
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">',
        f'<rect x="{x0}" y="{y1}" width="{x1 - x0}" height="{y0 - y1}" fill="none" stroke="black"/>',
        f'<text x="{W / 2}" y="18" text-anchor="middle">{escape(title)}</text>',
        f'<text x="{W / 2}" y="{H - 10}" text-anchor="middle">{escape(xlabel)}</text>',
        f'<text x="15" y="{H / 2}" text-anchor="middle" transform="rotate(-90 15 {H / 2})">{escape(ylabel)}</text>',
    ]
    for v in np.linspace(*xlim, 5):
        x = _scale(v, *xlim, x0, x1)
        out.append(f'<text x="{x:.1f}" y="{y0 + 16}" text-anchor="middle">{v:.4g}</text>')
    for v in np.linspace(*ylim, 5):
        y = _scale(v, *ylim, y0, y1)
        out.append(f'<text x="{x0 - 5}" y="{y + 4:.1f}" text-anchor="end">{v:.3g}</text>')
    return out


def line_plot(path, series, title="", xlabel="", ylabel="", markers=False, errors=None):
    """``series`` maps a label to ``(x, y)``; ``errors`` optionally maps a label to y error bars."""
    xs = np.concatenate([np.asarray(x, float) for x, _ in series.values()])
    ys = np.concatenate([np.asarray(y, float) for _, y in series.values()])
    ok = np.isfinite(ys)
    xlim = (float(np.nanmin(xs)), float(np.nanmax(xs)))
    ylim = (min(0.0, float(ys[ok].min())) if ok.any() else 0.0, float(ys[ok].max()) * 1.05 if ok.any() else 1.0)
    out = _frame(title, xlabel, ylabel, xlim, ylim)
    errors = errors or {}
    for k, (label, (x, y)) in enumerate(series.items()):
        color = COLORS[k % len(COLORS)]
        px = [_scale(v, *xlim, LEFT, W - RIGHT) for v in x]
        py = [_scale(v, *ylim, H - BOTTOM, TOP) for v in y]
        pts = [(a, b) for a, b in zip(px, py) if np.isfinite(b)]
        if markers:
            for a, b in pts:
                out.append(f'<circle cx="{a:.1f}" cy="{b:.1f}" r="3" fill="{color}"/>')
            for a, yv, e in zip(px, y, errors.get(label, ())):
                if np.isfinite(yv) and np.isfinite(e):
                    top = _scale(yv + e, *ylim, H - BOTTOM, TOP)
                    bot = _scale(yv - e, *ylim, H - BOTTOM, TOP)
                    out.append(f'<line x1="{a:.1f}" y1="{top:.1f}" x2="{a:.1f}" y2="{bot:.1f}" stroke="{color}"/>')
        else:
            d = " ".join(f"{a:.1f},{b:.1f}" for a, b in pts)
            out.append(f'<polyline points="{d}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        out.append(f'<text x="{W - RIGHT - 5}" y="{TOP + 15 * (k + 1)}" text-anchor="end" fill="{color}">{escape(label)}</text>')
    out.append("</svg>")
    Path(path).write_text("\n".join(out) + "\n")


def heatmap(path, x, y, z, title="", xlabel="", ylabel=""):
    """``z`` has shape ``(len(y), len(x))``; colour is linear in z / max(z)."""
    x, y, z = np.asarray(x, float), np.asarray(y, float), np.asarray(z, float)
    xlim, ylim = (x.min(), x.max()), (y.min(), y.max())
    out = _frame(title, xlabel, ylabel, xlim, ylim)
    zmax = z.max() if z.max() > 0 else 1.0
    cw = (W - RIGHT - LEFT) / len(x)
    ch = (H - BOTTOM - TOP) / len(y)
    for j in range(len(y)):
        for i in range(len(x)):
            level = int(255 * (1.0 - z[j, i] / zmax))
            if level >= 250:
                continue
            px = LEFT + i * cw
            py = H - BOTTOM - (j + 1) * ch
            out.append(
                f'<rect x="{px:.2f}" y="{py:.2f}" width="{cw + 0.2:.2f}" height="{ch + 0.2:.2f}" '
                f'fill="rgb({level},{level},255)"/>'
            )
    out.append("</svg>")
    Path(path).write_text("\n".join(out) + "\n")
