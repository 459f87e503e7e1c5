"""Minimal static SVG line charts (no plotting stack needed)."""

from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

WIDTH, PANEL_H, MARGIN = 640, 260, 56
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd")


def _fmt(v: float) -> str:
    return f"{v:.4g}"


def _panel(x, ys, labels, top, title, xlabel) -> list[str]:
    x = np.asarray(x, dtype=float)
    allv = np.concatenate([np.asarray(y, dtype=float) for y in ys])
    ylo, yhi = float(allv.min()), float(allv.max())
    if yhi == ylo:
        ylo, yhi = ylo - 1, yhi + 1
    xlo, xhi = float(x.min()), float(x.max())
    if xhi == xlo:
        xlo, xhi = xlo - 1, xhi + 1
    w, h = WIDTH - 2 * MARGIN, PANEL_H - 2 * MARGIN + 20

    def px(v):
        return MARGIN + (v - xlo) / (xhi - xlo) * w

    def py(v):
        return top + MARGIN - 20 + (yhi - v) / (yhi - ylo) * h

    out = [
        f'<rect x="{MARGIN}" y="{top + MARGIN - 20}" width="{w}" height="{h}" '
        'fill="none" stroke="#444"/>',
        f'<text x="{WIDTH / 2}" y="{top + 22}" text-anchor="middle" font-size="14">'
        f"{escape(title)}</text>",
        f'<text x="{WIDTH / 2}" y="{top + PANEL_H - 6}" text-anchor="middle" '
        f'font-size="12">{escape(xlabel)}</text>',
    ]
    for frac in (0.0, 0.5, 1.0):
        xv, yv = xlo + frac * (xhi - xlo), ylo + frac * (yhi - ylo)
        out.append(f'<text x="{px(xv):.2f}" y="{top + MARGIN + h - 4}" '
                   f'text-anchor="middle" font-size="10">{_fmt(xv)}</text>')
        out.append(f'<text x="{MARGIN - 4}" y="{py(yv):.2f}" text-anchor="end" '
                   f'font-size="10">{_fmt(yv)}</text>')
    for k, (y, label) in enumerate(zip(ys, labels)):
        pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(x, y))
        color = COLORS[k % len(COLORS)]
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        out.append(f'<text x="{WIDTH - MARGIN - 4}" y="{top + MARGIN - 4 + 14 * k}" '
                   f'text-anchor="end" font-size="11" fill="{color}">{escape(label)}</text>')
    return out


def sweep_svg(sweep, derivative=None, title: str | None = None) -> str:
    """Observable panel, plus a derivative panel below it when given."""
    panels = [(sweep, title or f"{sweep.observable} ({sweep.model}, N={sweep.n_sites})")]
    if derivative is not None:
        panels.append((derivative, f"d {sweep.observable} / d({sweep.control})"))
    height = PANEL_H * len(panels)
    body = []
    for k, (s, t) in enumerate(panels):
        body += _panel(s.x, [s.y], [s.observable], k * PANEL_H, t, s.control)
    return "\n".join(
        [f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" '
         f'viewBox="0 0 {WIDTH} {height}" font-family="sans-serif">',
         f'<rect width="{WIDTH}" height="{height}" fill="white"/>', *body, "</svg>", ""]
    )


def write_svg(text: str, path) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(text)
