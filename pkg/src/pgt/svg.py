"""Self-contained SVG log-log plot of an arrival-time frontier."""

from __future__ import annotations

import math
from typing import Sequence
from xml.sax.saxutils import escape

WIDTH, HEIGHT = 800, 600
MARGIN = dict(left=90, right=30, top=50, bottom=90)


def _ticks(lo: float, hi: float) -> list[int]:
    first, last = math.floor(lo), math.ceil(hi)
    step = max(1, (last - first) // 10)
    return list(range(first, last + 1, step))


def loglog_svg(
    eps: Sequence[float],
    times: Sequence[float],
    alpha: float | None = None,
    prefactor: float | None = None,
    reference: float | None = None,
    title: str = "",
) -> str:
    """Scatter of ``log10(1/eps)`` against ``log10 t`` with the fitted line and a caption."""
    pts = [(-math.log10(e), math.log10(t)) for e, t in zip(eps, times) if e > 0 and t > 0]
    if not pts:
        raise ValueError("nothing to plot: need points with eps > 0")
    xs, ys = zip(*pts)
    x0, x1 = math.floor(min(xs)), math.ceil(max(xs))
    y0, y1 = math.floor(min(ys)), math.ceil(max(ys))
    if x1 == x0:
        x1 += 1
    if y1 == y0:
        y1 += 1
    pw = WIDTH - MARGIN["left"] - MARGIN["right"]
    ph = HEIGHT - MARGIN["top"] - MARGIN["bottom"]

    def sx(x: float) -> float:
        return MARGIN["left"] + (x - x0) / (x1 - x0) * pw

    def sy(y: float) -> float:
        return MARGIN["top"] + (1 - (y - y0) / (y1 - y0)) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="13">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<rect x="{MARGIN["left"]}" y="{MARGIN["top"]}" width="{pw}" height="{ph}" '
        'fill="none" stroke="black"/>',
        f'<clipPath id="plot"><rect x="{MARGIN["left"]}" y="{MARGIN["top"]}" width="{pw}" height="{ph}"/></clipPath>',
    ]
    for tx in _ticks(x0, x1):
        if x0 <= tx <= x1:
            out.append(f'<line x1="{sx(tx):.2f}" y1="{sy(y0):.2f}" x2="{sx(tx):.2f}" y2="{sy(y0) + 6:.2f}" stroke="black"/>')
            out.append(f'<text x="{sx(tx):.2f}" y="{sy(y0) + 22:.2f}" text-anchor="middle">1e{-tx}</text>')
    for ty in _ticks(y0, y1):
        if y0 <= ty <= y1:
            out.append(f'<line x1="{sx(x0) - 6:.2f}" y1="{sy(ty):.2f}" x2="{sx(x0):.2f}" y2="{sy(ty):.2f}" stroke="black"/>')
            out.append(f'<text x="{sx(x0) - 10:.2f}" y="{sy(ty) + 4:.2f}" text-anchor="end">1e{ty}</text>')
    out.append(
        f'<text x="{MARGIN["left"] + pw / 2:.2f}" y="{HEIGHT - 45}" text-anchor="middle">epsilon = 1 - P</text>'
    )
    out.append(
        f'<text x="22" y="{MARGIN["top"] + ph / 2:.2f}" text-anchor="middle" '
        f'transform="rotate(-90 22 {MARGIN["top"] + ph / 2:.2f})">arrival time t</text>'
    )
    if title:
        out.append(f'<text x="{WIDTH / 2}" y="30" text-anchor="middle" font-size="15">{escape(title)}</text>')
    for x, y in pts:
        out.append(f'<circle cx="{sx(x):.2f}" cy="{sy(y):.2f}" r="3.5" fill="#1f5fa8"/>')
    caption = ""
    if alpha is not None and math.isfinite(alpha):
        c = math.log10(prefactor) if prefactor and prefactor > 0 else 0.0
        ya, yb = alpha * x0 + c, alpha * x1 + c
        out.append(
            f'<line x1="{sx(x0):.2f}" y1="{sy(ya):.2f}" x2="{sx(x1):.2f}" y2="{sy(yb):.2f}" '
            'stroke="#c0392b" stroke-width="1.5" clip-path="url(#plot)"/>'
        )
        caption = f"fitted alpha = {alpha:.4f}"
        if reference is not None:
            caption += f", K_I/2 = {reference:g}"
    if caption:
        out.append(f'<text x="{WIDTH / 2}" y="{HEIGHT - 15}" text-anchor="middle">{escape(caption)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
