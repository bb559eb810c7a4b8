"""
Rate-distortion curves as a standalone SVG line plot.
"""
import math
from collections import defaultdict
from pathlib import Path
from typing import Dict, List, Sequence, Tuple

from .models import RdPoint

WIDTH, HEIGHT, MARGIN = 640, 420, 56
COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"]


def rd_curves(points: Sequence[RdPoint]) -> Dict[str, List[Tuple[float, float]]]:
    """Mean (bpp, psnr) per q_0 for each sampler setting, sorted by bpp."""
    cells = defaultdict(list)
    for p in points:
        if math.isfinite(p.psnr):
            cells[(p.steps, p.beta, p.noise, p.q_0)].append((p.bpp, p.psnr))
    curves = defaultdict(list)
    for (steps, beta, noise, _), values in cells.items():
        label = "codec only (N=0)" if steps == 0 else f"N={steps}, beta={beta:g}, {noise}"
        bpp = sum(v[0] for v in values) / len(values)
        quality = sum(v[1] for v in values) / len(values)
        curves[label].append((bpp, quality))
    return {label: sorted(pts) for label, pts in sorted(curves.items())}


def render_rd_svg(points: Sequence[RdPoint], title: str = "Rate-distortion") -> str:
    curves = rd_curves(points)
    xs = [x for pts in curves.values() for x, _ in pts] or [0.0, 1.0]
    ys = [y for pts in curves.values() for _, y in pts] or [0.0, 1.0]
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(ys), max(ys)
    x_span = (x_hi - x_lo) or 1.0
    y_span = (y_hi - y_lo) or 1.0

    def sx(x):
        return MARGIN + (x - x_lo) / x_span * (WIDTH - 2 * MARGIN)

    def sy(y):
        return HEIGHT - MARGIN - (y - y_lo) / y_span * (HEIGHT - 2 * MARGIN)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.1f}" y="24" text-anchor="middle" font-size="16">{title}</text>',
        f'<line x1="{MARGIN}" y1="{HEIGHT - MARGIN}" x2="{WIDTH - MARGIN}" y2="{HEIGHT - MARGIN}" stroke="black"/>',
        f'<line x1="{MARGIN}" y1="{MARGIN}" x2="{MARGIN}" y2="{HEIGHT - MARGIN}" stroke="black"/>',
        f'<text x="{WIDTH / 2:.1f}" y="{HEIGHT - 14}" text-anchor="middle" font-size="12">bpp ({x_lo:.3f} to {x_hi:.3f})</text>',
        f'<text x="16" y="{HEIGHT / 2:.1f}" font-size="12" transform="rotate(-90 16 {HEIGHT / 2:.1f})" '
        f'text-anchor="middle">PSNR dB ({y_lo:.2f} to {y_hi:.2f})</text>',
    ]
    for i, (label, pts) in enumerate(curves.items()):
        color = COLORS[i % len(COLORS)]
        path = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in pts)
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="2" points="{path}"/>')
        for x, y in pts:
            out.append(f'<circle cx="{sx(x):.2f}" cy="{sy(y):.2f}" r="3" fill="{color}"/>')
        out.append(f'<text x="{WIDTH - MARGIN - 4}" y="{MARGIN + 16 * i}" text-anchor="end" '
                   f'font-size="12" fill="{color}">{label}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_rd_svg(path: Path, points: Sequence[RdPoint], title: str = "Rate-distortion") -> None:
    Path(path).write_text(render_rd_svg(points, title))
