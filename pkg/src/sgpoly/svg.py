"""Small SVG 1.1 writers: line charts and coloured cell renderings of a mesh."""

from __future__ import annotations

import math
from typing import Sequence
from xml.sax.saxutils import escape

from .geometry import embed, level_index
from .laplacian import VertexMesh

WIDTH, HEIGHT = 800, 600
MARGIN = 60
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2")


def _num(x: float) -> str:
    return f"{x:.2f}"


def _header(title: str) -> list[str]:
    return [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH // 2}" y="24" text-anchor="middle" font-family="sans-serif" '
        f'font-size="16">{escape(title)}</text>',
    ]


def _range(values: Sequence[float]) -> tuple[float, float]:
    finite = [v for v in values if math.isfinite(v)]
    if not finite:
        return 0.0, 1.0
    lo, hi = min(finite), max(finite)
    if lo == hi:
        pad = abs(lo) or 1.0
        return lo - pad, hi + pad
    return lo, hi


def line_chart(
    series: Sequence[tuple[str, Sequence[float], Sequence[float]]],
    title: str = "",
    xlabel: str = "",
    ylabel: str = "",
    logx: bool = False,
) -> str:
    """Polylines for ``(name, xs, ys)`` series on shared axes; non-finite points break a line."""
    tx = (lambda v: math.log10(v)) if logx else (lambda v: v)
    xs_all = [tx(x) for _, xs, _ in series for x in xs if not logx or x > 0]
    ys_all = [float(y) for _, _, ys in series for y in ys if y is not None]
    x0, x1 = _range(xs_all)
    y0, y1 = _range(ys_all)
    left, right, top, bottom = MARGIN, WIDTH - MARGIN // 2 - 110, MARGIN, HEIGHT - MARGIN

    def px(x: float) -> float:
        return left + (tx(x) - x0) / (x1 - x0) * (right - left)

    def py(y: float) -> float:
        return bottom - (y - y0) / (y1 - y0) * (bottom - top)

    out = _header(title)
    out.append(
        f'<path d="M{left},{top} L{left},{bottom} L{right},{bottom}" fill="none" stroke="black" stroke-width="1"/>'
    )
    for i in range(5):
        fy = y0 + (y1 - y0) * i / 4
        fx = x0 + (x1 - x0) * i / 4
        xv = 10 ** fx if logx else fx
        out.append(
            f'<text x="{left - 6}" y="{_num(py(fy) + 4)}" text-anchor="end" font-family="sans-serif" '
            f'font-size="11">{fy:.4g}</text>'
        )
        out.append(
            f'<text x="{_num(px(xv))}" y="{bottom + 16}" text-anchor="middle" font-family="sans-serif" '
            f'font-size="11">{xv:.4g}</text>'
        )
    if xlabel:
        out.append(
            f'<text x="{(left + right) // 2}" y="{HEIGHT - 14}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="13">{escape(xlabel)}</text>'
        )
    if ylabel:
        out.append(
            f'<text x="16" y="{(top + bottom) // 2}" text-anchor="middle" font-family="sans-serif" '
            f'font-size="13" transform="rotate(-90 16 {(top + bottom) // 2})">{escape(ylabel)}</text>'
        )
    for idx, (name, xs, ys) in enumerate(series):
        colour = PALETTE[idx % len(PALETTE)]
        runs: list[list[str]] = [[]]
        for x, y in zip(xs, ys):
            if y is None or not math.isfinite(float(y)) or (logx and x <= 0):
                runs.append([])
                continue
            runs[-1].append(f"{_num(px(x))},{_num(py(float(y)))}")
        for run in runs:
            if len(run) > 1:
                out.append(f'<polyline points="{" ".join(run)}" fill="none" stroke="{colour}" stroke-width="1.5"/>')
            elif run:
                x, y = run[0].split(",")
                out.append(f'<circle cx="{x}" cy="{y}" r="2" fill="{colour}"/>')
        ly = top + 16 * idx
        out.append(f'<line x1="{right + 10}" y1="{ly}" x2="{right + 30}" y2="{ly}" stroke="{colour}" stroke-width="2"/>')
        out.append(
            f'<text x="{right + 34}" y="{ly + 4}" font-family="sans-serif" font-size="11">{escape(name)}</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _colour(t: float) -> str:
    # blue (low) through white to red (high)
    t = min(1.0, max(0.0, t))
    if t < 0.5:
        s = t / 0.5
        rgb = (int(40 + 215 * s), int(80 + 175 * s), 255)
    else:
        s = (t - 0.5) / 0.5
        rgb = (255, int(255 - 175 * s), int(255 - 215 * s))
    return "#%02x%02x%02x" % rgb


def mesh_heightmap(mesh: VertexMesh, title: str = "") -> str:
    """Each smallest cell drawn as a triangle coloured by its mean vertex value."""
    index = level_index(mesh.level)
    values = {a: float(mesh[a]) for a in index.vertices}
    lo, hi = _range(list(values.values()))
    size = min(WIDTH - 2 * MARGIN, (HEIGHT - 2 * MARGIN) * 2 / math.sqrt(3))
    ox = WIDTH / 2
    oy = HEIGHT - MARGIN + 10

    def pt(word: str, i: int) -> str:
        x, y = embed(word, i)
        return f"{_num(ox + x * size)},{_num(oy - y * size)}"

    out = _header(title)
    for word in index.cells():
        mean = sum(values[index.canonical((word, i))] for i in range(3)) / 3
        colour = _colour((mean - lo) / (hi - lo))
        pts = " ".join(pt(word, i) for i in range(3))
        out.append(f'<polygon points="{pts}" fill="{colour}" stroke="{colour}" stroke-width="0.3"/>')
    out.append(
        f'<text x="{MARGIN}" y="{HEIGHT - 12}" font-family="sans-serif" font-size="12">'
        f"min {lo:.6g}  max {hi:.6g}</text>"
    )
    out.append("</svg>")
    return "\n".join(out) + "\n"
