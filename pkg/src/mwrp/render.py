"""Static SVG drawings of a grid and agent paths."""

from __future__ import annotations

from typing import Sequence
from xml.sax.saxutils import quoteattr

from .grid import GridMap

PALETTE = ("#e6194b", "#3cb44b", "#4363d8", "#f58231", "#911eb4",
           "#42d4f4", "#f032e6", "#9a6324", "#469990", "#808000")


def render_svg(grid: GridMap, starts: Sequence[Sequence[int]], paths: Sequence[Sequence[Sequence[int]]],
               cell: int = 12, title: str | None = None) -> str:
    """SVG 1.1 document: obstacles, one polyline per agent and a marker per start.

    Every path cell becomes one polyline vertex, so a path of length L
    (cells, not moves) draws L vertices.
    """
    h, w = grid.height, grid.width
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w * cell}" '
        f'height="{h * cell}" viewBox="0 0 {w * cell} {h * cell}">',
    ]
    if title:
        out.append(f"<title>{title}</title>")
    out.append(f'<rect x="0" y="0" width="{w * cell}" height="{h * cell}" fill="#ffffff"/>')
    out.append('<g class="obstacles" fill="#333333">')
    occ = grid.occupancy
    for r in range(h):
        for c in range(w):
            if occ[r, c]:
                out.append(f'<rect x="{c * cell}" y="{r * cell}" width="{cell}" height="{cell}"/>')
    out.append("</g>")

    def centre(rc):
        return f"{rc[1] * cell + cell / 2:g},{rc[0] * cell + cell / 2:g}"

    for k, path in enumerate(paths):
        colour = quoteattr(PALETTE[k % len(PALETTE)])
        pts = " ".join(centre(rc) for rc in path)
        out.append(f'<polyline class="path" data-agent="{k}" points="{pts}" fill="none" '
                   f'stroke={colour} stroke-width="{max(1, cell // 4)}" stroke-linejoin="round"/>')
    for k, s in enumerate(starts):
        colour = quoteattr(PALETTE[k % len(PALETTE)])
        x, y = centre(s).split(",")
        out.append(f'<circle class="start" cx="{x}" cy="{y}" r="{cell / 3:g}" fill={colour} '
                   'stroke="#000000"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
