"""Dependency-free SVG overlays of edge maps and detected circles."""

from __future__ import annotations

from .edges import EdgeMap
from .geometry import Circle

_COLORS = ("#e6194b", "#3cb44b", "#4363d8", "#f58231", "#911eb4", "#46f0f0")


def render_overlay(edges: EdgeMap, circles: list[Circle], scale: int = 2) -> str:
    """Edge pixels in white on black, detected circles as colored outlines."""
    w, h = edges.width, edges.height
    # all edge pixels as one path of unit squares keeps the file compact
    segments = "".join(f"M{x} {y}h1v1h-1z" for x, y in edges.points.tolist())
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w * scale}" height="{h * scale}" '
        f'viewBox="0 0 {w} {h}">',
        f'<rect width="{w}" height="{h}" fill="black"/>',
        f'<path d="{segments}" fill="white"/>' if segments else "",
    ]
    for idx, c in enumerate(circles):
        color = _COLORS[idx % len(_COLORS)]
        parts.append(
            f'<circle cx="{c.x0 + 0.5:.3f}" cy="{c.y0 + 0.5:.3f}" r="{c.r:.3f}" '
            f'fill="none" stroke="{color}" stroke-width="1"/>'
        )
    parts.append("</svg>")
    return "\n".join(p for p in parts if p) + "\n"
