"""Shared fixture builders for synthetic scenes."""

from __future__ import annotations

import numpy as np
import pytest

from evocircles import Circle, EdgeMap, GrayImage, rasterize_circle


def edge_map_from_circles(circles, width, height) -> EdgeMap:
    """Union of rasterized circle contours, no noise."""
    mask = np.zeros((height, width), dtype=bool)
    for c in circles:
        ts = rasterize_circle(c, width, height)
        pts = ts.points[ts.inside]
        mask[pts[:, 1], pts[:, 0]] = True
    return EdgeMap(mask)


def draw_segment(mask: np.ndarray, x0: int, y0: int, x1: int, y1: int) -> None:
    n = int(max(abs(x1 - x0), abs(y1 - y0))) + 1
    xs = np.round(np.linspace(x0, x1, n)).astype(int)
    ys = np.round(np.linspace(y0, y1, n)).astype(int)
    mask[ys, xs] = True


def arc_edge_map(center=(100, 100), r=60, span_deg=(-60, 60), size=(200, 200)) -> EdgeMap:
    """Only the raster points whose angle from center lies within span_deg."""
    width, height = size
    full = rasterize_circle(Circle(center[0], center[1], r), width, height)
    pts = full.points[full.inside]
    ang = np.degrees(np.arctan2(pts[:, 1] - center[1], pts[:, 0] - center[0]))
    sel = pts[(ang >= span_deg[0]) & (ang <= span_deg[1])]
    mask = np.zeros((height, width), dtype=bool)
    mask[sel[:, 1], sel[:, 0]] = True
    return EdgeMap(mask)


def place_disjoint(width, height, radii, rng, gap=6, margin=5):
    """Random non-overlapping placement for the given radii (largest first)."""
    for _ in range(3000):
        out = []
        for r in radii:
            lo = r + margin
            for _ in range(300):
                c = Circle(int(rng.integers(lo, width - 1 - lo + 1)),
                           int(rng.integers(lo, height - 1 - lo + 1)), r)
                if all((c.x0 - o.x0) ** 2 + (c.y0 - o.y0) ** 2 >= (c.r + o.r + gap) ** 2
                       for o in out):
                    out.append(c)
                    break
            else:
                break
        if len(out) == len(radii):
            return out
    raise RuntimeError("could not pack the requested circles")


def shapes_scene(noise=0.02, seed=77):
    """Grayscale scene: one disk among filled shapes and bars, plus pixel noise.

    Mirrors the discrimination protocol: noise contaminates the image and
    the edge detector is expected to clean most of it up.
    """
    width, height = 300, 200
    img = np.zeros((height, width), np.uint8)
    yy, xx = np.mgrid[0:height, 0:width]
    truth = Circle(220, 100, 45)
    img[(xx - 220) ** 2 + (yy - 100) ** 2 <= 45 * 45] = 255
    img[30:90, 30:110] = 255

    def half(x0, y0, x1, y1):
        return (xx - x0) * (y1 - y0) - (yy - y0) * (x1 - x0)

    tri = (half(40, 120, 120, 130) >= 0) & (half(120, 130, 70, 180) >= 0) \
        & (half(70, 180, 40, 120) >= 0)
    img[tri] = 255
    for (x0, y0, x1, y1) in ((140, 20, 180, 60), (130, 150, 200, 185)):
        n = 80
        xs = np.round(np.linspace(x0, x1, n)).astype(int)
        ys = np.round(np.linspace(y0, y1, n)).astype(int)
        for d in (-1, 0, 1):
            img[np.clip(ys + d, 0, height - 1), np.clip(xs, 0, width - 1)] = 255
    rng = np.random.default_rng(seed)
    flip = rng.random(img.shape) < noise
    return GrayImage(np.where(flip, 255 - img, img).astype(np.uint8)), truth


@pytest.fixture
def simple_edges() -> EdgeMap:
    """One clean circle at (100, 100, 40) in a 200x200 frame."""
    return edge_map_from_circles([Circle(100, 100, 40)], 200, 200)
