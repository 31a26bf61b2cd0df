"""Circle detection: the coverage objective and the search drivers.

A candidate is a 1-based index triplet into the edge-point array. Its
objective is the fraction of the decoded circle's rasterized test points
that find no edge pixel nearby, so 0 means the full circumference is
present and 1 means none of it is. Degenerate triplets, out-of-range
indices and circles below the minimum radius all score the flat penalty.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import ndimage

from .dde import DdeConfig, evolve
from .edges import EdgeMap
from .errors import ConfigError, DegenerateError, IndexOutOfRangeError, InsufficientEdgesError
from .geometry import (
    Circle,
    candidate_to_circle,
    mca_columns_in_row,
    mca_point_count,
    rasterize_circle,
    round_half_away_from_zero,
)


@dataclass(frozen=True)
class DetectorConfig:
    """Detection parameters wrapping an engine configuration.

    ``window`` is the odd side length of the square neighborhood a test
    point may search for an edge pixel in. ``completeness_threshold`` is
    the minimum hit ratio a detection must reach to count as a circle
    rather than an arc or coincidence.
    """

    window: int = 5
    min_radius: float = 3.0
    max_circles: int = 1
    completeness_threshold: float = 0.7
    mask_tolerance: float = 1.0
    dde: DdeConfig = field(default_factory=lambda: DdeConfig(target_objective=0.0))

    def __post_init__(self):
        if self.window < 1 or self.window % 2 == 0:
            raise ConfigError(f"window must be odd and >= 1, got {self.window}")
        if self.min_radius < 3:
            raise ConfigError(f"min_radius must be >= 3, got {self.min_radius}")
        if self.max_circles < 1:
            raise ConfigError("max_circles must be at least 1")
        if not 0 <= self.completeness_threshold <= 1:
            raise ConfigError("completeness_threshold must be in [0, 1]")
        if self.mask_tolerance < 0:
            raise ConfigError("mask_tolerance must be non-negative")
        if self.dde.penalty_cost <= 1:
            raise ConfigError("penalty_cost must exceed 1, the worst feasible objective")


@dataclass(frozen=True)
class Detection:
    """One detected circle with its search diagnostics.

    ``circle`` is None when the search never found a feasible candidate
    (then ``objective`` equals the penalty and ``hit_ratio`` is 0).
    """

    circle: Circle | None
    objective: float
    hit_ratio: float
    generations: int
    elapsed: float
    candidate: tuple[int, int, int]


def edge_hit(edges: EdgeMap, x: int, y: int, window: int = 5) -> int:
    """1 if any edge pixel lies in the window x window square centered at (x, y).

    The square is clipped to the image; a point whose entire window falls
    outside returns 0.
    """
    half = window // 2
    x0, x1 = max(0, x - half), min(edges.width, x + half + 1)
    y0, y1 = max(0, y - half), min(edges.height, y + half + 1)
    if x0 >= x1 or y0 >= y1:
        return 0
    return int(edges.mask[y0:y1, x0:x1].any())


def _hit_mask(edges: EdgeMap, window: int) -> np.ndarray:
    """Precomputed edge_hit over the whole image (square dilation of the mask)."""
    if window == 1:
        return edges.mask
    return ndimage.maximum_filter(
        edges.mask.astype(np.uint8), size=window, mode="constant", cval=0
    ).astype(bool)


class _Objective:
    """Callable objective over index triplets, with a per-circle score cache.

    Many triplets decode to the same rounded circle, so scores are cached
    on the rounded (cx, cy, r) key. The callable is pure: identical inputs
    always produce identical values.
    """

    def __init__(self, edges: EdgeMap, cfg: DetectorConfig):
        self.edges = edges
        self.cfg = cfg
        self.hits = _hit_mask(edges, cfg.window)
        self._cache: dict[tuple[int, int, int], float] = {}
        # nearly collinear triplets decode to enormous radii; past this the
        # scorer switches to row queries bounded by the image size
        self._full_raster_cap = 2 * max(edges.width, edges.height)

    def __call__(self, candidate) -> float:
        i, j, k = (int(candidate[0]), int(candidate[1]), int(candidate[2]))
        try:
            circle = candidate_to_circle(i, j, k, self.edges)
        except (DegenerateError, IndexOutOfRangeError):
            return self.cfg.dde.penalty_cost
        if circle.r < self.cfg.min_radius:
            return self.cfg.dde.penalty_cost
        key = (
            round_half_away_from_zero(circle.x0),
            round_half_away_from_zero(circle.y0),
            round_half_away_from_zero(circle.r),
        )
        score = self._cache.get(key)
        if score is None:
            score = self._score(key)
            self._cache[key] = score
        return score

    def _score(self, key: tuple[int, int, int]) -> float:
        cx, cy, r = key
        w, h = self.edges.width, self.edges.height
        if cx + r < 0 or cx - r >= w or cy + r < 0 or cy - r >= h:
            return 1.0  # raster entirely outside: no point can hit
        if r <= self._full_raster_cap:
            ts = rasterize_circle(Circle(cx, cy, r), w, h)
            pts = ts.points[ts.inside]
            hits = int(self.hits[pts[:, 1], pts[:, 0]].sum()) if len(pts) else 0
            return 1.0 - hits / ts.ns
        return self._score_by_rows(cx, cy, r)

    def _score_by_rows(self, cx: int, cy: int, r: int) -> float:
        """Same value as the raster path, but O(image) for any radius."""
        hits = 0
        w, h = self.edges.width, self.edges.height
        for yy in range(max(0, cy - r), min(h - 1, cy + r) + 1):
            for dx in mca_columns_in_row(r, yy - cy, lo=-cx, hi=w - 1 - cx):
                if self.hits[yy, cx + dx]:
                    hits += 1
        return 1.0 - hits / mca_point_count(r)


def objective_j(candidate, edges: EdgeMap, cfg: DetectorConfig) -> float:
    """Score one candidate triplet; total function, failures map to the penalty."""
    return _Objective(edges, cfg)(candidate)


def detect_circle(
    edges: EdgeMap, cfg: DetectorConfig = DetectorConfig(),
    rng: np.random.Generator | None = None,
) -> Detection:
    """Search the edge map for the single best circle.

    Raises:
        InsufficientEdgesError: if the map holds fewer than 3 edge points.
    """
    if edges.num_points < 3:
        raise InsufficientEdgesError(f"need at least 3 edge points, have {edges.num_points}")
    dde_cfg = replace(cfg.dde, dim=3, lower_bound=1, upper_bound=edges.num_points)
    if rng is None:
        rng = np.random.default_rng(dde_cfg.seed)

    start = time.perf_counter()
    result = evolve(_Objective(edges, cfg), dde_cfg, rng)
    elapsed = time.perf_counter() - start

    triplet = tuple(int(v) for v in result.best)
    if result.best_objective > 1.0:
        return Detection(None, result.best_objective, 0.0, result.generations_run,
                         elapsed, triplet)
    circle = candidate_to_circle(*triplet, edges)
    return Detection(circle, result.best_objective, 1.0 - result.best_objective,
                     result.generations_run, elapsed, triplet)


def mask_detected(edges: EdgeMap, c: Circle, tol: float = 1.0) -> EdgeMap:
    """Erase edge pixels within ``tol`` of the circle's circumference."""
    pts = edges.points
    if len(pts) == 0:
        return edges
    dist = np.hypot(pts[:, 0] - c.x0, pts[:, 1] - c.y0)
    drop = pts[np.abs(dist - c.r) <= tol]
    if len(drop) == 0:
        return edges
    mask = edges.mask.copy()
    mask[drop[:, 1], drop[:, 0]] = False
    return EdgeMap(mask)


def _detect_sequence(
    edges: EdgeMap, cfg: DetectorConfig, rng: np.random.Generator | None,
    require_complete: bool,
) -> list[Detection]:
    if rng is None:
        rng = np.random.default_rng(cfg.dde.seed)
    detections: list[Detection] = []
    current = edges
    for _ in range(cfg.max_circles):
        if current.num_points < 3:
            break
        det = detect_circle(current, cfg, rng)
        if det.circle is None:
            break
        if require_complete and det.hit_ratio < cfg.completeness_threshold:
            # nothing better remains on the masked map, so stop searching
            break
        detections.append(det)
        current = mask_detected(current, det.circle, cfg.mask_tolerance)
    return detections


def detect_multiple(
    edges: EdgeMap, cfg: DetectorConfig, rng: np.random.Generator | None = None
) -> list[Detection]:
    """Detect up to ``max_circles`` circles, masking each find before the next.

    Detections failing the completeness threshold are dropped and end the
    iteration. An empty list means no circle was detected.
    """
    return _detect_sequence(edges, cfg, rng, require_complete=True)


def approximate_shape(
    edges: EdgeMap, cfg: DetectorConfig, rng: np.random.Generator | None = None
) -> list[Detection]:
    """Cover arbitrary shapes with up to ``max_circles`` circles.

    Same loop as detect_multiple but without the completeness rejection:
    the best circles come first, arcs and partial fits follow.
    """
    return _detect_sequence(edges, cfg, rng, require_complete=False)
