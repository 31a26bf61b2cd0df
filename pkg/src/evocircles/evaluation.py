"""Ground-truth scoring, synthetic scene generation, and the benchmark runner."""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, replace

import numpy as np

from .detector import DetectorConfig, detect_circle, detect_multiple
from .edges import EdgeMap, GrayImage
from .errors import InsufficientEdgesError, PlacementError
from .geometry import Circle, rasterize_circle

PLACEMENT_MARGIN = 5


@dataclass(frozen=True)
class GroundTruth:
    """Known circles of a test scene."""

    circles: tuple[Circle, ...]
    width: int
    height: int

    def __post_init__(self):
        object.__setattr__(self, "circles", tuple(self.circles))
        for c in self.circles:
            if (c.x0 + c.r < 0 or c.x0 - c.r >= self.width
                    or c.y0 + c.r < 0 or c.y0 - c.r >= self.height):
                raise ValueError(f"{c} lies entirely outside {self.width}x{self.height}")


@dataclass(frozen=True)
class ScoreWeights:
    """Per-pixel weights of the center shift and radius mismatch terms."""

    eta: float = 0.05
    mu: float = 0.1

    def __post_init__(self):
        if self.eta < 0 or self.mu < 0:
            raise ValueError("weights must be non-negative")


def error_score(truth: Circle, detected: Circle, w: ScoreWeights = ScoreWeights()) -> float:
    """Weighted center shift plus radius mismatch against the ground truth.

    With the default weights a score below 1 tolerates up to 20 px of
    combined center shift or 10 px of radius error.
    """
    return (
        w.eta * (abs(truth.x0 - detected.x0) + abs(truth.y0 - detected.y0))
        + w.mu * abs(truth.r - detected.r)
    )


def is_success(es: float) -> bool:
    """A detection counts as a success strictly below an error score of 1."""
    return es < 1


def greedy_match(
    truths, detections, w: ScoreWeights = ScoreWeights()
) -> list[tuple[int, int]]:
    """Pair truth and detection indices by repeatedly taking the lowest score.

    Assignment is without replacement; leftover circles on either side stay
    unmatched.
    """
    pairs = []
    open_t = list(range(len(truths)))
    open_d = list(range(len(detections)))
    while open_t and open_d:
        ti, di = min(
            ((t, d) for t in open_t for d in open_d),
            key=lambda td: error_score(truths[td[0]], detections[td[1]], w),
        )
        pairs.append((ti, di))
        open_t.remove(ti)
        open_d.remove(di)
    return pairs


def random_circles(
    width: int, height: int, count: int, rng: np.random.Generator,
    r_min: int = 10, r_max: int | None = None, margin: int = PLACEMENT_MARGIN,
) -> list[Circle]:
    """Sample circles with integer parameters that fit the placement margin."""
    if r_max is None:
        r_max = max(r_min, min(width, height) // 4)
    circles = []
    for _ in range(count):
        r = int(rng.integers(r_min, r_max + 1))
        lo_x, hi_x = r + margin, width - 1 - (r + margin)
        lo_y, hi_y = r + margin, height - 1 - (r + margin)
        if lo_x > hi_x or lo_y > hi_y:
            raise PlacementError(
                f"radius {r} cannot fit a {width}x{height} image with margin {margin}"
            )
        circles.append(Circle(int(rng.integers(lo_x, hi_x + 1)),
                              int(rng.integers(lo_y, hi_y + 1)), r))
    return circles


def generate_synthetic(
    width: int, height: int, circles, noise_density: float = 0.0,
    rng: np.random.Generator | None = None, margin: int = PLACEMENT_MARGIN,
) -> tuple[GrayImage, EdgeMap, GroundTruth]:
    """Draw circles as rasterized contours and contaminate the edge map.

    The clean grayscale render keeps every contour pixel at 255 on black.
    Noise is symmetric salt-and-pepper: ``noise_density * width * height``
    background pixels flip to edges, and each contour pixel drops with the
    same probability.

    Raises:
        PlacementError: if a circle's center is closer than r + margin to a border.
    """
    if rng is None:
        rng = np.random.default_rng()
    if not 0 <= noise_density < 1:
        raise ValueError("noise_density must be in [0, 1)")
    circles = tuple(circles)
    for c in circles:
        if (c.x0 - c.r < margin or c.x0 + c.r > width - 1 - margin
                or c.y0 - c.r < margin or c.y0 + c.r > height - 1 - margin):
            raise PlacementError(f"{c} violates the {margin} px border margin")

    clean = np.zeros((height, width), dtype=bool)
    for c in circles:
        ts = rasterize_circle(c, width, height)
        pts = ts.points[ts.inside]
        clean[pts[:, 1], pts[:, 0]] = True

    noisy = clean.copy()
    if noise_density > 0:
        salt_n = round(noise_density * width * height)
        background = np.flatnonzero(~clean.ravel())
        salt = rng.choice(background, size=min(salt_n, len(background)), replace=False)
        noisy.ravel()[salt] = True
        ys, xs = np.nonzero(clean)
        drop = rng.random(len(xs)) < noise_density
        noisy[ys[drop], xs[drop]] = False

    image = GrayImage(np.where(clean, 255, 0).astype(np.uint8))
    return image, EdgeMap(noisy), GroundTruth(circles, width, height)


@dataclass(frozen=True)
class BenchRow:
    image: str
    runs: int
    mean_time_s: float
    std_time_s: float
    success_rate_pct: float
    mean_es: float
    std_es: float


CSV_HEADER = "image,runs,mean_time_s,std_time_s,success_rate_pct,mean_es,std_es"


@dataclass(frozen=True)
class BenchReport:
    rows: tuple[BenchRow, ...]

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(self.rows))

    def to_csv(self) -> str:
        lines = [CSV_HEADER]
        for r in self.rows:
            lines.append(
                f"{r.image},{r.runs},{r.mean_time_s!r},{r.std_time_s!r},"
                f"{r.success_rate_pct!r},{r.mean_es!r},{r.std_es!r}"
            )
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        return json.dumps({"rows": [vars(r) for r in self.rows]}, indent=2) + "\n"

    def strip_timing(self) -> "BenchReport":
        """Zero the measured-time columns for byte-reproducible output."""
        return BenchReport(tuple(replace(r, mean_time_s=0.0, std_time_s=0.0)
                                 for r in self.rows))


def run_benchmark(
    suite, runs: int, cfg: DetectorConfig, seeds, names=None,
) -> BenchReport:
    """Run seeded detections over a suite of (EdgeMap, GroundTruth) pairs.

    Each image gets ``runs`` detections, one per seed; images with several
    ground-truth circles run the multi-circle detector sized to the truth.
    Detections are matched greedily to their nearest truth circle by error
    score. A run succeeds when every truth circle is matched below 1;
    ``mean_es``/``std_es`` aggregate the matched scores (population std,
    a single run reports 0).
    """
    suite = list(suite)
    seeds = list(seeds)
    if runs < 1:
        raise ValueError("runs must be at least 1")
    if len(seeds) < runs:
        raise ValueError(f"need {runs} seeds, got {len(seeds)}")
    seeds = seeds[:runs]
    if len(set(seeds)) != runs:
        raise ValueError("seeds must be distinct, one per run")
    if names is None:
        names = [f"image_{i}" for i in range(len(suite))]

    rows = []
    for name, (edges, truth) in zip(names, suite):
        times, run_es, successes = [], [], 0
        n_truth = len(truth.circles)
        per_image_cfg = replace(cfg, max_circles=n_truth)
        for seed in seeds:
            rng = np.random.default_rng(seed)
            start = time.perf_counter()
            try:
                if n_truth == 1:
                    found = [detect_circle(edges, per_image_cfg, rng)]
                else:
                    found = detect_multiple(edges, per_image_cfg, rng)
            except InsufficientEdgesError:
                found = []
            times.append(time.perf_counter() - start)
            detected = [d.circle for d in found if d.circle is not None]
            pairs = greedy_match(truth.circles, detected)
            scores = [error_score(truth.circles[ti], detected[di]) for ti, di in pairs]
            if len(pairs) == n_truth and all(is_success(s) for s in scores):
                successes += 1
            run_es.extend(scores)
        rows.append(BenchRow(
            image=name,
            runs=runs,
            mean_time_s=float(np.mean(times)),
            std_time_s=float(np.std(times)),
            success_rate_pct=100.0 * successes / runs,
            mean_es=float(np.mean(run_es)) if run_es else math.nan,
            std_es=float(np.std(run_es)) if run_es else math.nan,
        ))
    return BenchReport(tuple(rows))
