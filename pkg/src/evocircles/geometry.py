"""Circle geometry: exact three-point solving and midpoint rasterization.

Coordinates follow the raster convention used across the package:
x = column, y = row, origin at the top-left corner.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .edges import EdgeMap
from .errors import DegenerateError, IndexOutOfRangeError, RadiusTooSmallError


def round_half_away_from_zero(v: float) -> int:
    """Package-wide integer rounding rule (stable across platforms)."""
    return int(math.floor(v + 0.5)) if v >= 0 else int(math.ceil(v - 0.5))


@dataclass(frozen=True)
class Circle:
    """Continuous circle parameters in pixel units."""

    x0: float
    y0: float
    r: float

    def __post_init__(self):
        if not (math.isfinite(self.x0) and math.isfinite(self.y0) and math.isfinite(self.r)):
            raise ValueError("circle parameters must be finite")
        if self.r <= 0:
            raise ValueError(f"radius must be positive, got {self.r}")


@dataclass(frozen=True)
class TestPointSet:
    """Rasterized circumference points, including those outside the image.

    ``ns`` counts every generated point; points falling outside the image
    stay in the set but are flagged not-inside, so they can never score a
    hit while still diluting the hit ratio.
    """

    points: np.ndarray  # (ns, 2) int64, pairwise distinct
    inside: np.ndarray  # (ns,) bool

    def __post_init__(self):
        pts = np.ascontiguousarray(self.points, dtype=np.int64).reshape(-1, 2)
        ins = np.ascontiguousarray(self.inside, dtype=bool).reshape(-1)
        if len(pts) != len(ins):
            raise ValueError("points and inside flags differ in length")
        pts.setflags(write=False)
        ins.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "inside", ins)

    @property
    def ns(self) -> int:
        return len(self.points)


def circle_from_points(
    pi: tuple[int, int], pj: tuple[int, int], pk: tuple[int, int]
) -> Circle:
    """Solve the unique circle through three integer pixel coordinates.

    The center comes from the two perpendicular-bisector equations written
    as determinant quotients; the denominator is evaluated in exact integer
    arithmetic, so collinear or coincident points are detected exactly.

    Raises:
        DegenerateError: if the points are collinear or any two coincide.
    """
    xi, yi = int(pi[0]), int(pi[1])
    xj, yj = int(pj[0]), int(pj[1])
    xk, yk = int(pk[0]), int(pk[1])

    denom = 4 * ((xj - xi) * (yk - yi) - (xk - xi) * (yj - yi))
    if denom == 0:
        raise DegenerateError(f"collinear or coincident points {pi}, {pj}, {pk}")

    aj = xj * xj + yj * yj - (xi * xi + yi * yi)
    ak = xk * xk + yk * yk - (xi * xi + yi * yi)
    det_a = aj * 2 * (yk - yi) - ak * 2 * (yj - yi)
    det_b = 2 * (xj - xi) * ak - 2 * (xk - xi) * aj
    x0 = det_a / denom
    y0 = det_b / denom
    return Circle(x0, y0, math.hypot(x0 - xi, y0 - yi))


def candidate_to_circle(i: int, j: int, k: int, edges: EdgeMap) -> Circle:
    """Decode a 1-based index triplet into the circle through P[i], P[j], P[k].

    Raises:
        IndexOutOfRangeError: if any index lies outside [1, Np].
        DegenerateError: propagated from circle_from_points (an index used
            twice yields coincident points).
    """
    n = edges.num_points
    for idx in (i, j, k):
        if not 1 <= idx <= n:
            raise IndexOutOfRangeError(f"index {idx} outside [1, {n}]")
    p = edges.points
    return circle_from_points(tuple(p[i - 1]), tuple(p[j - 1]), tuple(p[k - 1]))


def _nearest_octant_x(r: int, t: int) -> int:
    """Exact nearest integer to sqrt(r^2 - t^2), for 0 <= t <= r.

    This is the column the midpoint walk selects in the first octant at
    height t; the half-integer tie can never occur for integer inputs.
    """
    q = r * r - t * t
    x = math.isqrt(q)
    return x + 1 if (2 * x + 1) ** 2 <= 4 * q else x


@lru_cache(maxsize=65536)
def mca_octant_height(r: int) -> int:
    """Largest height t still inside the first octant (t <= x(t))."""
    lo, hi = 0, r
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if mid <= _nearest_octant_x(r, mid):
            lo = mid
        else:
            hi = mid - 1
    return lo


def mca_point_count(r: int) -> int:
    """Size of the full 8-way midpoint raster, without materializing it.

    Each first-octant point reflects to 8 pixels, except the axis point
    (r, 0) and a diagonal point (t, t), whose orbits have 4.
    """
    if r < 1:
        raise RadiusTooSmallError(f"radius must be >= 1, got {r}")
    t_max = mca_octant_height(r)
    diagonal = 4 if _nearest_octant_x(r, t_max) == t_max else 0
    return 8 * (t_max + 1) - 4 - diagonal


def mca_columns_in_row(
    r: int, d: int, lo: int | None = None, hi: int | None = None
) -> list[int]:
    """Column offsets of the radius-r raster in the row at offset d from center.

    Optional [lo, hi] clipping bounds the work by the clip width, so a row
    of an arbitrarily large circle can be queried in O(log r + width).
    Returns sorted, distinct offsets.
    """
    ad = abs(d)
    if ad > r:
        return []
    t_max = mca_octant_height(r)
    cols: set[int] = set()

    def keep(c: int) -> bool:
        return (lo is None or c >= lo) and (hi is None or c <= hi)

    if ad <= t_max:
        x = _nearest_octant_x(r, ad)
        for c in (x, -x):
            if keep(c):
                cols.add(c)
    if ad >= _nearest_octant_x(r, t_max):
        # swapped-octant pixels: all heights t whose column x(t) equals ad;
        # x(t) is non-increasing, so they form one contiguous run
        a, b = 0, t_max + 1
        while a < b:
            mid = (a + b) // 2
            if _nearest_octant_x(r, mid) <= ad:
                b = mid
            else:
                a = mid + 1
        t_lo = a
        if t_lo <= t_max and _nearest_octant_x(r, t_lo) == ad:
            a, b = t_lo, t_max + 1
            while a < b:
                mid = (a + b) // 2
                if _nearest_octant_x(r, mid) < ad:
                    b = mid
                else:
                    a = mid + 1
            t_hi = a - 1
            for run_lo, run_hi in ((t_lo, t_hi), (-t_hi, -t_lo)):
                if lo is not None:
                    run_lo = max(run_lo, lo)
                if hi is not None:
                    run_hi = min(run_hi, hi)
                cols.update(range(run_lo, run_hi + 1))
    return sorted(cols)


def _octant_offsets(r: int) -> tuple[np.ndarray, np.ndarray]:
    """First-octant (x, t) offsets, vectorized and exact in integers."""
    t = np.arange(math.isqrt(r * r // 2) + 2, dtype=np.int64)
    q = r * r - t * t
    x = np.floor(np.sqrt(q.astype(np.float64))).astype(np.int64)
    # repair the float estimate to the exact floor square root
    x = np.where((x + 1) ** 2 <= q, x + 1, x)
    x = np.where(x * x > q, x - 1, x)
    x = np.where((2 * x + 1) ** 2 <= 4 * q, x + 1, x)  # floor -> nearest
    inside = t <= x
    return x[inside], t[inside]


@lru_cache(maxsize=512)
def _full_offsets_cached(r: int) -> np.ndarray:
    x, t = _octant_offsets(r)
    octants = np.concatenate([
        np.column_stack(pair)
        for pair in ((x, t), (-x, t), (x, -t), (-x, -t), (t, x), (-t, x), (t, -x), (-t, -x))
    ])
    arr = np.unique(octants, axis=0)
    arr.setflags(write=False)
    return arr


def _full_offsets(r: int) -> np.ndarray:
    """Deduplicated center-relative raster, cached for small radii."""
    if r <= 4096:
        return _full_offsets_cached(r)
    return _full_offsets_cached.__wrapped__(r)


def rasterize_circle(c: Circle, width: int, height: int) -> TestPointSet:
    """Rasterize a circle with the midpoint algorithm, 8-way symmetric.

    Center and radius are rounded to the nearest integers first. Duplicate
    reflections on the axes and diagonal are dropped; points are ordered
    lexicographically. Costs O(r) time and memory; the scoring path uses
    mca_point_count / mca_columns_in_row instead when r dwarfs the image.

    Raises:
        RadiusTooSmallError: if the radius rounds below 1.
    """
    cx = round_half_away_from_zero(c.x0)
    cy = round_half_away_from_zero(c.y0)
    r = round_half_away_from_zero(c.r)
    if r < 1:
        raise RadiusTooSmallError(f"radius {c.r} rounds to {r} < 1")

    arr = _full_offsets(r) + np.array([cx, cy], dtype=np.int64)
    inside = (arr[:, 0] >= 0) & (arr[:, 0] < width) & (arr[:, 1] >= 0) & (arr[:, 1] < height)
    return TestPointSet(arr, inside)
