"""Grayscale images, binary edge maps, and the built-in edge detector.

An edge map carries both the boolean raster and the flattened list of edge
coordinates in row-major scan order; that ordering is what makes integer
candidate triplets reproducible across runs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import ndimage

from . import netpbm
from .errors import NetpbmError

PNG_MAGIC = b"\x89PNG\r\n\x1a\n"


@dataclass(frozen=True)
class GrayImage:
    """A grayscale raster with intensities in [0, 255]."""

    pixels: np.ndarray  # (height, width) uint8

    def __post_init__(self):
        arr = np.asarray(self.pixels)
        if arr.ndim != 2 or arr.size == 0:
            raise ValueError(f"expected a non-empty 2-D raster, got shape {arr.shape}")
        arr = np.ascontiguousarray(arr, dtype=np.uint8)
        arr.setflags(write=False)
        object.__setattr__(self, "pixels", arr)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


@dataclass(frozen=True)
class EdgeMap:
    """Binary edge raster plus its edge points enumerated row-major.

    ``points[k] = (x, y)`` with x = column, y = row, origin top-left.
    Candidate triplets index into ``points`` 1-based.
    """

    mask: np.ndarray            # (height, width) bool
    points: np.ndarray = field(default=None)  # type: ignore[assignment]  # (N, 2) int64

    def __post_init__(self):
        mask = np.ascontiguousarray(self.mask, dtype=bool)
        if mask.ndim != 2 or mask.size == 0:
            raise ValueError(f"expected a non-empty 2-D mask, got shape {mask.shape}")
        if self.points is None:
            ys, xs = np.nonzero(mask)  # C order == row-major scan
            points = np.column_stack([xs, ys]).astype(np.int64)
        else:
            points = np.ascontiguousarray(self.points, dtype=np.int64).reshape(-1, 2)
            if len(points) != int(mask.sum()):
                raise ValueError("points array inconsistent with mask")
            if len(points) and not mask[points[:, 1], points[:, 0]].all():
                raise ValueError("points array lists a non-edge pixel")
        mask.setflags(write=False)
        points.setflags(write=False)
        object.__setattr__(self, "mask", mask)
        object.__setattr__(self, "points", points)

    @property
    def width(self) -> int:
        return self.mask.shape[1]

    @property
    def height(self) -> int:
        return self.mask.shape[0]

    @property
    def num_points(self) -> int:
        """Np, the size of the candidate index space."""
        return len(self.points)


@dataclass(frozen=True)
class CannyParams:
    """Edge-detector knobs; thresholds are fractions of the max gradient."""

    gaussian_sigma: float = 1.4
    low_threshold: float = 0.1
    high_threshold: float = 0.3

    def __post_init__(self):
        if self.gaussian_sigma <= 0:
            raise ValueError("gaussian_sigma must be positive")
        if not 0 <= self.low_threshold <= self.high_threshold <= 1:
            raise ValueError("need 0 <= low_threshold <= high_threshold <= 1")


def load_gray_image(path: str | Path) -> GrayImage:
    """Load a grayscale image from PGM (P2/P5) or PNG."""
    return gray_image_from_bytes(Path(path).read_bytes())


def gray_image_from_bytes(data: bytes) -> GrayImage:
    if data[:2] in netpbm.GRAY_MAGICS:
        return GrayImage(netpbm.decode_gray(data))
    if data[:8] == PNG_MAGIC:
        return GrayImage(_decode_png(data))
    raise NetpbmError(f"unsupported image format (magic {data[:2]!r})")


def _decode_png(data: bytes) -> np.ndarray:
    try:
        from PIL import Image
    except ImportError:
        raise NetpbmError("PNG input requires the optional pillow dependency") from None
    import io

    with Image.open(io.BytesIO(data)) as im:
        return np.asarray(im.convert("L"), dtype=np.uint8)


def load_edge_map(path: str | Path) -> EdgeMap:
    """Load an edge map from PBM (P1/P4) or a thresholded PGM (nonzero = edge)."""
    return edge_map_from_bytes(Path(path).read_bytes())


def edge_map_from_bytes(data: bytes) -> EdgeMap:
    if data[:2] in netpbm.BITMAP_MAGICS:
        return EdgeMap(netpbm.decode_bitmap(data))
    if data[:2] in netpbm.GRAY_MAGICS:
        return EdgeMap(netpbm.decode_gray(data) > 0)
    raise NetpbmError(f"unsupported edge-map format (magic {data[:2]!r})")


def save_gray_image(img: GrayImage, path: str | Path, binary: bool = True) -> None:
    Path(path).write_bytes(netpbm.encode_gray(img.pixels, binary=binary))


def save_edge_map(edges: EdgeMap, path: str | Path, binary: bool = True) -> None:
    Path(path).write_bytes(netpbm.encode_bitmap(edges.mask, binary=binary))


def canny_edges(img: GrayImage, params: CannyParams = CannyParams()) -> EdgeMap:
    """Detect single-pixel-wide edges.

    Gaussian smoothing, Sobel gradients, direction-quantized non-maximum
    suppression, then hysteresis thresholding with 8-connectivity. The
    low/high thresholds are relative to the maximum gradient magnitude.
    """
    smoothed = ndimage.gaussian_filter(img.pixels.astype(np.float64), params.gaussian_sigma)
    gx = ndimage.sobel(smoothed, axis=1)
    gy = ndimage.sobel(smoothed, axis=0)
    mag = np.hypot(gx, gy)
    peak = mag.max()
    if peak == 0:
        return EdgeMap(np.zeros_like(img.pixels, dtype=bool))

    thinned = _non_maximum_suppression(mag, gx, gy)
    strong = thinned >= params.high_threshold * peak
    weak = thinned >= params.low_threshold * peak
    if params.low_threshold == 0:
        weak &= thinned > 0
    labels, n = ndimage.label(weak, structure=np.ones((3, 3), dtype=int))
    if n == 0:
        return EdgeMap(np.zeros_like(weak))
    keep = np.zeros(n + 1, dtype=bool)
    keep[np.unique(labels[strong])] = True
    keep[0] = False
    return EdgeMap(keep[labels])


def _non_maximum_suppression(mag: np.ndarray, gx: np.ndarray, gy: np.ndarray) -> np.ndarray:
    """Keep pixels that are local maxima along the quantized gradient direction.

    Plateaus of equal magnitude are broken with a >= / > pair so that a
    two-wide ridge thins to exactly one pixel.
    """
    h, w = mag.shape
    padded = np.pad(mag, 1, mode="constant")

    def shifted(dx: int, dy: int) -> np.ndarray:
        return padded[1 + dy:1 + dy + h, 1 + dx:1 + dx + w]

    angle = np.rad2deg(np.arctan2(gy, gx)) % 180.0
    fwd = np.empty_like(mag)
    bwd = np.empty_like(mag)
    for lo, hi, (dx, dy) in (
        (0.0, 22.5, (1, 0)),
        (22.5, 67.5, (1, 1)),
        (67.5, 112.5, (0, 1)),
        (112.5, 157.5, (-1, 1)),
        (157.5, 180.1, (1, 0)),
    ):
        sel = (angle >= lo) & (angle < hi)
        fwd[sel] = shifted(dx, dy)[sel]
        bwd[sel] = shifted(-dx, -dy)[sel]

    keep = (mag > fwd) & (mag >= bwd) & (mag > 0)
    keep[0, :] = keep[-1, :] = False
    keep[:, 0] = keep[:, -1] = False
    out = np.where(keep, mag, 0.0)
    return out
