"""Netpbm codecs: PGM (P2/P5) grayscale and PBM (P1/P4) bitmap, bytes <-> numpy.

Decoders accept the full header grammar (whitespace-separated tokens,
``#`` comments anywhere in the header). PGM samples are rescaled to
[0, 255] with round-half-up integer arithmetic, so 16-bit files decode
deterministically. Encoders emit canonical headers so that an
encode/decode round trip is bit-exact.
"""

from __future__ import annotations

import re

import numpy as np

from .errors import NetpbmError

GRAY_MAGICS = (b"P2", b"P5")
BITMAP_MAGICS = (b"P1", b"P4")


class _Scanner:
    """Tokenizer over a netpbm header (handles whitespace and comments)."""

    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def _skip_filler(self) -> None:
        while self.pos < len(self.data):
            c = self.data[self.pos]
            if c in b" \t\r\n\x0b\x0c":
                self.pos += 1
            elif c in b"#":
                nl = self.data.find(b"\n", self.pos)
                self.pos = len(self.data) if nl < 0 else nl + 1
            else:
                return

    def token(self) -> bytes:
        self._skip_filler()
        start = self.pos
        while self.pos < len(self.data) and self.data[self.pos] not in b" \t\r\n\x0b\x0c#":
            self.pos += 1
        if self.pos == start:
            raise NetpbmError("truncated header")
        return self.data[start:self.pos]

    def int_token(self, what: str) -> int:
        tok = self.token()
        try:
            return int(tok)
        except ValueError:
            raise NetpbmError(f"expected integer {what}, got {tok!r}") from None

    def raster_start(self) -> int:
        """Binary rasters begin after exactly one whitespace byte."""
        if self.pos >= len(self.data) or self.data[self.pos] not in b" \t\r\n\x0b\x0c":
            raise NetpbmError("missing whitespace before binary raster")
        return self.pos + 1


def _rescale_to_u8(samples: np.ndarray, maxval: int) -> np.ndarray:
    if maxval == 255:
        return samples.astype(np.uint8)
    # round-half-up of v*255/maxval, exact in int64
    v = samples.astype(np.int64)
    return ((2 * v * 255 + maxval) // (2 * maxval)).astype(np.uint8)


def decode_gray(data: bytes) -> np.ndarray:
    """Decode PGM bytes to a (height, width) uint8 array in [0, 255]."""
    magic = data[:2]
    if magic not in GRAY_MAGICS:
        raise NetpbmError(f"not a PGM file (magic {magic!r})")
    sc = _Scanner(data)
    sc.token()  # magic
    width = sc.int_token("width")
    height = sc.int_token("height")
    maxval = sc.int_token("maxval")
    if width < 1 or height < 1:
        raise NetpbmError(f"bad dimensions {width}x{height}")
    if not 0 < maxval < 65536:
        raise NetpbmError(f"bad maxval {maxval}")
    n = width * height
    if magic == b"P2":
        raster = data[sc.pos:]
        if b"#" in raster:
            raster = re.sub(rb"#[^\n]*", b" ", raster)
        tokens = raster.split()
        if len(tokens) < n:
            raise NetpbmError("raster shorter than width*height")
        try:
            flat = np.asarray([int(t) for t in tokens[:n]], dtype=np.int64)
        except ValueError:
            raise NetpbmError("non-integer sample in P2 raster") from None
    else:
        start = sc.raster_start()
        itemsize = 1 if maxval < 256 else 2
        raw = data[start:start + n * itemsize]
        if len(raw) < n * itemsize:
            raise NetpbmError("raster shorter than width*height")
        dtype = np.uint8 if itemsize == 1 else np.dtype(">u2")
        flat = np.frombuffer(raw, dtype=dtype).astype(np.int64)
    if flat.min() < 0 or flat.max() > maxval:
        raise NetpbmError("sample value outside [0, maxval]")
    return _rescale_to_u8(flat, maxval).reshape(height, width)


def decode_bitmap(data: bytes) -> np.ndarray:
    """Decode PBM bytes to a (height, width) bool array (1 bit -> True)."""
    magic = data[:2]
    if magic not in BITMAP_MAGICS:
        raise NetpbmError(f"not a PBM file (magic {magic!r})")
    sc = _Scanner(data)
    sc.token()  # magic
    width = sc.int_token("width")
    height = sc.int_token("height")
    if width < 1 or height < 1:
        raise NetpbmError(f"bad dimensions {width}x{height}")
    if magic == b"P1":
        bits = []
        pos = sc.pos
        while pos < len(data) and len(bits) < width * height:
            c = data[pos]
            if c in b"01":
                bits.append(c == 0x31)
            elif c in b"#":
                nl = data.find(b"\n", pos)
                pos = len(data) if nl < 0 else nl
            elif c not in b" \t\r\n\x0b\x0c":
                raise NetpbmError(f"unexpected byte {bytes([c])!r} in P1 raster")
            pos += 1
        if len(bits) < width * height:
            raise NetpbmError("raster shorter than width*height")
        return np.asarray(bits, dtype=bool).reshape(height, width)
    start = sc.raster_start()
    row_bytes = (width + 7) // 8
    raw = data[start:start + row_bytes * height]
    if len(raw) < row_bytes * height:
        raise NetpbmError("raster shorter than width*height")
    rows = np.frombuffer(raw, dtype=np.uint8).reshape(height, row_bytes)
    bits = np.unpackbits(rows, axis=1)[:, :width]
    return bits.astype(bool)


def encode_gray(pixels: np.ndarray, binary: bool = True) -> bytes:
    """Encode a (height, width) uint8 array as PGM (P5, or P2 if not binary)."""
    arr = np.ascontiguousarray(pixels, dtype=np.uint8)
    height, width = arr.shape
    if binary:
        return b"P5\n%d %d\n255\n" % (width, height) + arr.tobytes()
    body = "\n".join(" ".join(str(v) for v in row) for row in arr.tolist())
    return ("P2\n%d %d\n255\n%s\n" % (width, height, body)).encode("ascii")


def encode_bitmap(mask: np.ndarray, binary: bool = True) -> bytes:
    """Encode a (height, width) bool array as PBM (P4, or P1 if not binary)."""
    arr = np.ascontiguousarray(mask, dtype=bool)
    height, width = arr.shape
    if binary:
        packed = np.packbits(arr.astype(np.uint8), axis=1)
        return b"P4\n%d %d\n" % (width, height) + packed.tobytes()
    body = "\n".join(" ".join("1" if v else "0" for v in row) for row in arr.tolist())
    return ("P1\n%d %d\n%s\n" % (width, height, body)).encode("ascii")
