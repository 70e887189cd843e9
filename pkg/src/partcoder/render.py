"""Receptive-field tile images and binary PGM output.

One tile per unit (one row of the weight matrix), laid out row-major on a
gray-gap grid. Symmetric scaling follows the convention of rendering learned
filters: weights are clipped to [-1, 1] and mapped linearly to [0, 255], so
w <= -1 is black, w >= +1 is white, and w = 0 is the fixed mid-gray 128.
"""

import enum
from dataclasses import dataclass

import numpy as np

from .errors import DataError, ShapeError

GAP_GRAY = 128
MID_GRAY = 128


class Scaling(enum.Enum):
    SYMMETRIC_UNIT = "symmetric-unit"
    MIN_MAX = "min-max"


@dataclass(frozen=True)
class TileGrid:
    rows: int
    cols: int
    tile_h: int
    tile_w: int
    gap: int = 1
    scaling: Scaling = Scaling.SYMMETRIC_UNIT

    def __post_init__(self):
        if min(self.rows, self.cols, self.tile_h, self.tile_w) < 1 or self.gap < 0:
            raise ValueError("grid dimensions must be positive, gap nonnegative")


def square_grid(n_fields, tile_h, tile_w, gap=1, scaling=Scaling.SYMMETRIC_UNIT):
    """Smallest near-square grid that fits n_fields tiles."""
    cols = int(np.ceil(np.sqrt(n_fields)))
    rows = int(np.ceil(n_fields / cols))
    return TileGrid(rows=rows, cols=cols, tile_h=tile_h, tile_w=tile_w,
                    gap=gap, scaling=scaling)


def _to_bytes_symmetric(field):
    # round half up so 0 maps to exactly 128
    return np.floor(np.clip(field, -1.0, 1.0) * 127.5 + 128.0).clip(0, 255)


def _to_bytes_minmax(field, lo, hi):
    if hi <= lo:
        return np.full(field.shape, float(MID_GRAY))
    return np.floor((field - lo) / (hi - lo) * 255.0 + 0.5).clip(0, 255)


def render_receptive_fields(W, grid):
    """Render each row of W as one grayscale tile; returns a uint8 image.

    Image size is rows*tile_h + (rows-1)*gap by the analogous width. MIN_MAX
    scaling uses the global min/max of W.
    """
    W = np.asarray(W, dtype=np.float64)
    if W.ndim != 2:
        raise ShapeError("weight matrix must be 2-d")
    n_fields, field_len = W.shape
    if field_len != grid.tile_h * grid.tile_w:
        raise ShapeError(
            f"fields of length {field_len} do not tile "
            f"{grid.tile_h}x{grid.tile_w}"
        )
    if grid.rows * grid.cols < n_fields:
        raise ValueError(
            f"grid {grid.rows}x{grid.cols} cannot hold {n_fields} fields"
        )

    height = grid.rows * grid.tile_h + (grid.rows - 1) * grid.gap
    width = grid.cols * grid.tile_w + (grid.cols - 1) * grid.gap
    image = np.full((height, width), GAP_GRAY, dtype=np.uint8)

    lo, hi = (W.min(), W.max()) if W.size else (0.0, 0.0)
    for idx in range(n_fields):
        tile = W[idx].reshape(grid.tile_h, grid.tile_w)
        if grid.scaling is Scaling.SYMMETRIC_UNIT:
            pix = _to_bytes_symmetric(tile)
        else:
            pix = _to_bytes_minmax(tile, lo, hi)
        r = idx // grid.cols
        c = idx % grid.cols
        top = r * (grid.tile_h + grid.gap)
        left = c * (grid.tile_w + grid.gap)
        image[top:top + grid.tile_h, left:left + grid.tile_w] = \
            pix.astype(np.uint8)
    return image


def write_pgm(image, path):
    """Binary PGM (P5), maxval 255: header line, dims line, maxval line,
    then raw bytes."""
    image = np.asarray(image)
    if image.ndim != 2:
        raise ShapeError("PGM images must be 2-d")
    if image.dtype != np.uint8:
        image = image.clip(0, 255).astype(np.uint8)
    h, w = image.shape
    with open(path, "wb") as fh:
        fh.write(b"P5\n%d %d\n255\n" % (w, h))
        fh.write(image.tobytes())


def read_pgm(path):
    """Minimal P5 reader (round-trip checks and CLI inspection)."""
    with open(path, "rb") as fh:
        data = fh.read()
    parts = data.split(b"\n", 3)
    if len(parts) != 4 or parts[0] != b"P5":
        raise DataError(f"{path}: not a binary PGM written by this package")
    try:
        w, h = (int(t) for t in parts[1].split())
        maxval = int(parts[2])
    except ValueError:
        raise DataError(f"{path}: malformed PGM header")
    if maxval != 255:
        raise DataError(f"{path}: unsupported maxval {maxval}")
    raw = parts[3]
    if len(raw) != w * h:
        raise DataError(f"{path}: payload is {len(raw)} bytes, expected {w * h}")
    return np.frombuffer(raw, dtype=np.uint8).reshape(h, w)
