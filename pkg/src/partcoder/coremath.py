"""Dense array primitives shared by every objective and the optimizer.

All model math runs on float64 numpy arrays with explicit row/column
semantics. This module owns the one canonical flat-parameter ordering
(segments serialized row-major, in declaration order) so the objectives and
the optimizer can never disagree about where a weight lives.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ShapeError
from .kernels import sigmoid

__all__ = ["sigmoid", "ParamLayout", "flatten", "unflatten"]


@dataclass(frozen=True)
class ParamLayout:
    """Ordered mapping between named arrays and one flat parameter vector.

    segments: tuple of (name, shape) pairs; shape is the exact array shape,
    e.g. (rows, cols) for a weight matrix or (n,) for a bias vector.
    """

    segments: tuple

    def __post_init__(self):
        names = [name for name, _ in self.segments]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate segment names in layout: {names}")
        for name, shape in self.segments:
            if any(int(d) <= 0 for d in shape):
                raise ValueError(f"segment {name!r} has non-positive dimension {shape}")

    @property
    def total_size(self):
        return sum(int(np.prod(shape)) for _, shape in self.segments)

    def boundaries(self):
        """Cumulative end offset of each segment in the flat vector."""
        offsets = []
        total = 0
        for _, shape in self.segments:
            total += int(np.prod(shape))
            offsets.append(total)
        return offsets


def flatten(params, layout):
    """Serialize named arrays into one flat vector in layout order, row-major.

    params: mapping name -> array. Raises ShapeError naming the first segment
    whose array shape disagrees with the layout.
    """
    pieces = []
    for name, shape in layout.segments:
        if name not in params:
            raise ShapeError(f"segment {name!r} missing from params")
        arr = np.asarray(params[name], dtype=np.float64)
        if arr.shape != tuple(shape):
            raise ShapeError(
                f"segment {name!r}: expected shape {tuple(shape)}, got {arr.shape}"
            )
        pieces.append(arr.reshape(-1))
    return np.concatenate(pieces) if pieces else np.empty(0)


def unflatten(v, layout):
    """Inverse of flatten: split a flat vector back into named arrays."""
    v = np.asarray(v, dtype=np.float64).reshape(-1)
    if v.size != layout.total_size:
        raise ShapeError(
            f"flat vector has length {v.size}, layout expects {layout.total_size}"
        )
    out = {}
    start = 0
    for name, shape in layout.segments:
        size = int(np.prod(shape))
        out[name] = v[start : start + size].reshape(shape).copy()
        start += size
    return out
