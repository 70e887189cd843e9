"""Image dataset ingestion: MNIST-style IDX binaries and generic numeric CSV,
plus seeded train/test splitting.

IDX files are big-endian: a 32-bit magic (2051 for images with 3 dims, 2049
for labels with 1 dim) followed by 32-bit dimension sizes and raw unsigned
bytes. Loaded pixel values are scaled into [0, 1] by 255.
"""

import struct
import warnings

import numpy as np

from .autoencoder import Dataset
from .errors import DataError

IMAGE_MAGIC = 2051
LABEL_MAGIC = 2049

# dims whose byte product exceeds this cannot be a sane IDX payload
_MAX_PAYLOAD = 1 << 40


def _read_exact(fh, count, path, what):
    data = fh.read(count)
    if len(data) != count:
        raise DataError(
            f"{path}: truncated file, expected {count} bytes for {what}, "
            f"got {len(data)}"
        )
    return data


def _read_header(fh, path, expected_magic, ndims):
    magic = struct.unpack(">i", _read_exact(fh, 4, path, "magic"))[0]
    if magic != expected_magic:
        raise DataError(f"{path}: bad magic {magic}, expected {expected_magic}")
    dims = struct.unpack(f">{ndims}i", _read_exact(fh, 4 * ndims, path, "dims"))
    if any(d < 0 for d in dims):
        raise DataError(f"{path}: negative dimension in header: {dims}")
    total = 1
    for d in dims:
        total *= d
    if total > _MAX_PAYLOAD:
        raise DataError(f"{path}: dimension product {total} overflows sane bounds")
    return dims, total


def load_idx_images(path):
    """Load an IDX image file into an (m, height*width) matrix in [0, 1]."""
    with open(path, "rb") as fh:
        (m, h, w), total = _read_header(fh, path, IMAGE_MAGIC, 3)
        raw = _read_exact(fh, total, path, "pixels")
    pixels = np.frombuffer(raw, dtype=np.uint8).astype(np.float64) / 255.0
    return pixels.reshape(m, h * w)


def load_idx_labels(path):
    """Load an IDX label file into an integer vector (one byte per label)."""
    with open(path, "rb") as fh:
        (m,), total = _read_header(fh, path, LABEL_MAGIC, 1)
        raw = _read_exact(fh, total, path, "labels")
    return np.frombuffer(raw, dtype=np.uint8).astype(np.int64)


def write_idx_images(X, height, width, path):
    """Write a [0, 1] matrix back to IDX bytes (values scaled by 255,
    rounded). Round-trips exactly for data that originated from bytes."""
    X = np.asarray(X, dtype=np.float64)
    m = X.shape[0]
    if X.shape[1] != height * width:
        raise DataError(f"rows of length {X.shape[1]} do not tile {height}x{width}")
    payload = np.rint(X * 255.0).clip(0, 255).astype(np.uint8)
    with open(path, "wb") as fh:
        fh.write(struct.pack(">iiii", IMAGE_MAGIC, m, height, width))
        fh.write(payload.tobytes())


def write_idx_labels(labels, path):
    labels = np.asarray(labels, dtype=np.int64)
    if labels.size and (labels.min() < 0 or labels.max() > 255):
        raise DataError("IDX labels must fit in one byte")
    with open(path, "wb") as fh:
        fh.write(struct.pack(">ii", LABEL_MAGIC, labels.size))
        fh.write(labels.astype(np.uint8).tobytes())


def load_idx_dataset(image_path, label_path=None):
    """Load images plus optional labels, checking their counts agree."""
    X = load_idx_images(image_path)
    labels = None
    if label_path is not None:
        labels = load_idx_labels(label_path)
        if labels.shape[0] != X.shape[0]:
            raise DataError(
                f"{label_path}: {labels.shape[0]} labels for {X.shape[0]} images"
            )
    return Dataset(X=X, labels=labels)


def load_csv_matrix(path, has_label_column=False):
    """Load a rectangular numeric CSV into a Dataset.

    A non-numeric first row is treated as a header and skipped. When
    has_label_column, the last column is consumed as integer labels. Features
    outside [0, 1] are clamped with a warning.
    """
    rows = []
    width = None
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            cells = line.split(",")
            try:
                values = [float(c) for c in cells]
            except ValueError:
                if lineno == 1 and not rows:
                    continue  # header row
                raise DataError(f"{path}: non-numeric cell at row {lineno}")
            if width is None:
                width = len(values)
            elif len(values) != width:
                raise DataError(
                    f"{path}: ragged row {lineno}: {len(values)} cells, "
                    f"expected {width}"
                )
            rows.append(values)
    if not rows:
        raise DataError(f"{path}: no data rows")

    data = np.asarray(rows, dtype=np.float64)
    labels = None
    if has_label_column:
        if data.shape[1] < 2:
            raise DataError(f"{path}: need at least one feature column plus labels")
        labels = data[:, -1].astype(np.int64)
        data = data[:, :-1]
    clipped = np.clip(data, 0.0, 1.0)
    if not np.array_equal(clipped, data):
        warnings.warn(f"{path}: features outside [0, 1] were clamped")
    return Dataset(X=clipped, labels=labels)


def split(data, train_fraction, seed):
    """Seeded shuffle then partition; label alignment is preserved."""
    if not (0.0 < train_fraction < 1.0):
        raise ValueError("train_fraction must lie strictly in (0, 1)")
    m = data.n_samples
    perm = np.random.default_rng(seed).permutation(m)
    n_train = int(np.floor(m * train_fraction + 0.5))
    train_idx, test_idx = perm[:n_train], perm[n_train:]

    def take(idx):
        labels = data.labels[idx] if data.labels is not None else None
        return Dataset(X=data.X[idx], labels=labels)

    return take(train_idx), take(test_idx)
