"""Versioned binary containers for trained models.

Layout (all integers unsigned 32-bit little-endian, all floats 64-bit
little-endian, matrices row-major):

Autoencoder container, tag "PCAE0001":
    tag[8] | n_visible u32 | n_hidden u32
    | matrix w1 (hidden x n) | matrix b1 (hidden x 1)
    | matrix w2 (n x hidden) | matrix b2 (n x 1)

Deep-network container, tag "PCDN0001":
    tag[8] | layer_count u32 | class_count u32 | sizes u32[layer_count + 1]
    | per layer: matrix w (s_l x s_{l-1}) | matrix b (s_l x 1)
    | matrix softmax_w (s_L x class_count)      (omitted when class_count = 0)

NMF container, tag "PCNM0001":
    tag[8] | rank u32 | matrix W (n x rank) | matrix H (rank x m)

Every matrix is framed as: rows u32 | cols u32 | float64[rows * cols].
"""

import struct

import numpy as np

from .autoencoder import AutoencoderParams
from .deepnet import DeepNetwork, EncoderLayer
from .errors import DataError
from .nmf import NmfModel

AE_TAG = b"PCAE0001"
DEEP_TAG = b"PCDN0001"
NMF_TAG = b"PCNM0001"


def _write_matrix(fh, arr):
    arr = np.ascontiguousarray(arr, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    rows, cols = arr.shape
    fh.write(struct.pack("<II", rows, cols))
    fh.write(arr.astype("<f8").tobytes())


def _read_exact(fh, count, path, what):
    data = fh.read(count)
    if len(data) != count:
        raise DataError(f"{path}: truncated model file while reading {what}")
    return data


def _read_matrix(fh, path, what):
    rows, cols = struct.unpack("<II", _read_exact(fh, 8, path, f"{what} dims"))
    raw = _read_exact(fh, 8 * rows * cols, path, f"{what} values")
    return np.frombuffer(raw, dtype="<f8").reshape(rows, cols).astype(np.float64)


def save_autoencoder(params, path):
    with open(path, "wb") as fh:
        fh.write(AE_TAG)
        fh.write(struct.pack("<II", params.n_visible, params.n_hidden))
        _write_matrix(fh, params.w1)
        _write_matrix(fh, params.b1)
        _write_matrix(fh, params.w2)
        _write_matrix(fh, params.b2)


def load_autoencoder(path):
    with open(path, "rb") as fh:
        tag = _read_exact(fh, 8, path, "tag")
        if tag != AE_TAG:
            raise DataError(f"{path}: unknown format tag {tag!r}")
        n, hidden = struct.unpack("<II", _read_exact(fh, 8, path, "sizes"))
        w1 = _read_matrix(fh, path, "w1")
        b1 = _read_matrix(fh, path, "b1")
        w2 = _read_matrix(fh, path, "w2")
        b2 = _read_matrix(fh, path, "b2")
    if w1.shape != (hidden, n) or w2.shape != (n, hidden):
        raise DataError(f"{path}: matrix shapes disagree with the header")
    return AutoencoderParams(w1=w1, b1=b1.reshape(-1), w2=w2, b2=b2.reshape(-1))


def save_deepnet(net, path):
    sizes = net.layer_sizes
    with open(path, "wb") as fh:
        fh.write(DEEP_TAG)
        fh.write(struct.pack("<II", len(net.encoders), net.class_count))
        fh.write(struct.pack(f"<{len(sizes)}I", *sizes))
        for layer in net.encoders:
            _write_matrix(fh, layer.w)
            _write_matrix(fh, layer.b)
        if net.class_count:
            _write_matrix(fh, net.softmax_w)


def load_deepnet(path):
    with open(path, "rb") as fh:
        tag = _read_exact(fh, 8, path, "tag")
        if tag != DEEP_TAG:
            raise DataError(f"{path}: unknown format tag {tag!r}")
        n_layers, k = struct.unpack("<II", _read_exact(fh, 8, path, "counts"))
        sizes = struct.unpack(
            f"<{n_layers + 1}I", _read_exact(fh, 4 * (n_layers + 1), path, "sizes")
        )
        encoders = []
        for i in range(n_layers):
            w = _read_matrix(fh, path, f"layer {i} weights")
            b = _read_matrix(fh, path, f"layer {i} bias")
            if w.shape != (sizes[i + 1], sizes[i]):
                raise DataError(f"{path}: layer {i} shape disagrees with header")
            encoders.append(EncoderLayer(w=w, b=b.reshape(-1)))
        softmax_w = _read_matrix(fh, path, "softmax weights") if k else None
    return DeepNetwork(encoders=tuple(encoders), softmax_w=softmax_w,
                       class_count=k)


def save_nmf(model, path):
    with open(path, "wb") as fh:
        fh.write(NMF_TAG)
        fh.write(struct.pack("<I", model.rank))
        _write_matrix(fh, model.W)
        _write_matrix(fh, model.H)


def load_nmf(path):
    with open(path, "rb") as fh:
        tag = _read_exact(fh, 8, path, "tag")
        if tag != NMF_TAG:
            raise DataError(f"{path}: unknown format tag {tag!r}")
        (rank,) = struct.unpack("<I", _read_exact(fh, 4, path, "rank"))
        W = _read_matrix(fh, path, "basis")
        H = _read_matrix(fh, path, "encodings")
    return NmfModel(W=W, H=H, rank=rank)
