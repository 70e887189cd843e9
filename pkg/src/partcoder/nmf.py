"""Nonnegative matrix factorization baseline via multiplicative updates.

Data samples are columns of V (n features x m samples), the conventional NMF
orientation; conversion from row-sample datasets happens at the call
boundary. Held-out data is encoded with the basis frozen, running only the
H update (no re-fit).
"""

from dataclasses import dataclass

import numpy as np

from .autoencoder import reconstruction_cost
from .errors import ShapeError

_EPS = 1e-9  # denominator guard at degenerate iterates


@dataclass(frozen=True)
class NmfModel:
    W: np.ndarray  # (n, rank) basis, columns are basis images
    H: np.ndarray  # (rank, m) encodings
    rank: int

    def __post_init__(self):
        object.__setattr__(self, "W", np.ascontiguousarray(self.W, dtype=np.float64))
        object.__setattr__(self, "H", np.ascontiguousarray(self.H, dtype=np.float64))
        if self.W.shape[1] != self.rank or self.H.shape[0] != self.rank:
            raise ShapeError("W columns and H rows must equal the rank")
        if self.W.min() < 0.0 or self.H.min() < 0.0:
            raise ValueError("NMF factors must be nonnegative")


def _frobenius_half(V, W, H):
    R = V - W @ H
    return 0.5 * float(np.sum(R * R))


def _check_nonneg(V):
    V = np.asarray(V, dtype=np.float64)
    if V.size and V.min() < 0.0:
        raise ValueError("NMF input must be nonnegative")
    return V


def nmf_factorize(V, rank, iterations=200, seed=0):
    """Factor V ~ W H with alternating multiplicative updates.

    Init is uniform random in (0, 1], seeded. Returns (NmfModel, trace) where
    trace[i] is the half-Frobenius objective after i update sweeps; the trace
    never increases.
    """
    V = _check_nonneg(V)
    n, m = V.shape
    if rank > min(n, m):
        raise ValueError(f"rank {rank} exceeds min(n, m) = {min(n, m)}")
    rng = np.random.default_rng(seed)
    W = 1.0 - rng.random((n, rank))
    H = 1.0 - rng.random((rank, m))

    trace = [_frobenius_half(V, W, H)]
    for _ in range(iterations):
        H *= (W.T @ V) / (W.T @ W @ H + _EPS)
        W *= (V @ H.T) / (W @ H @ H.T + _EPS)
        trace.append(_frobenius_half(V, W, H))
    return NmfModel(W=W, H=H, rank=rank), trace


def nmf_encode(W, V_test, iterations=500, tol=1e-9, seed=0):
    """Encode held-out columns against a frozen basis.

    Runs only the multiplicative H update until the relative objective change
    drops below tol or the iteration cap; nonnegativity is preserved by the
    update itself.
    """
    W = _check_nonneg(W)
    V_test = _check_nonneg(V_test)
    if V_test.shape[0] != W.shape[0]:
        raise ShapeError("test columns must have the basis' feature dimension")
    rng = np.random.default_rng(seed)
    H = 1.0 - rng.random((W.shape[1], V_test.shape[1]))

    WtV = W.T @ V_test
    WtW = W.T @ W
    prev = _frobenius_half(V_test, W, H)
    for _ in range(iterations):
        H *= WtV / (WtW @ H + _EPS)
        cur = _frobenius_half(V_test, W, H)
        if abs(prev - cur) <= tol * max(1.0, abs(prev)):
            break
        prev = cur
    return H


def nmf_reconstruction_error(model, V):
    """Per-sample-mean squared error of W H against V, comparable with the
    autoencoder's reconstruction cost (samples as rows there, columns here)."""
    V = np.asarray(V, dtype=np.float64)
    WH = model.W @ model.H
    if WH.shape != V.shape:
        raise ShapeError(f"model reconstructs {WH.shape}, data is {V.shape}")
    return reconstruction_cost(V.T, WH.T)
