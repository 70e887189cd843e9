"""Hot elementwise kernels with a numba fast path and a pure-numpy fallback.

Everything here is called inside the optimizer's objective loop, so these are
the routines worth fusing: the logistic map, the backprop chain product, the
asymmetric quadratic penalty, and plain squared sums. Matrix products are left
to numpy/BLAS.

Set PARTCODER_NUMBA=0 to force the numpy implementations (the selected backend
is reported in ``BACKEND``). Both paths compute identical formulas; the numba
path fuses loops and avoids temporaries.
"""

import os

import numpy as np


def _sigmoid_numpy(z):
    # exp only of the negative magnitude: no overflow for |z| up to inf
    out = np.empty_like(z)
    pos = z >= 0.0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _sigmoid_chain_numpy(err, h):
    return err * h * (1.0 - h)


def _neg_quad_penalty_numpy(w):
    neg = w[w < 0.0]
    return float(np.dot(neg, neg))


def _neg_quad_grad_numpy(w):
    return np.where(w < 0.0, w, 0.0)


def _sum_squares_numpy(w):
    return float(np.dot(w, w))


def _half_sq_diff_numpy(a, b):
    d = a - b
    return 0.5 * float(np.dot(d, d))


_USE_NUMBA = os.environ.get("PARTCODER_NUMBA", "1") != "0"
if _USE_NUMBA:
    try:
        from numba import njit
    except ImportError:
        _USE_NUMBA = False

if _USE_NUMBA:
    BACKEND = "numba"

    @njit(cache=True)
    def _sigmoid_flat(z):
        out = np.empty_like(z)
        for i in range(z.shape[0]):
            v = z[i]
            if v >= 0.0:
                out[i] = 1.0 / (1.0 + np.exp(-v))
            else:
                e = np.exp(v)
                out[i] = e / (1.0 + e)
        return out

    @njit(cache=True)
    def _sigmoid_chain_flat(err, h):
        out = np.empty_like(err)
        for i in range(err.shape[0]):
            out[i] = err[i] * h[i] * (1.0 - h[i])
        return out

    @njit(cache=True)
    def _neg_quad_penalty_flat(w):
        total = 0.0
        for i in range(w.shape[0]):
            if w[i] < 0.0:
                total += w[i] * w[i]
        return total

    @njit(cache=True)
    def _neg_quad_grad_flat(w):
        out = np.zeros_like(w)
        for i in range(w.shape[0]):
            if w[i] < 0.0:
                out[i] = w[i]
        return out

    # BLAS dot beats a scalar loop for plain squared sums; keep numpy there
    _sum_squares_flat = _sum_squares_numpy

    @njit(cache=True)
    def _half_sq_diff_flat(a, b):
        total = 0.0
        for i in range(a.shape[0]):
            d = a[i] - b[i]
            total += d * d
        return 0.5 * total

else:
    BACKEND = "numpy"
    _sigmoid_flat = _sigmoid_numpy
    _sigmoid_chain_flat = _sigmoid_chain_numpy
    _neg_quad_penalty_flat = _neg_quad_penalty_numpy
    _neg_quad_grad_flat = _neg_quad_grad_numpy
    _sum_squares_flat = _sum_squares_numpy
    _half_sq_diff_flat = _half_sq_diff_numpy


def _as_flat(x):
    a = np.ascontiguousarray(x, dtype=np.float64)
    return a, a.reshape(-1)


def sigmoid(x):
    """Elementwise logistic 1/(1+exp(-x)), stable for any finite input."""
    a, flat = _as_flat(x)
    return np.asarray(_sigmoid_flat(flat)).reshape(a.shape)


def sigmoid_chain(err, h):
    """Backprop chain term err * h * (1 - h), where h = sigmoid(preactivation)."""
    a, eflat = _as_flat(err)
    _, hflat = _as_flat(h)
    if eflat.shape != hflat.shape:
        raise ValueError("err and h must have the same size")
    return np.asarray(_sigmoid_chain_flat(eflat, hflat)).reshape(a.shape)


def negative_quadratic_penalty(w):
    """Sum of w_ij^2 over strictly negative entries (zero branch at w >= 0)."""
    _, flat = _as_flat(w)
    return float(_neg_quad_penalty_flat(flat))


def negative_quadratic_grad(w):
    """Elementwise derivative of the asymmetric penalty: w where w < 0, else 0."""
    a, flat = _as_flat(w)
    return np.asarray(_neg_quad_grad_flat(flat)).reshape(a.shape)


def sum_squares(w):
    """Sum of squared entries (weight-decay building block)."""
    _, flat = _as_flat(w)
    return float(_sum_squares_flat(flat))


def half_squared_difference(a, b):
    """0.5 * sum((a - b)^2) over all entries."""
    _, aflat = _as_flat(a)
    _, bflat = _as_flat(b)
    if aflat.shape != bflat.shape:
        raise ValueError("a and b must have the same size")
    return float(_half_sq_diff_flat(aflat, bflat))


# numpy references kept importable regardless of backend, for the benchmark
# and for backend-agreement tests
NUMPY_IMPLS = {
    "sigmoid": _sigmoid_numpy,
    "sigmoid_chain": _sigmoid_chain_numpy,
    "negative_quadratic_penalty": _neg_quad_penalty_numpy,
    "negative_quadratic_grad": _neg_quad_grad_numpy,
    "sum_squares": _sum_squares_numpy,
    "half_squared_difference": _half_sq_diff_numpy,
}
