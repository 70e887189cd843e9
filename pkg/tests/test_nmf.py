import numpy as np
import pytest

from partcoder.autoencoder import reconstruction_cost
from partcoder.errors import ShapeError
from partcoder.nmf import nmf_encode, nmf_factorize, nmf_reconstruction_error


def test_exact_rank_one_recovery():
    rng = np.random.default_rng(0)
    w = rng.random(12) + 0.1
    h = rng.random(20) + 0.1
    V = np.outer(w, h)
    model, trace = nmf_factorize(V, rank=1, iterations=500, seed=1)
    assert trace[-1] < 1e-6


def test_objective_trace_nonincreasing():
    rng = np.random.default_rng(1)
    V = rng.random((15, 25))
    _, trace = nmf_factorize(V, rank=4, iterations=200, seed=2)
    trace = np.array(trace)
    rel_increase = np.diff(trace) / np.maximum(1.0, np.abs(trace[:-1]))
    assert np.all(rel_increase <= 1e-10)


def test_full_rank_near_exact():
    rng = np.random.default_rng(2)
    V = rng.random((8, 14)) + 0.05
    model, trace = nmf_factorize(V, rank=8, iterations=3000, seed=3)
    assert nmf_reconstruction_error(model, V) < 1e-3


def test_factors_stay_nonnegative():
    rng = np.random.default_rng(3)
    V = rng.random((10, 12))
    model, _ = nmf_factorize(V, rank=3, iterations=150, seed=4)
    assert model.W.min() >= 0.0
    assert model.H.min() >= 0.0


def test_negative_input_rejected():
    V = np.array([[1.0, -0.1], [0.2, 0.3]])
    with pytest.raises(ValueError):
        nmf_factorize(V, rank=1)


def test_rank_exceeds_dims_rejected():
    with pytest.raises(ValueError):
        nmf_factorize(np.random.default_rng(0).random((4, 6)), rank=5)


def test_encode_training_column_recovers_objective():
    rng = np.random.default_rng(4)
    V = rng.random((10, 30))
    model, _ = nmf_factorize(V, rank=3, iterations=800, seed=5)
    j = 7
    col = V[:, j:j + 1]
    h = nmf_encode(model.W, col, iterations=3000, tol=1e-14, seed=6)
    train_obj = 0.5 * float(np.sum((col - model.W @ model.H[:, j:j + 1]) ** 2))
    test_obj = 0.5 * float(np.sum((col - model.W @ h) ** 2))
    # fixed-basis encoding is a convex problem: the fresh solve must reach
    # (at least) the training column's objective value
    assert test_obj <= train_obj * (1.0 + 1e-3) + 1e-12


def test_encode_nonnegative_and_zero_column():
    rng = np.random.default_rng(5)
    V = rng.random((8, 10))
    model, _ = nmf_factorize(V, rank=2, iterations=100, seed=6)
    V_test = rng.random((8, 3))
    V_test[:, 1] = 0.0
    H = nmf_encode(model.W, V_test, iterations=2000, seed=7)
    assert H.min() >= 0.0
    recon = model.W @ H
    assert float(np.sum(recon[:, 1] ** 2)) < 1e-10
    assert float(np.abs(H[:, 1]).max()) < 1e-5


def test_reconstruction_error_exact_factorization():
    rng = np.random.default_rng(6)
    W = rng.random((6, 2))
    H = rng.random((2, 9))
    from partcoder.nmf import NmfModel
    model = NmfModel(W=W, H=H, rank=2)
    assert nmf_reconstruction_error(model, W @ H) == 0.0


def test_reconstruction_error_delegates_to_cost():
    rng = np.random.default_rng(7)
    V = rng.random((5, 8))
    model, _ = nmf_factorize(V, rank=2, iterations=50, seed=8)
    expected = reconstruction_cost(V.T, (model.W @ model.H).T)
    assert nmf_reconstruction_error(model, V) == expected


def test_error_nonincreasing_in_rank():
    rng = np.random.default_rng(8)
    V = rng.random((20, 30))
    errors = []
    for rank in (1, 3, 6, 12):
        model, _ = nmf_factorize(V, rank=rank, iterations=600, seed=9)
        errors.append(nmf_reconstruction_error(model, V))
    assert all(b <= a * (1.0 + 1e-6) for a, b in zip(errors, errors[1:]))


def test_scale_ambiguity_reconstruction_equality():
    rng = np.random.default_rng(9)
    V = rng.random((7, 11))
    model, _ = nmf_factorize(V, rank=3, iterations=100, seed=10)
    d = rng.random(3) + 0.5
    from partcoder.nmf import NmfModel
    rescaled = NmfModel(W=model.W * d, H=model.H / d[:, None], rank=3)
    assert nmf_reconstruction_error(rescaled, V) == pytest.approx(
        nmf_reconstruction_error(model, V), rel=1e-12)


def test_shape_mismatch_rejected():
    rng = np.random.default_rng(10)
    model, _ = nmf_factorize(rng.random((6, 8)), rank=2, iterations=10, seed=0)
    with pytest.raises(ShapeError):
        nmf_reconstruction_error(model, rng.random((6, 9)))
