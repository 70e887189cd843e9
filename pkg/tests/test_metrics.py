import csv

import numpy as np
import pytest

from partcoder.autoencoder import (
    encode,
    init_params,
    kl_sparsity,
    mean_hidden_activation,
)
from partcoder.metrics import (
    SparsityReport,
    hoyer_sparseness,
    negative_weight_fraction,
    per_unit_sparseness,
    pooled_sparseness,
    representation_kl,
    sparsity_report,
    weight_histogram,
    write_histogram_csv,
    write_report_csv,
)


def test_hoyer_one_hot_is_exactly_one():
    assert hoyer_sparseness([0.0, 0.0, 5.0, 0.0]) == 1.0


def test_hoyer_constant_is_exactly_zero():
    assert hoyer_sparseness([3.0, 3.0, 3.0, 3.0]) == 0.0
    assert hoyer_sparseness([-2.0, 2.0, -2.0, 2.0]) == 0.0


def test_hoyer_hand_value():
    # (2 - 2/sqrt(2)) / (2 - 1) = 2 - sqrt(2)
    assert hoyer_sparseness([1.0, 1.0, 0.0, 0.0]) == pytest.approx(
        2.0 - np.sqrt(2.0), abs=1e-12)


def test_hoyer_scale_invariant():
    rng = np.random.default_rng(0)
    v = rng.normal(size=9)
    for c in (2.0, -3.0, 1e-4, 1e6):
        assert hoyer_sparseness(c * v) == pytest.approx(
            hoyer_sparseness(v), abs=1e-10)


def test_hoyer_permutation_invariant():
    rng = np.random.default_rng(1)
    v = rng.normal(size=12)
    assert hoyer_sparseness(rng.permutation(v)) == pytest.approx(
        hoyer_sparseness(v), abs=1e-12)


def test_hoyer_errors():
    with pytest.raises(ValueError):
        hoyer_sparseness([0.0, 0.0, 0.0])
    with pytest.raises(ValueError):
        hoyer_sparseness([1.0])


def test_hoyer_in_unit_interval():
    rng = np.random.default_rng(2)
    for _ in range(100):
        v = rng.normal(size=rng.integers(2, 30))
        if np.all(v == 0):
            continue
        assert 0.0 <= hoyer_sparseness(v) <= 1.0


def test_per_unit_axes():
    W = np.array([[1.0, 0.0, 0.0], [1.0, 1.0, 1.0]])
    rows = per_unit_sparseness(W, unit_axis=0)
    assert rows[0] == 1.0 and rows[1] == 0.0
    cols = per_unit_sparseness(W.T, unit_axis=1)
    np.testing.assert_array_equal(rows, cols)
    assert 0.0 <= pooled_sparseness(W) <= 1.0


def test_negative_fraction_values():
    assert negative_weight_fraction(np.array([1.0, 2.0])) == 0.0
    assert negative_weight_fraction(np.array([-1.0, 2.0, -3.0, 4.0])) == 0.5
    rng = np.random.default_rng(3)
    W = rng.normal(size=(5, 5))
    W[W == 0] = 0.1
    assert negative_weight_fraction(-W) == pytest.approx(
        1.0 - negative_weight_fraction(W), abs=1e-12)
    assert 0.0 <= negative_weight_fraction(W) <= 1.0


def test_representation_kl_definitional():
    rng = np.random.default_rng(4)
    params = init_params(6, 4, rng)
    X = rng.random((20, 6))
    expected = kl_sparsity(0.05, mean_hidden_activation(encode(params, X)))
    assert representation_kl(params, X, 0.05) == expected


def test_representation_kl_at_target_is_zero():
    assert kl_sparsity(0.3, np.full(5, 0.3)) == 0.0


def test_weight_histogram_single_value():
    edges, counts = weight_histogram(np.full((3, 3), 2.5), bins=1)
    assert counts.sum() == 9
    assert counts[0] == 9


def test_weight_histogram_counts_sum():
    rng = np.random.default_rng(5)
    W = rng.normal(size=(7, 11))
    _, counts = weight_histogram(W, bins=13)
    assert counts.sum() == W.size


def test_weight_histogram_symmetric_counts():
    # values placed away from interior bin edges so mirror symmetry is exact
    base = np.array([0.3, 0.7, 1.1])
    sym = np.concatenate([base, -base])
    _, counts = weight_histogram(sym, bins=4)
    np.testing.assert_array_equal(counts, counts[::-1])


def test_weight_histogram_rightmost_inclusive():
    edges, counts = weight_histogram(np.array([0.0, 0.5, 2.0]), bins=2)
    assert counts[-1] == 1  # the max value lands in the last bin, not outside
    assert counts.sum() == 3


def test_sparsity_report_and_csv(tmp_path):
    rng = np.random.default_rng(6)
    params = init_params(9, 4, rng)
    X = rng.random((15, 9))
    report = sparsity_report(params, X, 0.05, which="encoder", bins=8)
    assert isinstance(report, SparsityReport)
    assert report.per_unit_sparseness.shape == (4,)
    assert np.all((report.per_unit_sparseness >= 0)
                  & (report.per_unit_sparseness <= 1))
    assert report.histogram[1].sum() == params.w1.size

    dec = sparsity_report(params, X, 0.05, which="decoder", bins=8)
    assert dec.per_unit_sparseness.shape == (4,)
    assert dec.histogram[1].sum() == params.w2.size

    out = tmp_path / "report.csv"
    write_report_csv(report, out)
    with open(out) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["unit", "hoyer_sparseness", "negative_fraction",
                       "kl_divergence"]
    assert len(rows) == 5

    hist_out = tmp_path / "hist.csv"
    write_histogram_csv(report.histogram, hist_out)
    with open(hist_out) as fh:
        hist_rows = list(csv.reader(fh))
    assert hist_rows[0] == ["bin_low", "bin_high", "count"]
    assert sum(int(r[2]) for r in hist_rows[1:]) == params.w1.size
