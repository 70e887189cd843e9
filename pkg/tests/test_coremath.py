import numpy as np
import pytest

from partcoder.coremath import ParamLayout, flatten, sigmoid, unflatten
from partcoder.errors import ShapeError


def ae_layout():
    # (2x3), (2,), (3x2), (3,) -> total 17
    return ParamLayout((
        ("w1", (2, 3)), ("b1", (2,)), ("w2", (3, 2)), ("b2", (3,)),
    ))


def test_layout_total_size():
    assert ae_layout().total_size == 17


def test_layout_boundaries():
    assert ae_layout().boundaries() == [6, 8, 14, 17]


def test_autoencoder_422_layout_length():
    layout = ParamLayout((
        ("w1", (2, 4)), ("b1", (2,)), ("w2", (4, 2)), ("b2", (4,)),
    ))
    assert layout.total_size == 22


def test_flatten_round_trip_bitwise():
    rng = np.random.default_rng(0)
    layout = ae_layout()
    params = {
        "w1": rng.normal(size=(2, 3)),
        "b1": rng.normal(size=(2,)),
        "w2": rng.normal(size=(3, 2)),
        "b2": rng.normal(size=(3,)),
    }
    back = unflatten(flatten(params, layout), layout)
    for name in params:
        np.testing.assert_array_equal(back[name], params[name])


def test_unflatten_then_flatten_identity_on_vectors():
    layout = ae_layout()
    rng = np.random.default_rng(1)
    v = rng.normal(size=layout.total_size)
    np.testing.assert_array_equal(flatten(unflatten(v, layout), layout), v)


def test_unflatten_zero_vector():
    layout = ae_layout()
    parts = unflatten(np.zeros(17), layout)
    for name, shape in layout.segments:
        assert parts[name].shape == tuple(shape)
        assert np.all(parts[name] == 0.0)


def test_round_trip_random_layouts():
    """Property: flatten/unflatten are mutually inverse for any layout."""
    rng = np.random.default_rng(42)
    for _ in range(25):
        n_segments = rng.integers(1, 6)
        segments = []
        for i in range(n_segments):
            if rng.random() < 0.4:
                shape = (int(rng.integers(1, 8)),)
            else:
                shape = (int(rng.integers(1, 8)), int(rng.integers(1, 8)))
            segments.append((f"s{i}", shape))
        layout = ParamLayout(tuple(segments))
        params = {name: rng.normal(size=shape) for name, shape in segments}
        back = unflatten(flatten(params, layout), layout)
        for name in params:
            np.testing.assert_array_equal(back[name], params[name])
        v = rng.normal(size=layout.total_size)
        np.testing.assert_array_equal(flatten(unflatten(v, layout), layout), v)


def test_flatten_shape_mismatch_names_segment():
    layout = ae_layout()
    params = {
        "w1": np.zeros((2, 3)), "b1": np.zeros(2),
        "w2": np.zeros((2, 3)),  # wrong shape
        "b2": np.zeros(3),
    }
    with pytest.raises(ShapeError, match="w2"):
        flatten(params, layout)


def test_flatten_missing_segment():
    layout = ae_layout()
    with pytest.raises(ShapeError, match="b2"):
        flatten({"w1": np.zeros((2, 3)), "b1": np.zeros(2),
                 "w2": np.zeros((3, 2))}, layout)


def test_unflatten_length_mismatch():
    with pytest.raises(ShapeError, match="17"):
        unflatten(np.zeros(16), ae_layout())


def test_layout_rejects_duplicates_and_bad_dims():
    with pytest.raises(ValueError):
        ParamLayout((("a", (2, 2)), ("a", (3,))))
    with pytest.raises(ValueError):
        ParamLayout((("a", (0, 2)),))


def test_sigmoid_reexported():
    assert sigmoid(np.array([0.0]))[0] == 0.5
