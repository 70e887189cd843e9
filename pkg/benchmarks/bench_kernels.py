#!/usr/bin/env python3
"""Side-by-side timing of the numba-jitted kernels against the pure-numpy
fallbacks, on objective-loop-sized arrays.

Run:  python benchmarks/bench_kernels.py
The numba path must be enabled (PARTCODER_NUMBA unset or != 0) or the script
only reports the numpy timings.
"""

import time

import numpy as np

from partcoder import kernels

SHAPES = {
    "sigmoid": (2000, 784),
    "sigmoid_chain": (2000, 784),
    "negative_quadratic_penalty": (784, 196),
    "negative_quadratic_grad": (784, 196),
    "sum_squares": (784, 196),
    "half_squared_difference": (2000, 784),
}
REPEATS = 50


def time_fn(fn, *args):
    fn(*args)  # warm (and JIT-compile on the numba path)
    t0 = time.perf_counter()
    for _ in range(REPEATS):
        fn(*args)
    return (time.perf_counter() - t0) / REPEATS


def main():
    rng = np.random.default_rng(0)
    print(f"kernel backend: {kernels.BACKEND}  ({REPEATS} repeats per timing)")
    print(f"{'kernel':>28}  {'numpy (ms)':>11}  {'selected (ms)':>14}  {'speedup':>8}")
    print("-" * 68)
    for name, shape in SHAPES.items():
        a = rng.normal(size=shape)
        if name == "sigmoid_chain":
            args = (rng.normal(size=shape), kernels.sigmoid(a))
            np_args = tuple(x.ravel() for x in args)
        elif name == "half_squared_difference":
            args = (a, rng.normal(size=shape))
            np_args = tuple(x.ravel() for x in args)
        else:
            args = (a,)
            np_args = (a.ravel(),)

        selected = getattr(kernels, name)
        reference = kernels.NUMPY_IMPLS[name]
        t_np = time_fn(reference, *np_args)
        t_sel = time_fn(selected, *args)

        # agreement check before trusting the timing
        got = np.asarray(selected(*args))
        want = np.asarray(reference(*np_args)).reshape(got.shape)
        assert np.allclose(got, want, rtol=1e-12, atol=1e-12), name

        print(f"{name:>28}  {t_np * 1e3:>11.3f}  {t_sel * 1e3:>14.3f}"
              f"  {t_np / t_sel:>7.1f}x")


if __name__ == "__main__":
    main()
