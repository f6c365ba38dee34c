"""Volume sampling at fractional index coordinates.

Two interchangeable backends: a Cython extension for speed and a pure-numpy
fallback. The compiled one is used when available; set STCOV_PURE_PYTHON=1
to force the fallback. benchmarks/bench_interp.py compares the two.
"""
import os

import numpy as np

from . import numpy_backend

_impl = numpy_backend
BACKEND = "numpy"

if not os.environ.get("STCOV_PURE_PYTHON"):
    try:
        from . import _core

        _impl = _core
        BACKEND = "cython"
    except ImportError:
        pass

#: minimum array length per axis for each method
MIN_SIZE = {"trilinear": 2, "tricubic": 4}


def sample_volume(data, c1, c2, c3, method="tricubic", backend=None):
    """Sample `data` at fractional index coordinates (c1, c2, c3).

    Returns (values, inside). `inside` marks points whose full interpolation
    neighbourhood lies within the array; values outside are 0. Tricubic uses
    Catmull-Rom cubic convolution, trilinear is plain multilinear.
    """
    if method not in MIN_SIZE:
        raise ValueError(f"unknown interpolation method {method!r}")
    if min(data.shape) < MIN_SIZE[method]:
        raise ValueError(
            f"{method} interpolation needs at least {MIN_SIZE[method]} samples "
            f"per axis, got shape {data.shape}"
        )
    impl = _impl
    if backend == "numpy":
        impl = numpy_backend
    elif backend == "cython":
        from . import _core as impl  # noqa: F811 - explicit request

    c1, c2, c3 = np.broadcast_arrays(
        np.asarray(c1, dtype=np.float64),
        np.asarray(c2, dtype=np.float64),
        np.asarray(c3, dtype=np.float64),
    )
    c1, c2, c3 = (np.ascontiguousarray(c) for c in (c1, c2, c3))
    shape = c1.shape
    data = np.ascontiguousarray(data, dtype=np.float64)
    fn = impl.sample_tricubic if method == "tricubic" else impl.sample_trilinear
    values, inside = fn(data, c1.ravel(), c2.ravel(), c3.ravel())
    return np.asarray(values).reshape(shape), np.asarray(inside).reshape(shape)
