"""Compare the compiled and pure-numpy interpolation backends.

Times tricubic and trilinear sampling at random coordinates for a few volume
sizes, then a full warp of a video volume through each backend.

Usage: python benchmarks/bench_interp.py [n_points]
"""
import sys
import time

import numpy as np

from stcov import _interp
from stcov._interp import sample_volume
from stcov.geom import GeoTransform, rotation
from stcov.warp import GaussianBlob, warp_video


def time_call(fn, repeats=5):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    n = int(sys.argv[1]) if len(sys.argv) > 1 else 500_000
    rng = np.random.default_rng(0)
    print(f"active backend: {_interp.BACKEND}")
    print(f"{'case':<40}{'numpy':>12}{'cython':>12}{'speedup':>10}")

    for shape in ((32, 32, 24), (96, 96, 64)):
        data = rng.standard_normal(shape)
        coords = tuple(rng.uniform(-1, s, n) for s in shape)
        for method in ("trilinear", "tricubic"):
            rows = {}
            for backend in ("numpy", "cython"):
                try:
                    rows[backend] = time_call(
                        lambda: sample_volume(data, *coords, method, backend=backend))
                except ImportError:
                    rows[backend] = None
            label = f"{method} {shape} x{n}"
            np_t, cy_t = rows["numpy"], rows["cython"]
            if cy_t is None:
                print(f"{label:<40}{np_t:>10.3f}s{'n/a':>12}{'':>10}")
            else:
                print(f"{label:<40}{np_t:>10.3f}s{cy_t:>10.3f}s"
                      f"{np_t / cy_t:>9.1f}x")

    f = GaussianBlob(center=(40.0, 40.0), s0=60.0).sample((80, 80, 48))
    g = GeoTransform(Sx=1.3, A=rotation(0.4), u=(0.5, -0.3), St=1.2)
    import stcov._interp as interp_mod
    times = {}
    for backend in ("numpy", "cython"):
        try:
            from stcov._interp import _core  # noqa: F401
        except ImportError:
            if backend == "cython":
                times[backend] = None
                continue
        saved = interp_mod._impl
        interp_mod._impl = (interp_mod.numpy_backend if backend == "numpy"
                            else _core)
        try:
            times[backend] = time_call(lambda: warp_video(f, g), repeats=3)
        finally:
            interp_mod._impl = saved
    label = f"warp_video {f.shape}"
    np_t, cy_t = times["numpy"], times.get("cython")
    if cy_t is None:
        print(f"{label:<40}{np_t:>10.3f}s{'n/a':>12}")
    else:
        print(f"{label:<40}{np_t:>10.3f}s{cy_t:>10.3f}s{np_t / cy_t:>9.1f}x")


if __name__ == "__main__":
    main()
