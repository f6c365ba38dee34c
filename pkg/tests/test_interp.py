import numpy as np
import pytest

from stcov import _interp
from stcov._interp import sample_volume


@pytest.fixture
def volume(rng):
    return rng.standard_normal((12, 10, 8))


@pytest.fixture
def coords(rng):
    n = 500
    return (rng.uniform(-2, 13, n), rng.uniform(-2, 11, n), rng.uniform(-2, 9, n))


@pytest.mark.parametrize("method", ["trilinear", "tricubic"])
def test_backends_agree(volume, coords, method):
    v_np, in_np = sample_volume(volume, *coords, method, backend="numpy")
    v_cy, in_cy = sample_volume(volume, *coords, method, backend="cython")
    if _interp.BACKEND == "numpy":
        pytest.skip("compiled backend not built")
    assert np.array_equal(in_np, in_cy)
    assert np.allclose(v_np, v_cy, rtol=1e-13, atol=1e-13)


@pytest.mark.parametrize("method", ["trilinear", "tricubic"])
def test_exact_at_grid_points(volume, method):
    i, j, k = np.meshgrid(np.arange(2, 10), np.arange(2, 8), np.arange(2, 6),
                          indexing="ij")
    vals, inside = sample_volume(volume, i.astype(float), j.astype(float),
                                 k.astype(float), method)
    assert inside.all()
    assert np.allclose(vals, volume[i, j, k], atol=1e-12)


def test_trilinear_reproduces_linear(rng):
    i, j, k = np.meshgrid(*(np.arange(n, dtype=float) for n in (8, 8, 8)),
                          indexing="ij")
    data = 2.0 * i - 3.0 * j + 0.5 * k + 1.0
    c = tuple(rng.uniform(0, 7, 200) for _ in range(3))
    vals, inside = sample_volume(data, *c, "trilinear")
    assert inside.all()
    expected = 2.0 * c[0] - 3.0 * c[1] + 0.5 * c[2] + 1.0
    assert np.allclose(vals, expected, atol=1e-10)


def test_tricubic_reproduces_quadratic(rng):
    # Catmull-Rom (a=-1/2) is 3rd-order accurate: exact on quadratics
    i, j, k = np.meshgrid(*(np.arange(n, dtype=float) for n in (10, 10, 10)),
                          indexing="ij")
    data = 0.5 * i**2 - j**2 + 2 * k**2 + i * j - 3.0 * k + 1.0
    c = tuple(rng.uniform(1, 8, 200) for _ in range(3))
    vals, inside = sample_volume(data, *c, "tricubic")
    assert inside.all()
    expected = (0.5 * c[0]**2 - c[1]**2 + 2 * c[2]**2
                + c[0] * c[1] - 3.0 * c[2] + 1.0)
    assert np.allclose(vals, expected, atol=1e-9)


def test_inside_margins(volume):
    vals, inside = sample_volume(volume, np.array([0.5, 11.0, -0.1]),
                                 np.array([5.0, 5.0, 5.0]),
                                 np.array([4.0, 4.0, 4.0]), "tricubic")
    assert not inside[0]      # needs a neighbour at index -1
    assert not inside[1]      # needs a neighbour at index 12
    assert not inside[2]
    assert vals[0] == 0.0 and vals[2] == 0.0

    _, inside_lin = sample_volume(volume, np.array([0.5, 11.0, -0.1]),
                                  np.array([5.0, 5.0, 5.0]),
                                  np.array([4.0, 4.0, 4.0]), "trilinear")
    assert inside_lin[0] and inside_lin[1] and not inside_lin[2]


def test_rejects_tiny_volumes():
    with pytest.raises(ValueError):
        sample_volume(np.zeros((3, 8, 8)), np.zeros(1), np.zeros(1), np.zeros(1),
                      "tricubic")


def test_rejects_unknown_method(volume):
    with pytest.raises(ValueError):
        sample_volume(volume, np.zeros(1), np.zeros(1), np.zeros(1), "nearest")
