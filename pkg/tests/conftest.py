import numpy as np
import pytest

from stcov.geom import GeoTransform, RFParams, rotation


def random_transform(rng, scale_lo=1.0 / 3.0, scale_hi=3.0, u_max=2.0):
    """Random composed transform within the documented verification bounds."""
    A = (rotation(rng.uniform(0, 2 * np.pi))
         @ np.diag(rng.uniform(scale_lo, scale_hi, size=2))
         @ rotation(rng.uniform(0, 2 * np.pi)))
    return GeoTransform(
        Sx=rng.uniform(scale_lo, scale_hi),
        A=A,
        u=rng.uniform(-u_max, u_max, size=2),
        St=rng.uniform(scale_lo, scale_hi),
    )


def random_rf_params(rng):
    R = rotation(rng.uniform(0, 2 * np.pi))
    Sigma = R @ np.diag(rng.uniform(0.25, 4.0, size=2)) @ R.T
    Sigma = (Sigma + Sigma.T) / 2
    return RFParams(
        s=rng.uniform(0.25, 16.0),
        Sigma=Sigma,
        tau=rng.uniform(0.25, 16.0),
        v=rng.uniform(-1.0, 1.0, size=2),
    )


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
