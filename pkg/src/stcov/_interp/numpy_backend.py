"""Pure-numpy sampling of 3-D volumes at fractional index coordinates.

Reference implementation; the Cython extension in _core.pyx computes the
same values and the two are cross-checked in the test suite.
"""
import numpy as np


def _cubic_weights(u):
    # Catmull-Rom (cubic convolution, a = -1/2); taps at offsets -1..2
    w = np.empty((4,) + u.shape)
    w[0] = u * (-0.5 + u * (1.0 - 0.5 * u))
    w[1] = 1.0 + u * u * (1.5 * u - 2.5)
    w[2] = u * (0.5 + u * (2.0 - 1.5 * u))
    w[3] = u * u * (0.5 * u - 0.5)
    return w


def sample_trilinear(data, c1, c2, c3):
    n1, n2, n3 = data.shape
    inside = (
        (c1 >= 0.0) & (c1 <= n1 - 1)
        & (c2 >= 0.0) & (c2 <= n2 - 1)
        & (c3 >= 0.0) & (c3 <= n3 - 1)
    )
    b1 = np.clip(np.floor(c1), 0, n1 - 2).astype(np.intp)
    b2 = np.clip(np.floor(c2), 0, n2 - 2).astype(np.intp)
    b3 = np.clip(np.floor(c3), 0, n3 - 2).astype(np.intp)
    u1 = np.clip(c1 - b1, 0.0, 1.0)
    u2 = np.clip(c2 - b2, 0.0, 1.0)
    u3 = np.clip(c3 - b3, 0.0, 1.0)

    out = np.zeros(c1.shape)
    for i, wi in ((0, 1.0 - u1), (1, u1)):
        for j, wj in ((0, 1.0 - u2), (1, u2)):
            for k, wk in ((0, 1.0 - u3), (1, u3)):
                out += wi * wj * wk * data[b1 + i, b2 + j, b3 + k]
    out[~inside] = 0.0
    return out, inside


def sample_tricubic(data, c1, c2, c3):
    n1, n2, n3 = data.shape
    inside = (
        (c1 >= 1.0) & (c1 <= n1 - 2)
        & (c2 >= 1.0) & (c2 <= n2 - 2)
        & (c3 >= 1.0) & (c3 <= n3 - 2)
    )
    b1 = np.clip(np.floor(c1), 1, n1 - 3).astype(np.intp)
    b2 = np.clip(np.floor(c2), 1, n2 - 3).astype(np.intp)
    b3 = np.clip(np.floor(c3), 1, n3 - 3).astype(np.intp)
    w1 = _cubic_weights(np.clip(c1 - b1, 0.0, 1.0))
    w2 = _cubic_weights(np.clip(c2 - b2, 0.0, 1.0))
    w3 = _cubic_weights(np.clip(c3 - b3, 0.0, 1.0))

    out = np.zeros(c1.shape)
    for i in range(4):
        for j in range(4):
            plane = np.zeros(c1.shape)
            for k in range(4):
                plane += w3[k] * data[b1 + i - 1, b2 + j - 1, b3 + k - 1]
            out += w1[i] * w2[j] * plane
    out[~inside] = 0.0
    return out, inside
