# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled sampling of 3-D volumes at fractional index coordinates.

Same semantics as numpy_backend; one tight loop over sample points instead
of vectorized gathers, which avoids materializing 64 tap arrays per call.
"""
import numpy as np

cimport numpy as cnp
from libc.math cimport floor

cnp.import_array()


cdef inline void _cubic_w(double u, double* w) nogil:
    w[0] = u * (-0.5 + u * (1.0 - 0.5 * u))
    w[1] = 1.0 + u * u * (1.5 * u - 2.5)
    w[2] = u * (0.5 + u * (2.0 - 1.5 * u))
    w[3] = u * u * (0.5 * u - 0.5)


def sample_trilinear(double[:, :, ::1] data,
                     double[::1] c1, double[::1] c2, double[::1] c3):
    cdef Py_ssize_t n1 = data.shape[0], n2 = data.shape[1], n3 = data.shape[2]
    cdef Py_ssize_t n = c1.shape[0]
    out_arr = np.zeros(n)
    inside_arr = np.zeros(n, dtype=np.uint8)
    cdef double[::1] out = out_arr
    cdef unsigned char[::1] inside = inside_arr
    cdef Py_ssize_t p, b1, b2, b3
    cdef double x, y, t, u1, u2, u3, v

    with nogil:
        for p in range(n):
            x = c1[p]; y = c2[p]; t = c3[p]
            if x < 0.0 or x > n1 - 1 or y < 0.0 or y > n2 - 1 or t < 0.0 or t > n3 - 1:
                continue
            inside[p] = 1
            b1 = <Py_ssize_t>floor(x)
            b2 = <Py_ssize_t>floor(y)
            b3 = <Py_ssize_t>floor(t)
            if b1 > n1 - 2: b1 = n1 - 2
            if b2 > n2 - 2: b2 = n2 - 2
            if b3 > n3 - 2: b3 = n3 - 2
            u1 = x - b1; u2 = y - b2; u3 = t - b3
            v = (1 - u1) * ((1 - u2) * ((1 - u3) * data[b1, b2, b3] + u3 * data[b1, b2, b3 + 1])
                            + u2 * ((1 - u3) * data[b1, b2 + 1, b3] + u3 * data[b1, b2 + 1, b3 + 1])) \
                + u1 * ((1 - u2) * ((1 - u3) * data[b1 + 1, b2, b3] + u3 * data[b1 + 1, b2, b3 + 1])
                        + u2 * ((1 - u3) * data[b1 + 1, b2 + 1, b3] + u3 * data[b1 + 1, b2 + 1, b3 + 1]))
            out[p] = v
    return out_arr, inside_arr.astype(bool)


def sample_tricubic(double[:, :, ::1] data,
                    double[::1] c1, double[::1] c2, double[::1] c3):
    cdef Py_ssize_t n1 = data.shape[0], n2 = data.shape[1], n3 = data.shape[2]
    cdef Py_ssize_t n = c1.shape[0]
    out_arr = np.zeros(n)
    inside_arr = np.zeros(n, dtype=np.uint8)
    cdef double[::1] out = out_arr
    cdef unsigned char[::1] inside = inside_arr
    cdef Py_ssize_t p, b1, b2, b3, i, j, k
    cdef double x, y, t, acc, plane, row
    cdef double w1[4]
    cdef double w2[4]
    cdef double w3[4]

    with nogil:
        for p in range(n):
            x = c1[p]; y = c2[p]; t = c3[p]
            if x < 1.0 or x > n1 - 2 or y < 1.0 or y > n2 - 2 or t < 1.0 or t > n3 - 2:
                continue
            inside[p] = 1
            b1 = <Py_ssize_t>floor(x)
            b2 = <Py_ssize_t>floor(y)
            b3 = <Py_ssize_t>floor(t)
            if b1 > n1 - 3: b1 = n1 - 3
            if b2 > n2 - 3: b2 = n2 - 3
            if b3 > n3 - 3: b3 = n3 - 3
            _cubic_w(x - b1, w1)
            _cubic_w(y - b2, w2)
            _cubic_w(t - b3, w3)
            acc = 0.0
            for i in range(4):
                plane = 0.0
                for j in range(4):
                    row = 0.0
                    for k in range(4):
                        row += w3[k] * data[b1 + i - 1, b2 + j - 1, b3 + k - 1]
                    plane += w2[j] * row
                acc += w1[i] * plane
            out[p] = acc
    return out_arr, inside_arr.astype(bool)
