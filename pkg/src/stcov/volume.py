"""Discrete video volumes on regular grids, plus the shared on-disk format.

A volume stores samples f(x1, x2, t) in C order, physical grid geometry
(origin and spacing per axis), and an optional boolean validity mask used to
track where filter supports and warp preimages were fully available.

On disk a volume is a pair of files sharing a stem: `<name>.json` (header)
and `<name>.f32` (little-endian float32, C order (x1, x2, t)).
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np


@dataclass(frozen=True)
class VideoVolume:
    data: np.ndarray
    spacing: tuple = (1.0, 1.0, 1.0)
    origin: tuple = (0.0, 0.0, 0.0)
    mask: np.ndarray | None = None

    def __post_init__(self):
        a = np.asarray(self.data, dtype=float)
        if a.ndim != 3:
            raise ValueError(f"volume data must be 3-D, got ndim={a.ndim}")
        if min(a.shape) < 1:
            raise ValueError(f"all dimensions must be >= 1, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise ValueError("volume contains non-finite values")
        sp = tuple(float(x) for x in self.spacing)
        if len(sp) != 3 or any(x <= 0 for x in sp):
            raise ValueError(f"spacings must be three positive reals, got {self.spacing}")
        og = tuple(float(x) for x in self.origin)
        if len(og) != 3:
            raise ValueError("origin must have three components")
        object.__setattr__(self, "data", a)
        object.__setattr__(self, "spacing", sp)
        object.__setattr__(self, "origin", og)
        if self.mask is not None:
            m = np.asarray(self.mask, dtype=bool)
            if m.shape != a.shape:
                raise ValueError("mask shape must match data shape")
            object.__setattr__(self, "mask", m)

    @property
    def shape(self):
        return self.data.shape

    def full_mask(self) -> np.ndarray:
        return np.ones(self.shape, dtype=bool) if self.mask is None else self.mask

    def axis_coords(self, axis: int) -> np.ndarray:
        """Physical coordinates of the grid samples along one axis."""
        return self.origin[axis] + self.spacing[axis] * np.arange(self.shape[axis])

    def index_coords(self, x1, x2, t):
        """Physical coordinates -> fractional index coordinates."""
        return (
            (np.asarray(x1, dtype=float) - self.origin[0]) / self.spacing[0],
            (np.asarray(x2, dtype=float) - self.origin[1]) / self.spacing[1],
            (np.asarray(t, dtype=float) - self.origin[2]) / self.spacing[2],
        )

    def with_data(self, data, mask=None) -> "VideoVolume":
        return VideoVolume(data, self.spacing, self.origin,
                           self.mask if mask is None else mask)


def constant_volume(value, shape, spacing=(1.0, 1.0, 1.0), origin=(0.0, 0.0, 0.0)):
    return VideoVolume(np.full(shape, float(value)), spacing, origin)


def erode_mask(mask: np.ndarray, extents) -> np.ndarray:
    """Shrink a validity mask by per-axis (left, right) index extents.

    Output index n stays valid only if mask[n - left : n + right + 1] along
    each axis is all valid, i.e. the full (asymmetric) filter window fit.
    """
    out = mask
    for axis, (left, right) in enumerate(extents):
        left, right = int(left), int(right)
        if left == 0 and right == 0:
            continue
        n = out.shape[axis]
        acc = np.zeros(out.shape, dtype=bool)
        span = left + right
        if span >= n:
            return acc
        sl = [slice(None)] * out.ndim
        sl[axis] = slice(left, n - right)
        inner = None
        for off in range(-left, right + 1):
            s = [slice(None)] * out.ndim
            s[axis] = slice(left + off, n - right + off)
            piece = out[tuple(s)]
            inner = piece if inner is None else (inner & piece)
        acc[tuple(sl)] = inner
        out = acc
    return out


def write_volume(vol: VideoVolume, stem, extra_header: dict | None = None) -> dict:
    """Write `<stem>.json` + `<stem>.f32`; returns the header dict."""
    stem = Path(stem)
    header = {
        "shape": list(vol.shape),
        "origin": list(vol.origin),
        "spacing": list(vol.spacing),
        "dtype": "float32",
        "byte_order": "little",
        "order": "C",
        "axes": ["x1", "x2", "t"],
    }
    if extra_header:
        header.update(extra_header)
    stem.with_suffix(".json").write_text(json.dumps(header, indent=2, sort_keys=True) + "\n")
    vol.data.astype("<f4").tofile(stem.with_suffix(".f32"))
    return header


def read_volume(stem) -> VideoVolume:
    stem = Path(stem)
    header = json.loads(stem.with_suffix(".json").read_text())
    shape = tuple(header["shape"])
    raw = np.fromfile(stem.with_suffix(".f32"), dtype="<f4")
    if raw.size != int(np.prod(shape)):
        raise ValueError(
            f"{stem}.f32 holds {raw.size} samples, header says {np.prod(shape)}"
        )
    return VideoVolume(raw.reshape(shape).astype(float),
                       spacing=tuple(header["spacing"]),
                       origin=tuple(header["origin"]))
