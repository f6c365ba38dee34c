"""Resampling of video volumes under geometric transforms, plus synthetic
band-limited test patterns with closed-form evaluators.

Warping is pull-back: the output sample at physical (x', t') is the input
interpolated at the inverse-mapped (x, t). All transforms act on physical
coordinates; output grids carry their own origin and spacing.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _interp
from .geom import GeoTransform, apply_points, inverse
from .volume import VideoVolume

MAX_GRATING_FREQ = 1.0 / 6.0  # cycles per pixel; keeps interpolation error low

TRILINEAR = "trilinear"
TRICUBIC = "tricubic"

ZERO = "zero"
ERROR = "error"


@dataclass(frozen=True)
class OutputGrid:
    shape: tuple
    origin: tuple
    spacing: tuple

    def __post_init__(self):
        if any(s <= 0 for s in self.spacing):
            raise ValueError("output grid spacings must be positive")
        if any(int(n) < 1 for n in self.shape):
            raise ValueError("output grid shape must be positive")
        object.__setattr__(self, "shape", tuple(int(n) for n in self.shape))
        object.__setattr__(self, "origin", tuple(float(x) for x in self.origin))
        object.__setattr__(self, "spacing", tuple(float(x) for x in self.spacing))


@dataclass(frozen=True)
class WarpConfig:
    interpolation: str = TRICUBIC
    out_of_domain: str = ZERO
    output_grid: OutputGrid | None = None

    def __post_init__(self):
        if self.interpolation not in (TRILINEAR, TRICUBIC):
            raise ValueError(f"unknown interpolation {self.interpolation!r}")
        if self.out_of_domain not in (ZERO, ERROR):
            raise ValueError(f"unknown out_of_domain policy {self.out_of_domain!r}")

    def to_json(self) -> dict:
        d = {"interpolation": self.interpolation, "out_of_domain": self.out_of_domain}
        if self.output_grid is not None:
            d["output_grid"] = {
                "shape": list(self.output_grid.shape),
                "origin": list(self.output_grid.origin),
                "spacing": list(self.output_grid.spacing),
            }
        return d

    @classmethod
    def from_json(cls, obj: dict) -> "WarpConfig":
        grid = obj.get("output_grid")
        if grid is not None:
            grid = OutputGrid(tuple(grid["shape"]), tuple(grid["origin"]),
                              tuple(grid["spacing"]))
        return cls(interpolation=obj.get("interpolation", TRICUBIC),
                   out_of_domain=obj.get("out_of_domain", ZERO),
                   output_grid=grid)


def transformed_grid(f: VideoVolume, g: GeoTransform,
                     spatial_spacing: float | None = None,
                     temporal_spacing: float | None = None) -> OutputGrid:
    """Output grid covering the image of f's domain under g.

    Defaults scale the spatial spacings by the smallest singular value of
    Sx * A (so output sampling density never drops below the input density
    in any direction, even for contracting A) and the temporal spacing by
    St; the temporal origin maps exactly so that output frames land on
    images of input frames whenever St * dt is the output step.
    """
    sv_min = g.Sx * float(np.linalg.svd(g.A, compute_uv=False)[-1])
    dxp = sv_min * f.spacing[0] if spatial_spacing is None else float(spatial_spacing)
    dyp = sv_min * f.spacing[1] if spatial_spacing is None else float(spatial_spacing)
    dtp = g.St * f.spacing[2] if temporal_spacing is None else float(temporal_spacing)
    ax1, ax2, at = (f.axis_coords(a) for a in range(3))
    c1, c2, ct = np.meshgrid([ax1[0], ax1[-1]], [ax2[0], ax2[-1]], [at[0], at[-1]],
                             indexing="ij")
    y1, y2, tp = apply_points(g, c1, c2, ct)
    t0 = g.St * f.origin[2]
    shape = (
        int(np.floor((y1.max() - y1.min()) / dxp)) + 1,
        int(np.floor((y2.max() - y2.min()) / dyp)) + 1,
        int(np.floor((tp.max() - t0) / dtp)) + 1,
    )
    return OutputGrid(shape, (float(y1.min()), float(y2.min()), t0), (dxp, dyp, dtp))


def warp_video(f: VideoVolume, g: GeoTransform, cfg: WarpConfig | None = None) -> VideoVolume:
    """Pull-back resampling: out(x', t') = f(inverse-mapped (x, t)).

    The returned volume's mask marks samples whose preimage (with the full
    interpolation neighbourhood) fell inside f's domain.
    """
    cfg = cfg or WarpConfig()
    grid = cfg.output_grid or transformed_grid(f, g)
    ginv = inverse(g)
    x1p = (grid.origin[0] + grid.spacing[0] * np.arange(grid.shape[0]))[:, None, None]
    x2p = (grid.origin[1] + grid.spacing[1] * np.arange(grid.shape[1]))[None, :, None]
    tp = (grid.origin[2] + grid.spacing[2] * np.arange(grid.shape[2]))[None, None, :]
    x1, x2, t = apply_points(ginv, x1p, x2p, tp)
    c1, c2, c3 = f.index_coords(x1, x2, t)
    values, inside = _interp.sample_volume(f.data, c1, c2, c3, cfg.interpolation)
    if f.mask is not None:
        idx = tuple(
            np.clip(np.rint(c).astype(int), 0, n - 1)
            for c, n in zip((c1, c2, c3), f.shape)
        )
        near = f.mask[idx]
        inside = inside & near
    if cfg.out_of_domain == ERROR and not inside.all():
        bad = np.argwhere(~inside)[0]
        coord = (
            grid.origin[0] + grid.spacing[0] * bad[0],
            grid.origin[1] + grid.spacing[1] * bad[1],
            grid.origin[2] + grid.spacing[2] * bad[2],
        )
        raise ValueError(f"warp preimage outside input domain at output point {coord}")
    values = np.where(inside, values, 0.0)
    return VideoVolume(values, grid.spacing, grid.origin, inside)


# ------------------------------------------------------------ test patterns ---

class Pattern:
    """Analytic spatio-temporal pattern: evaluable at arbitrary (x1, x2, t)."""

    def eval(self, x1, x2, t):
        raise NotImplementedError

    def sample(self, shape, spacing=(1.0, 1.0, 1.0), origin=(0.0, 0.0, 0.0)) -> VideoVolume:
        x1 = (origin[0] + spacing[0] * np.arange(shape[0]))[:, None, None]
        x2 = (origin[1] + spacing[1] * np.arange(shape[1]))[None, :, None]
        t = (origin[2] + spacing[2] * np.arange(shape[2]))[None, None, :]
        data = np.broadcast_to(self.eval(x1, x2, t), shape).copy()
        return VideoVolume(data, spacing, origin)


class GaussianBlob(Pattern):
    def __init__(self, center=(0.0, 0.0), s0=8.0, amplitude=1.0):
        if not s0 > 0:
            raise ValueError("blob variance s0 must be positive")
        self.center = np.asarray(center, dtype=float)
        self.s0 = float(s0)
        self.amplitude = float(amplitude)

    def eval(self, x1, x2, t):
        d1 = np.asarray(x1, dtype=float) - self.center[0]
        d2 = np.asarray(x2, dtype=float) - self.center[1]
        val = self.amplitude * np.exp(-(d1 * d1 + d2 * d2) / (2.0 * self.s0))
        return np.broadcast_arrays(val, np.asarray(t, dtype=float))[0]


class MovingBlob(Pattern):
    def __init__(self, center=(0.0, 0.0), s0=8.0, v0=(0.5, 0.0), amplitude=1.0):
        if not s0 > 0:
            raise ValueError("blob variance s0 must be positive")
        self.center = np.asarray(center, dtype=float)
        self.s0 = float(s0)
        self.v0 = np.asarray(v0, dtype=float)
        self.amplitude = float(amplitude)

    def eval(self, x1, x2, t):
        t = np.asarray(t, dtype=float)
        d1 = np.asarray(x1, dtype=float) - self.center[0] - self.v0[0] * t
        d2 = np.asarray(x2, dtype=float) - self.center[1] - self.v0[1] * t
        return self.amplitude * np.exp(-(d1 * d1 + d2 * d2) / (2.0 * self.s0))


class Grating(Pattern):
    """cos(2 pi (freq . x + temporal_freq * t) + phase), optionally under a
    Gaussian envelope to keep the pattern compactly supported."""

    def __init__(self, freq=(0.1, 0.0), temporal_freq=0.0, phase=0.0,
                 envelope_center=None, envelope_s=None):
        freq = np.asarray(freq, dtype=float)
        fmag = float(np.linalg.norm(freq))
        if fmag == 0.0:
            raise ValueError("grating frequency must be nonzero")
        if fmag > MAX_GRATING_FREQ + 1e-12:
            raise ValueError(
                f"grating frequency {fmag:.4f} exceeds the band limit "
                f"{MAX_GRATING_FREQ:.4f} cycles/pixel"
            )
        self.freq = freq
        self.temporal_freq = float(temporal_freq)
        self.phase = float(phase)
        self.envelope_center = (None if envelope_center is None
                                else np.asarray(envelope_center, dtype=float))
        self.envelope_s = None if envelope_s is None else float(envelope_s)

    def eval(self, x1, x2, t):
        x1 = np.asarray(x1, dtype=float)
        x2 = np.asarray(x2, dtype=float)
        t = np.asarray(t, dtype=float)
        arg = 2.0 * np.pi * (self.freq[0] * x1 + self.freq[1] * x2
                             + self.temporal_freq * t) + self.phase
        val = np.cos(arg)
        if self.envelope_s is not None:
            c = self.envelope_center if self.envelope_center is not None else np.zeros(2)
            d1, d2 = x1 - c[0], x2 - c[1]
            val = val * np.exp(-(d1 * d1 + d2 * d2) / (2.0 * self.envelope_s))
        return np.broadcast_arrays(val, t)[0]


class ChirpedGrating(Pattern):
    """Grating whose spatial frequency ramps linearly along the propagation
    direction: phase = 2 pi (f0 * r + chirp * r**2 / 2), r = direction . x."""

    def __init__(self, f0=0.05, chirp=0.001, direction=(1.0, 0.0), phase=0.0,
                 extent=None, envelope_center=None, envelope_s=None):
        if not f0 > 0:
            raise ValueError("chirp base frequency must be positive")
        d = np.asarray(direction, dtype=float)
        n = np.linalg.norm(d)
        if n == 0:
            raise ValueError("chirp direction must be nonzero")
        self.direction = d / n
        self.f0 = float(f0)
        self.chirp = float(chirp)
        self.phase = float(phase)
        if extent is not None:
            fmax = self.f0 + abs(self.chirp) * float(extent)
            if fmax > MAX_GRATING_FREQ + 1e-12:
                raise ValueError(
                    f"chirp reaches {fmax:.4f} cycles/pixel over extent {extent}, "
                    f"above the band limit {MAX_GRATING_FREQ:.4f}"
                )
        self.envelope_center = (None if envelope_center is None
                                else np.asarray(envelope_center, dtype=float))
        self.envelope_s = None if envelope_s is None else float(envelope_s)

    def eval(self, x1, x2, t):
        x1 = np.asarray(x1, dtype=float)
        x2 = np.asarray(x2, dtype=float)
        r = self.direction[0] * x1 + self.direction[1] * x2
        val = np.cos(2.0 * np.pi * (self.f0 * r + 0.5 * self.chirp * r * r) + self.phase)
        if self.envelope_s is not None:
            c = self.envelope_center if self.envelope_center is not None else np.zeros(2)
            d1, d2 = x1 - c[0], x2 - c[1]
            val = val * np.exp(-(d1 * d1 + d2 * d2) / (2.0 * self.envelope_s))
        return np.broadcast_arrays(val, np.asarray(t, dtype=float))[0]


class FilteredNoise(Pattern):
    """Band-limited random texture: a seeded mixture of Gaussian bumps.

    Closed-form evaluable (unlike convolved white noise) and bit-exactly
    reproducible for a given seed.
    """

    def __init__(self, seed: int, n_components: int = 40,
                 region=((0.0, 48.0), (0.0, 48.0)), s_range=(6.0, 18.0),
                 amp_range=(-1.0, 1.0), v_max=0.0):
        rng = np.random.default_rng(int(seed))
        self.centers = np.stack([
            rng.uniform(lo, hi, size=n_components) for lo, hi in region
        ], axis=1)
        self.s0 = rng.uniform(*s_range, size=n_components)
        self.amps = rng.uniform(*amp_range, size=n_components)
        if v_max > 0:
            self.vels = rng.uniform(-v_max, v_max, size=(n_components, 2))
        else:
            self.vels = np.zeros((n_components, 2))

    def eval(self, x1, x2, t):
        x1 = np.asarray(x1, dtype=float)
        x2 = np.asarray(x2, dtype=float)
        t = np.asarray(t, dtype=float)
        out = None
        for c, s0, a, v in zip(self.centers, self.s0, self.amps, self.vels):
            d1 = x1 - c[0] - v[0] * t
            d2 = x2 - c[1] - v[1] * t
            term = a * np.exp(-(d1 * d1 + d2 * d2) / (2.0 * s0))
            out = term if out is None else out + term
        return np.broadcast_arrays(out, t)[0]


_PATTERNS = {
    "gaussian_blob": GaussianBlob,
    "moving_blob": MovingBlob,
    "grating": Grating,
    "chirped_grating": ChirpedGrating,
    "filtered_noise": FilteredNoise,
}


def synthesize_test_pattern(kind: str, **params) -> Pattern:
    try:
        cls = _PATTERNS[kind]
    except KeyError:
        raise ValueError(f"unknown pattern kind {kind!r}; "
                         f"available: {sorted(_PATTERNS)}") from None
    return cls(**params)
