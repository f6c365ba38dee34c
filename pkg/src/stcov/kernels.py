"""Sampled smoothing kernels: 2-D affine Gaussian, 1-D temporal Gaussian, and
the time-causal limit kernel realized as a finite cascade of truncated
exponentials.

The limit kernel is defined through its Fourier transform, a product of
first-order low-pass factors 1/(1 + i*mu_k*omega) with geometrically spaced
time constants mu_k = c**-k * sqrt(c**2 - 1) * sqrt(tau). The truncated
cascade (K factors) has the exact closed form

    psi(t) = sum_k B_k * exp(-t/mu_k) / mu_k     (t >= 0),

with partial-fraction coefficients B_k = prod_{j != k} 1/(1 - mu_j/mu_k).
That closed form is what gets sampled here; the tests cross-check it against
direct numerical convolution of the exponential factors and against the
Fourier product.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .geom import RFParams

GAUSSIAN = "non_causal_gaussian"
TIME_CAUSAL_LIMIT = "time_causal_limit"


@dataclass(frozen=True)
class TemporalKernelSpec:
    """Choice of temporal smoothing family."""

    family: str = GAUSSIAN
    c: float | None = None
    K: int | None = None

    def __post_init__(self):
        if self.family not in (GAUSSIAN, TIME_CAUSAL_LIMIT):
            raise ValueError(f"unknown temporal kernel family {self.family!r}")
        if self.family == TIME_CAUSAL_LIMIT:
            if self.c is None or not self.c > 1:
                raise ValueError("time-causal limit kernel requires c > 1")
            # below K = 4 the truncated cascade's variance deviates from tau
            # by more than the documented 1% budget
            if self.K is None or int(self.K) < 4:
                raise ValueError("time-causal limit kernel requires K >= 4")
            object.__setattr__(self, "c", float(self.c))
            object.__setattr__(self, "K", int(self.K))

    @property
    def causal(self) -> bool:
        return self.family == TIME_CAUSAL_LIMIT

    def to_json(self) -> dict:
        d = {"family": self.family}
        if self.family == TIME_CAUSAL_LIMIT:
            d.update(c=self.c, K=self.K)
        return d

    @classmethod
    def from_json(cls, obj: dict) -> "TemporalKernelSpec":
        return cls(family=obj["family"], c=obj.get("c"), K=obj.get("K"))


@dataclass(frozen=True)
class SampledKernel1D:
    values: np.ndarray
    origin: int
    spacing: float = 1.0
    causal: bool = False

    def mass(self) -> float:
        return float(np.sum(self.values) * self.spacing)

    def coords(self) -> np.ndarray:
        return (np.arange(len(self.values)) - self.origin) * self.spacing


@dataclass(frozen=True)
class SampledKernel2D:
    values: np.ndarray
    origin: tuple
    spacing: tuple = (1.0, 1.0)

    def mass(self) -> float:
        return float(np.sum(self.values) * self.spacing[0] * self.spacing[1])

    def coords(self):
        i = (np.arange(self.values.shape[0]) - self.origin[0]) * self.spacing[0]
        j = (np.arange(self.values.shape[1]) - self.origin[1]) * self.spacing[1]
        return i, j


@dataclass(frozen=True)
class SampledKernel3D:
    values: np.ndarray
    origin: tuple
    spacing: tuple = (1.0, 1.0, 1.0)
    causal: bool = False

    def mass(self) -> float:
        return float(np.sum(self.values) * np.prod(self.spacing))

    def coords(self):
        return tuple(
            (np.arange(self.values.shape[a]) - self.origin[a]) * self.spacing[a]
            for a in range(3)
        )


# ---------------------------------------------------------------- spatial ---

def gaussian_2d_eval(x1, x2, s: float, Sigma) -> np.ndarray:
    """Continuous 2-D affine Gaussian with covariance s * Sigma, unit mass."""
    Sigma = np.asarray(Sigma, dtype=float)
    si = np.linalg.inv(Sigma)
    norm = 1.0 / (2.0 * np.pi * s * np.sqrt(np.linalg.det(Sigma)))
    q = si[0, 0] * x1 * x1 + 2.0 * si[0, 1] * x1 * x2 + si[1, 1] * x2 * x2
    return norm * np.exp(-q / (2.0 * s))


def affine_gaussian_2d(s: float, Sigma, support_radius_sigmas: float = 5.0,
                       spacing=1.0) -> SampledKernel2D:
    """Sample the affine Gaussian on a centered grid covering the support."""
    if not s > 0:
        raise ValueError(f"s must be positive, got {s}")
    Sigma = np.asarray(Sigma, dtype=float)
    eig = np.linalg.eigvalsh((Sigma + Sigma.T) / 2)
    if np.max(np.abs(Sigma - Sigma.T)) > 1e-12 or eig[0] <= 0:
        raise ValueError("Sigma must be symmetric positive definite")
    dx, dy = (spacing, spacing) if np.isscalar(spacing) else spacing
    radius = support_radius_sigmas * np.sqrt(s * eig[-1])
    r1 = max(1, int(np.ceil(radius / dx)))
    r2 = max(1, int(np.ceil(radius / dy)))
    x1 = (np.arange(-r1, r1 + 1) * dx)[:, None]
    x2 = (np.arange(-r2, r2 + 1) * dy)[None, :]
    return SampledKernel2D(gaussian_2d_eval(x1, x2, s, Sigma), (r1, r2), (dx, dy))


# --------------------------------------------------------------- temporal ---

def gaussian_1d_eval(t, tau: float) -> np.ndarray:
    return np.exp(-np.asarray(t, dtype=float) ** 2 / (2.0 * tau)) / np.sqrt(2.0 * np.pi * tau)


def temporal_gaussian(tau: float, support_radius_sigmas: float = 5.0,
                      spacing: float = 1.0) -> SampledKernel1D:
    if not tau > 0:
        raise ValueError(f"tau must be positive, got {tau}")
    r = max(1, int(np.ceil(support_radius_sigmas * np.sqrt(tau) / spacing)))
    t = np.arange(-r, r + 1) * spacing
    return SampledKernel1D(gaussian_1d_eval(t, tau), r, spacing, causal=False)


def limit_kernel_time_constants(tau: float, c: float, K: int) -> np.ndarray:
    """Time constants mu_k = c**-k sqrt(c**2-1) sqrt(tau), k = 1..K."""
    k = np.arange(1, K + 1)
    return c ** (-k.astype(float)) * np.sqrt(c * c - 1.0) * np.sqrt(tau)


def _partial_fraction_coeffs(mu: np.ndarray) -> np.ndarray:
    ratio = mu[None, :] / mu[:, None]  # ratio[k, j] = mu_j / mu_k
    np.fill_diagonal(ratio, 0.0)
    with np.errstate(divide="ignore"):
        terms = 1.0 / (1.0 - ratio)
    np.fill_diagonal(terms, 1.0)
    return np.prod(terms, axis=1)


def limit_kernel_eval(t, tau: float, c: float, K: int) -> np.ndarray:
    """Closed-form K-truncated cascade of truncated exponentials; 0 for t < 0."""
    mu = limit_kernel_time_constants(tau, c, K)
    b = _partial_fraction_coeffs(mu)
    t = np.asarray(t, dtype=float)
    tt = np.where(t >= 0, t, 0.0)
    vals = np.einsum("k,k...->...", b / mu, np.exp(-tt[None, ...] / mu.reshape((-1,) + (1,) * t.ndim)))
    return np.where(t >= 0, vals, 0.0)


def limit_kernel_transfer(omega, tau: float, c: float, K: int) -> np.ndarray:
    """Truncated Fourier product prod_k 1/(1 + i mu_k omega)."""
    mu = limit_kernel_time_constants(tau, c, K)
    omega = np.asarray(omega, dtype=float)
    return np.prod(1.0 / (1.0 + 1j * mu.reshape((-1,) + (1,) * omega.ndim) * omega), axis=0)


def limit_kernel_tail_mass(T: float, tau: float, c: float, K: int) -> float:
    """Mass of the cascade beyond time T (exact)."""
    mu = limit_kernel_time_constants(tau, c, K)
    b = _partial_fraction_coeffs(mu)
    return float(np.sum(b * np.exp(-float(T) / mu)))


def limit_kernel_required_duration(tau: float, c: float, K: int,
                                   tail_mass: float = 1e-3) -> float:
    """Smallest T with tail mass below `tail_mass`."""
    mu1 = limit_kernel_time_constants(tau, c, K)[0]
    hi = mu1
    while limit_kernel_tail_mass(hi, tau, c, K) > tail_mass:
        hi *= 2.0
    return float(brentq(lambda T: limit_kernel_tail_mass(T, tau, c, K) - tail_mass,
                        0.0, hi, xtol=1e-9 * mu1))


def time_causal_limit_kernel(tau: float, spec: TemporalKernelSpec,
                             duration_frames: int | None = None,
                             spacing: float = 1.0,
                             tail_mass: float = 1e-3) -> SampledKernel1D:
    """Sample the truncated limit-kernel cascade on t = 0, spacing, 2*spacing, ...

    Rejects a duration that captures less than 1 - tail_mass of the kernel
    mass, reporting the required number of frames.
    """
    if spec.family != TIME_CAUSAL_LIMIT:
        raise ValueError("spec.family must be the time-causal limit kernel")
    if not tau > 0:
        raise ValueError(f"tau must be positive, got {tau}")
    needed = limit_kernel_required_duration(tau, spec.c, spec.K, tail_mass)
    needed_frames = int(np.ceil(needed / spacing)) + 1
    if duration_frames is None:
        duration_frames = needed_frames
    elif duration_frames < needed_frames:
        raise ValueError(
            f"duration_frames={duration_frames} captures less than "
            f"{1 - tail_mass:.5f} of the kernel mass; need >= {needed_frames} "
            f"frames at spacing {spacing}"
        )
    t = np.arange(duration_frames) * spacing
    return SampledKernel1D(limit_kernel_eval(t, tau, spec.c, spec.K),
                           0, spacing, causal=True)


def limit_kernel_moments(tau: float, c: float, K: int):
    """(mean, variance) of the truncated cascade: sum mu_k, sum mu_k**2."""
    mu = limit_kernel_time_constants(tau, c, K)
    return float(np.sum(mu)), float(np.sum(mu * mu))


def temporal_kernel(tau: float, spec: TemporalKernelSpec,
                    support_radius_sigmas: float = 5.0, spacing: float = 1.0,
                    tail_mass: float = 1e-3,
                    duration_frames: int | None = None) -> SampledKernel1D:
    if spec.family == GAUSSIAN:
        return temporal_gaussian(tau, support_radius_sigmas, spacing)
    return time_causal_limit_kernel(tau, spec, duration_frames, spacing, tail_mass)


def temporal_kernel_eval(t, tau: float, spec: TemporalKernelSpec) -> np.ndarray:
    if spec.family == GAUSSIAN:
        return gaussian_1d_eval(t, tau)
    return limit_kernel_eval(t, tau, spec.c, spec.K)


# ---------------------------------------------------------- spatio-temporal ---

def st_kernel_eval(x1, x2, t, p: RFParams, spec: TemporalKernelSpec) -> np.ndarray:
    """Continuous T(x, t) = g(x - v t; s, Sigma) h(t; tau) at arbitrary points."""
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    t = np.asarray(t, dtype=float)
    g = gaussian_2d_eval(x1 - p.v[0] * t, x2 - p.v[1] * t, p.s, p.Sigma)
    return g * temporal_kernel_eval(t, p.tau, spec)


def spatiotemporal_kernel(p: RFParams, spec: TemporalKernelSpec,
                          spacing=(1.0, 1.0, 1.0),
                          support_radius_sigmas: float = 5.0,
                          temporal_tail_mass: float = 1e-3,
                          duration_frames: int | None = None) -> SampledKernel3D:
    """Sample T on a grid: per temporal sample t_j, the spatial slice
    g(x - v t_j; s, Sigma) * h(t_j; tau). The spatial grid covers the
    velocity-drifted support for all temporal samples."""
    dx, dy, dt = spacing
    tk = temporal_kernel(p.tau, spec, support_radius_sigmas, dt,
                         temporal_tail_mass, duration_frames)
    t = tk.coords()
    eig = np.linalg.eigvalsh(p.Sigma)
    radius = support_radius_sigmas * np.sqrt(p.s * eig[-1])
    lo1 = np.min(p.v[0] * t) - radius
    hi1 = np.max(p.v[0] * t) + radius
    lo2 = np.min(p.v[1] * t) - radius
    hi2 = np.max(p.v[1] * t) + radius
    i = np.arange(int(np.floor(lo1 / dx)), int(np.ceil(hi1 / dx)) + 1)
    j = np.arange(int(np.floor(lo2 / dy)), int(np.ceil(hi2 / dy)) + 1)
    x1 = (i * dx)[:, None, None]
    x2 = (j * dy)[None, :, None]
    tt = t[None, None, :]
    g = gaussian_2d_eval(x1 - p.v[0] * tt, x2 - p.v[1] * tt, p.s, p.Sigma)
    values = g * tk.values[None, None, :]
    return SampledKernel3D(values, (-i[0], -j[0], tk.origin), (dx, dy, dt),
                           causal=tk.causal)
