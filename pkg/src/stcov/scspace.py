"""Spatio-temporal smoothing of video volumes and the derivative-operator
layer on top of it.

Derivative operators are represented as polynomials in the three partial
derivatives: a mapping {(a1, a2, n): coefficient}. Directional derivatives
expand binomially, velocity-adapted derivatives multinomially, and a linear
change of variables (the gradient transformation under a geometric transform)
becomes a substitution on that polynomial. Each pure partial is evaluated by
central finite differences on the smoothed volume.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np
from scipy.ndimage import correlate1d
from scipy.signal import fftconvolve

from .geom import RFParams
from .kernels import SampledKernel3D, TemporalKernelSpec, spatiotemporal_kernel
from .volume import VideoVolume, erode_mask

MAX_DERIVATIVE_ORDER = 4

# central stencils, offsets ascending around 0, for derivative order d
_STENCILS = {
    (1, 2): np.array([-0.5, 0.0, 0.5]),
    (2, 2): np.array([1.0, -2.0, 1.0]),
    (3, 2): np.array([-0.5, 1.0, 0.0, -1.0, 0.5]),
    (4, 2): np.array([1.0, -4.0, 6.0, -4.0, 1.0]),
    (1, 4): np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0,
    (2, 4): np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0,
    (3, 4): np.array([1.0, -8.0, 13.0, 0.0, -13.0, 8.0, -1.0]) / 8.0,
    (4, 4): np.array([-1.0, 12.0, -39.0, 56.0, -39.0, 12.0, -1.0]) / 6.0,
}


# ----------------------------------------------------------- term algebra ---

def term_multiply(t1: dict, t2: dict) -> dict:
    out: dict = {}
    for (k1, c1), (k2, c2) in product(t1.items(), t2.items()):
        key = tuple(a + b for a, b in zip(k1, k2))
        out[key] = out.get(key, 0.0) + c1 * c2
    return {k: c for k, c in out.items() if c != 0.0}


def term_power(terms: dict, n: int) -> dict:
    out = {(0, 0, 0): 1.0}
    for _ in range(n):
        out = term_multiply(out, terms)
    return out


def term_add(t1: dict, t2: dict, scale: float = 1.0) -> dict:
    out = dict(t1)
    for k, c in t2.items():
        out[k] = out.get(k, 0.0) + scale * c
    return {k: c for k, c in out.items() if c != 0.0}


def directional_terms(phi: float, m: int) -> dict:
    base = {(1, 0, 0): float(np.cos(phi)), (0, 1, 0): float(np.sin(phi))}
    return term_power(base, m)


def velocity_adapted_terms(v, n: int) -> dict:
    v = np.asarray(v, dtype=float)
    base = {(1, 0, 0): v[0], (0, 1, 0): v[1], (0, 0, 1): 1.0}
    return term_power(base, n)


def substitute_terms(terms: dict, M: np.ndarray) -> dict:
    """Rewrite a derivative polynomial under d_i = sum_j M[i, j] d'_j."""
    M = np.asarray(M, dtype=float)
    basis = []
    for i in range(3):
        basis.append({
            (1, 0, 0): M[i, 0], (0, 1, 0): M[i, 1], (0, 0, 1): M[i, 2],
        })
    out: dict = {}
    for (a1, a2, n), coeff in terms.items():
        piece = {(0, 0, 0): coeff}
        for i, order in enumerate((a1, a2, n)):
            if order:
                piece = term_multiply(piece, term_power(basis[i], order))
        out = term_add(out, piece)
    return out


def total_order(terms: dict) -> int:
    return max((sum(k) for k in terms), default=0)


# --------------------------------------------------------- derivative spec ---

PARTIAL = "partial"
DIRECTIONAL = "directional"
VELOCITY_ADAPTED = "velocity_adapted"
LAPLACIAN = "laplacian"
SIMPLE_CELL = "simple_cell"
LGN = "lgn"


@dataclass(frozen=True)
class DerivativeSpec:
    """Descriptor of a spatio-temporal derivative operator.

    kind: one of partial, directional, velocity_adapted, laplacian,
    simple_cell, lgn; the relevant parameters depend on the kind.
    """

    kind: str
    orders: tuple = (0, 0, 0)        # partial: (a1, a2, n)
    phi: float = 0.0                 # directional / simple_cell
    m: int = 1                       # directional order
    m1: int = 0                      # simple_cell order along phi
    m2: int = 0                      # simple_cell order along perp(phi)
    n: int = 0                       # temporal order
    v: tuple = (0.0, 0.0)            # velocity_adapted / simple_cell velocity
    sign: int = 1                    # lgn polarity
    spatial: tuple = (0, 0)          # extra spatial partials for velocity_adapted

    def __post_init__(self):
        if self.kind not in (PARTIAL, DIRECTIONAL, VELOCITY_ADAPTED, LAPLACIAN,
                             SIMPLE_CELL, LGN):
            raise ValueError(f"unknown derivative kind {self.kind!r}")
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        order = total_order(self.terms())
        if order > MAX_DERIVATIVE_ORDER:
            raise ValueError(
                f"total derivative order {order} exceeds {MAX_DERIVATIVE_ORDER}"
            )

    def terms(self) -> dict:
        if self.kind == PARTIAL:
            a1, a2, n = self.orders
            return {(int(a1), int(a2), int(n)): 1.0}
        if self.kind == DIRECTIONAL:
            t = directional_terms(self.phi, self.m)
            return term_multiply(t, {(0, 0, int(self.n)): 1.0})
        if self.kind == VELOCITY_ADAPTED:
            t = velocity_adapted_terms(self.v, self.n)
            a1, a2 = self.spatial
            return term_multiply(t, {(int(a1), int(a2), 0): 1.0})
        if self.kind == LAPLACIAN:
            lap = {(2, 0, 0): 1.0, (0, 2, 0): 1.0}
            return term_multiply(lap, {(0, 0, int(self.n)): 1.0})
        if self.kind == LGN:
            lap = {(2, 0, 0): float(self.sign), (0, 2, 0): float(self.sign)}
            return term_multiply(lap, {(0, 0, int(self.n)): 1.0})
        # simple cell: directional along phi and perp(phi), velocity-adapted in time
        t = directional_terms(self.phi, self.m1)
        t = term_multiply(t, directional_terms(self.phi + np.pi / 2.0, self.m2))
        return term_multiply(t, velocity_adapted_terms(self.v, self.n))

    def to_json(self) -> dict:
        d = {"kind": self.kind}
        if self.kind == PARTIAL:
            d["orders"] = list(self.orders)
        elif self.kind == DIRECTIONAL:
            d.update(phi=self.phi, m=self.m, n=self.n)
        elif self.kind == VELOCITY_ADAPTED:
            d.update(v=list(self.v), n=self.n, spatial=list(self.spatial))
        elif self.kind == LAPLACIAN:
            d.update(n=self.n)
        elif self.kind == LGN:
            d.update(sign=self.sign, n=self.n)
        else:
            d.update(phi=self.phi, m1=self.m1, m2=self.m2, n=self.n, v=list(self.v))
        return d

    @classmethod
    def from_json(cls, obj: dict) -> "DerivativeSpec":
        kw = dict(obj)
        kind = kw.pop("kind")
        if "orders" in kw:
            kw["orders"] = tuple(kw["orders"])
        if "v" in kw:
            kw["v"] = tuple(kw["v"])
        if "spatial" in kw:
            kw["spatial"] = tuple(kw["spatial"])
        return cls(kind=kind, **kw)


# -------------------------------------------------------------- smoothing ---

def smooth(f: VideoVolume, p: RFParams, spec: TemporalKernelSpec,
           support_radius_sigmas: float = 5.0,
           temporal_tail_mass: float = 1e-3,
           kernel: SampledKernel3D | None = None) -> VideoVolume:
    """Convolve f with the sampled spatio-temporal kernel T(.; p, spec).

    Zero padding outside the data; the returned mask marks the interior where
    the full kernel support was available.
    """
    if kernel is None:
        kernel = spatiotemporal_kernel(p, spec, f.spacing, support_radius_sigmas,
                                       temporal_tail_mass)
    k = kernel.values * np.prod(f.spacing)
    for size, ksize, name in zip(f.shape, k.shape, "x1 x2 t".split()):
        if ksize > size:
            raise ValueError(
                f"volume too small along {name} for kernel support: "
                f"need >= {ksize} samples, have {size}"
            )
    full = fftconvolve(f.data, k, mode="full")
    sl = tuple(
        slice(o, o + n) for o, n in zip(kernel.origin, f.shape)
    )
    out = full[sl]
    mask_in = f.full_mask()
    if mask_in.all():
        extents = [
            (k.shape[a] - 1 - kernel.origin[a], kernel.origin[a]) for a in range(3)
        ]
        mask = erode_mask(mask_in, extents)
    else:
        # erode by the kernel's actual support, not its bounding box: a
        # velocity-adapted kernel occupies a sheared slab and box erosion
        # would needlessly wipe out sheared warp-valid regions
        mag = np.abs(k)
        support = mag > 1e-9 * mag.max()
        count = fftconvolve(mask_in.astype(float), support.astype(float),
                            mode="full")[sl]
        mask = count > support.sum() - 0.5
    return VideoVolume(out, f.spacing, f.origin, mask)


# ------------------------------------------------------------ derivatives ---

def _partial_derivative(data: np.ndarray, orders, spacing, accuracy: int) -> np.ndarray:
    out = data
    for axis, order in enumerate(orders):
        if order == 0:
            continue
        w = _STENCILS[(order, accuracy)] / spacing[axis] ** order
        out = correlate1d(out, w, axis=axis, mode="constant", cval=0.0)
    return out


def stencil_radius(order: int, accuracy: int) -> int:
    return 0 if order == 0 else len(_STENCILS[(order, accuracy)]) // 2


def apply_terms(L: VideoVolume, terms: dict, accuracy: int = 4) -> VideoVolume:
    """Apply a derivative polynomial to a volume by central differences."""
    if total_order(terms) > MAX_DERIVATIVE_ORDER:
        raise ValueError("total derivative order exceeds %d" % MAX_DERIVATIVE_ORDER)
    radii = [0, 0, 0]
    for key in terms:
        for a in range(3):
            radii[a] = max(radii[a], stencil_radius(key[a], accuracy))
    for size, r, name in zip(L.shape, radii, "x1 x2 t".split()):
        if size < 2 * r + 1:
            raise ValueError(f"volume too small along {name} for the stencil "
                             f"(need >= {2 * r + 1} samples)")
    out = np.zeros(L.shape)
    for key, coeff in terms.items():
        out += coeff * _partial_derivative(L.data, key, L.spacing, accuracy)
    mask = erode_mask(L.full_mask(), [(r, r) for r in radii])
    return VideoVolume(out, L.spacing, L.origin, mask)


def derivative(L: VideoVolume, d: DerivativeSpec, accuracy: int = 4) -> VideoVolume:
    return apply_terms(L, d.terms(), accuracy)


# ------------------------------------------------------- idealized models ---

def lgn_response(f: VideoVolume, s: float, tau: float, n: int = 0, sign: int = 1,
                 spec: TemporalKernelSpec | None = None,
                 accuracy: int = 4, **smooth_kw) -> VideoVolume:
    """Rotationally symmetric center-surround response: +/- Laplacian of the
    (Sigma = I, v = 0) smoothed volume, with an order-n temporal derivative."""
    spec = spec or TemporalKernelSpec()
    p = RFParams(s=s, Sigma=np.eye(2), tau=tau, v=(0.0, 0.0))
    L = smooth(f, p, spec, **smooth_kw)
    return derivative(L, DerivativeSpec(kind=LGN, sign=sign, n=n), accuracy)


def eigendirection_angles(Sigma) -> tuple:
    """Angles (in [0, pi)) of the two eigendirections of Sigma."""
    w, vec = np.linalg.eigh(np.asarray(Sigma, dtype=float))
    return tuple(float(np.mod(np.arctan2(vec[1, i], vec[0, i]), np.pi)) for i in range(2))


def is_eigendirection(Sigma, phi: float, tol: float = 1e-8) -> bool:
    Sigma = np.asarray(Sigma, dtype=float)
    w = np.linalg.eigvalsh(Sigma)
    if abs(w[1] - w[0]) <= tol * max(abs(w[1]), 1.0):
        return True  # degenerate: every direction is an eigendirection
    e = np.array([np.cos(phi), np.sin(phi)])
    r = Sigma @ e
    return float(np.linalg.norm(r - (e @ r) * e)) <= tol * float(np.linalg.norm(Sigma))


def simple_cell_response(f: VideoVolume, p: RFParams, phi: float,
                         m1: int = 1, m2: int = 0, n: int = 0,
                         spec: TemporalKernelSpec | None = None,
                         accuracy: int = 4, **smooth_kw) -> VideoVolume:
    """Oriented response: directional derivatives along phi and perp(phi) and a
    velocity-adapted temporal derivative, applied to the (s, Sigma, tau, v)
    smoothed volume. phi must be an eigendirection of Sigma."""
    spec = spec or TemporalKernelSpec()
    if not is_eigendirection(p.Sigma, phi):
        raise ValueError(
            f"phi={phi} is not an eigendirection of Sigma (within 1e-8); "
            f"eigendirections are {eigendirection_angles(p.Sigma)}"
        )
    L = smooth(f, p, spec, **smooth_kw)
    d = DerivativeSpec(kind=SIMPLE_CELL, phi=phi, m1=m1, m2=m2, n=n,
                       v=tuple(p.v))
    return derivative(L, d, accuracy)
