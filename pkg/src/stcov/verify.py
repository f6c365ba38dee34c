"""Covariance verification: numerically certifies that warping the input and
transforming the receptive-field parameters commute, i.e. that the smoothed
(or differentiated) responses of the original and transformed videos agree
at corresponding points.

All comparisons read only the intersection of the valid regions of the two
pipelines, and relative errors are normalized by the maximum absolute value
of the reference response over that region (pointwise relative error blows
up at zero crossings of derivative responses).
"""
from __future__ import annotations

import csv
import hashlib
import itertools
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _interp
from .geom import (GeoTransform, RFParams, apply_points,
                   gradient_transform_matrices, transform_params)
from .kernels import (TIME_CAUSAL_LIMIT, TemporalKernelSpec,
                      limit_kernel_required_duration, st_kernel_eval)
from .scspace import DerivativeSpec, apply_terms, smooth, substitute_terms
from .volume import VideoVolume, erode_mask, write_volume
from .warp import WarpConfig, synthesize_test_pattern, warp_video

_INTERP_MARGIN = {"trilinear": 1, "tricubic": 2}


@dataclass(frozen=True)
class VerifyConfig:
    interpolation: str = "tricubic"
    support_radius_sigmas: float = 5.0
    temporal_tail_mass: float = 1e-6
    fd_accuracy: int = 4
    tolerance: float = 1e-2

    def to_json(self) -> dict:
        return {
            "interpolation": self.interpolation,
            "support_radius_sigmas": self.support_radius_sigmas,
            "temporal_tail_mass": self.temporal_tail_mass,
            "fd_accuracy": self.fd_accuracy,
            "tolerance": self.tolerance,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "VerifyConfig":
        return cls(**{k: obj[k] for k in cls().to_json() if k in obj})


@dataclass(frozen=True)
class CovarianceReport:
    transform: GeoTransform
    params: RFParams
    params_transformed: RFParams
    max_rel_error: float
    mean_rel_error: float
    valid_sample_count: int
    error_map: VideoVolume | None
    config_digest: str


def transform_family(g: GeoTransform) -> str:
    parts = []
    if g.Sx != 1.0:
        parts.append("spatial_scaling")
    if not np.allclose(g.A, np.eye(2), atol=1e-15):
        parts.append("affine")
    if np.any(g.u != 0.0):
        parts.append("galilean")
    if g.St != 1.0:
        parts.append("temporal_scaling")
    return "+".join(parts) if parts else "identity"


def digest(obj) -> str:
    return hashlib.sha256(
        json.dumps(obj, sort_keys=True, separators=(",", ":")).encode()
    ).hexdigest()[:16]


def check_temporal_scaling(spec: TemporalKernelSpec, St: float, tol: float = 1e-9):
    """The harness only verifies the limit kernel for St equal to an integer
    power of its distribution parameter c (the scale-quantized subgroup)."""
    if spec.family != TIME_CAUSAL_LIMIT or St == 1.0:
        return
    j = np.log(St) / np.log(spec.c)
    if abs(j - round(j)) > tol:
        raise ValueError(
            f"time-causal limit kernel verification requires St = c**j for "
            f"integer j; got St={St} with c={spec.c} (j={j:.6f})"
        )


def _compare(reference: VideoVolume, transformed: VideoVolume, g: GeoTransform,
             interpolation: str, case_digest: str, p: RFParams,
             p2: RFParams) -> CovarianceReport:
    """Interpolate `transformed` at the images of `reference`'s grid points and
    compare. The reference field is never resampled."""
    margin = _INTERP_MARGIN[interpolation]
    t_mask = erode_mask(transformed.full_mask(), [(margin, margin)] * 3)
    x1 = reference.axis_coords(0)[:, None, None]
    x2 = reference.axis_coords(1)[None, :, None]
    t = reference.axis_coords(2)[None, None, :]
    y1, y2, tp = apply_points(g, x1, x2, t)
    c1, c2, c3 = transformed.index_coords(y1, y2, tp)
    vals, inside = _interp.sample_volume(transformed.data, c1, c2, c3, interpolation)
    idx = tuple(
        np.clip(np.rint(c).astype(int), 0, n - 1)
        for c, n in zip((c1, c2, c3), transformed.shape)
    )
    valid = reference.full_mask() & inside & t_mask[idx]
    count = int(np.count_nonzero(valid))
    if count == 0:
        raise ValueError(
            "empty common valid region: enlarge the input volume so that both "
            "kernel supports and the warped preimages fit "
            f"(reference shape {reference.shape}, transformed shape {transformed.shape})"
        )
    denom = float(np.max(np.abs(reference.data[valid])))
    if denom == 0.0:
        denom = 1.0
    err = np.zeros(reference.shape)
    err[valid] = np.abs(vals[valid] - reference.data[valid]) / denom
    return CovarianceReport(
        transform=g,
        params=p,
        params_transformed=p2,
        max_rel_error=float(err[valid].max()),
        mean_rel_error=float(err[valid].mean()),
        valid_sample_count=count,
        error_map=VideoVolume(err, reference.spacing, reference.origin, valid),
        config_digest=case_digest,
    )


def verify_smoothing_covariance(f: VideoVolume, g: GeoTransform, p: RFParams,
                                spec: TemporalKernelSpec,
                                cfg: VerifyConfig | None = None) -> CovarianceReport:
    """Full pipeline: L = T*f versus L' = T'*(warped f), compared at
    corresponding points."""
    cfg = cfg or VerifyConfig()
    check_temporal_scaling(spec, g.St)
    case_digest = digest({
        "check": "smoothing", "transform": g.to_json(), "rf_params": p.to_json(),
        "temporal_kernel": spec.to_json(), "config": cfg.to_json(),
    })
    L = smooth(f, p, spec, cfg.support_radius_sigmas, cfg.temporal_tail_mass)
    fw = warp_video(f, g, WarpConfig(interpolation=cfg.interpolation))
    p2 = transform_params(p, g)
    L2 = smooth(fw, p2, spec, cfg.support_radius_sigmas, cfg.temporal_tail_mass)
    return _compare(L, L2, g, cfg.interpolation, case_digest, p, p2)


def verify_derivative_covariance(f: VideoVolume, g: GeoTransform, p: RFParams,
                                 d: DerivativeSpec, spec: TemporalKernelSpec,
                                 cfg: VerifyConfig | None = None) -> CovarianceReport:
    """Derivative responses: the operator in the original domain versus its
    image under the gradient transformation (d_p = Q^T d_p') applied in the
    transformed domain."""
    cfg = cfg or VerifyConfig()
    check_temporal_scaling(spec, g.St)
    case_digest = digest({
        "check": "derivative", "transform": g.to_json(), "rf_params": p.to_json(),
        "temporal_kernel": spec.to_json(), "derivative": d.to_json(),
        "config": cfg.to_json(),
    })
    L = smooth(f, p, spec, cfg.support_radius_sigmas, cfg.temporal_tail_mass)
    DL = apply_terms(L, d.terms(), cfg.fd_accuracy)
    fw = warp_video(f, g, WarpConfig(interpolation=cfg.interpolation))
    p2 = transform_params(p, g)
    L2 = smooth(fw, p2, spec, cfg.support_radius_sigmas, cfg.temporal_tail_mass)
    qt, _ = gradient_transform_matrices(g)
    DL2 = apply_terms(L2, substitute_terms(d.terms(), qt), cfg.fd_accuracy)
    return _compare(DL, DL2, g, cfg.interpolation, case_digest, p, p2)


def verify_kernel_transform_identity(g: GeoTransform, p: RFParams,
                                     spec: TemporalKernelSpec,
                                     n_samples: int = 21,
                                     peak_floor: float = 1e-6) -> float:
    """Direct kernel-level check of T(x', t'; p') * Sx^2 |det A| St = T(x, t; p)
    at continuous evaluation points; independent of any convolution.

    Returns the max pointwise relative error over samples at or above
    `peak_floor` of the kernel peak.
    """
    check_temporal_scaling(spec, g.St)
    if spec.family == TIME_CAUSAL_LIMIT:
        t_lo, t_hi = 0.0, limit_kernel_required_duration(p.tau, spec.c, spec.K, 1e-6)
    else:
        t_hi = 4.5 * np.sqrt(p.tau)
        t_lo = -t_hi
    eig_max = float(np.linalg.eigvalsh(p.Sigma)[-1])
    radius = 4.5 * np.sqrt(p.s * eig_max)
    t = np.linspace(t_lo, t_hi, n_samples)
    lo1 = float(np.min(p.v[0] * t)) - radius
    hi1 = float(np.max(p.v[0] * t)) + radius
    lo2 = float(np.min(p.v[1] * t)) - radius
    hi2 = float(np.max(p.v[1] * t)) + radius
    x1 = np.linspace(lo1, hi1, n_samples)[:, None, None]
    x2 = np.linspace(lo2, hi2, n_samples)[None, :, None]
    tt = t[None, None, :]
    ref = st_kernel_eval(x1, x2, tt, p, spec)
    y1, y2, tp = apply_points(g, x1, x2, tt)
    p2 = transform_params(p, g)
    jac = g.Sx**2 * abs(np.linalg.det(g.A)) * g.St
    other = jac * st_kernel_eval(y1, y2, tp, p2, spec)
    peak = float(np.max(np.abs(ref)))
    sel = np.abs(ref) >= peak_floor * peak
    return float(np.max(np.abs(other[sel] - ref[sel]) / np.abs(ref[sel])))


# ------------------------------------------------------------------- sweep ---

def expand_sweep_config(config: dict) -> list:
    """Explicit `cases` plus the deterministic Cartesian expansion of an
    optional `product` block (transforms x rf_params x temporal_kernels x
    patterns x checks)."""
    cases = list(config.get("cases", []))
    prod = config.get("product")
    if prod:
        keys = ("checks", "transforms", "rf_params", "temporal_kernels", "patterns")
        axes = [prod.get(k) or [None] for k in keys]
        for i, (check, tr, rf, tk, pat) in enumerate(itertools.product(*axes)):
            case = {
                "id": f"product-{i:04d}",
                "check": check or "smoothing",
                "transform": tr,
                "rf_params": rf,
                "temporal_kernel": tk or {"family": "non_causal_gaussian"},
            }
            if pat is not None:
                case["pattern"] = pat
            if prod.get("grid"):
                case["grid"] = prod["grid"]
            if prod.get("derivative"):
                case["derivative"] = prod["derivative"]
            cases.append(case)
    for case in cases:
        if "id" not in case:
            case["id"] = "case-" + digest(case)
    return cases


def _case_volume(case: dict, seed: int | None = None) -> VideoVolume:
    grid = case.get("grid", {})
    shape = tuple(grid.get("shape", (48, 48, 32)))
    spacing = tuple(grid.get("spacing", (1.0, 1.0, 1.0)))
    origin = tuple(grid.get("origin", (0.0, 0.0, 0.0)))
    pat = dict(case.get("pattern", {"kind": "gaussian_blob",
                                    "center": [shape[0] / 2, shape[1] / 2],
                                    "s0": 8.0}))
    kind = pat.pop("kind")
    if kind == "filtered_noise" and "seed" not in pat and seed is not None:
        pat["seed"] = seed
    return synthesize_test_pattern(kind, **pat).sample(shape, spacing, origin)


def run_case(case: dict, cfg: VerifyConfig | None = None,
             seed: int | None = None) -> dict:
    """Run one sweep case; returns a summary row (and keeps the error map)."""
    cfg = cfg or VerifyConfig()
    if "tolerance" in case:
        cfg = VerifyConfig(**{**cfg.to_json(), "tolerance": case["tolerance"]})
    g = GeoTransform.from_json(case["transform"]) if case.get("transform") \
        else GeoTransform.identity()
    p = RFParams.from_json(case["rf_params"])
    spec = TemporalKernelSpec.from_json(
        case.get("temporal_kernel", {"family": "non_causal_gaussian"}))
    check = case.get("check", "smoothing")
    row = {
        "case_id": case["id"],
        "family": transform_family(g),
        "params_digest": digest({"rf_params": p.to_json(),
                                 "temporal_kernel": spec.to_json()}),
        "max_rel_error": None,
        "mean_rel_error": None,
        "pass": False,
        "error": "",
        "error_map": None,
    }
    try:
        if check == "kernel_identity":
            tol = case.get("tolerance", 1e-3)
            err = verify_kernel_transform_identity(g, p, spec)
            row["max_rel_error"] = err
            row["mean_rel_error"] = err
            row["pass"] = err < tol
        else:
            f = _case_volume(case, seed)
            if check == "derivative":
                d = DerivativeSpec.from_json(case["derivative"])
                rep = verify_derivative_covariance(f, g, p, d, spec, cfg)
            elif check == "smoothing":
                rep = verify_smoothing_covariance(f, g, p, spec, cfg)
            else:
                raise ValueError(f"unknown check kind {check!r}")
            row.update(max_rel_error=rep.max_rel_error,
                       mean_rel_error=rep.mean_rel_error)
            row["pass"] = rep.max_rel_error < cfg.tolerance
            row["error_map"] = rep.error_map
    except Exception as exc:  # individual case failures are recorded, not fatal
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


def sweep(config: dict, out_dir=None, cfg: VerifyConfig | None = None,
          seed: int | None = None) -> list:
    """Run all cases of a sweep config in deterministic order.

    If `out_dir` is given, writes summary.csv and per-case error-map volumes
    there. Returns the list of summary rows.
    """
    cfg = cfg or VerifyConfig.from_json(config.get("config", {}))
    rows = [run_case(case, cfg, seed) for case in expand_sweep_config(config)]
    if out_dir is not None:
        write_sweep_outputs(rows, out_dir)
    return rows


def write_sweep_outputs(rows: list, out_dir) -> Path:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    summary = out_dir / "summary.csv"
    with summary.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["case_id", "family", "params_digest",
                    "max_rel_error", "mean_rel_error", "pass"])
        for row in rows:
            w.writerow([
                row["case_id"], row["family"], row["params_digest"],
                "" if row["max_rel_error"] is None else f"{row['max_rel_error']:.12e}",
                "" if row["mean_rel_error"] is None else f"{row['mean_rel_error']:.12e}",
                "PASS" if row["pass"] else "FAIL",
            ])
    for row in rows:
        if row.get("error_map") is not None:
            write_volume(row["error_map"], out_dir / f"{row['case_id']}_error_map")
    return summary
