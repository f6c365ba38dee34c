"""Algebra of composed spatial-scaling / affine / Galilean / temporal-scaling
transforms and the induced receptive-field parameter laws.

A transform acts on spatio-temporal points as

    x' = Sx * A @ (x + u * t),     t' = St * t,

and on receptive-field parameters (s, Sigma, tau, v) as

    s' = Sx**2 * s,   Sigma' = A @ Sigma @ A.T,
    tau' = St**2 * tau,   v' = (Sx * A @ v + u) / St.

Everything here is exact linear algebra; all types are immutable values.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

#: tolerance below which |det A| counts as singular
DET_EPS = 1e-12
#: tolerance for structural matrix checks (symmetry, bottom-row form)
STRUCT_TOL = 1e-12


def _as_matrix22(m) -> np.ndarray:
    a = np.array(m, dtype=float)
    if a.shape != (2, 2):
        raise ValueError(f"expected a 2x2 matrix, got shape {a.shape}")
    return a


def _as_vector2(v) -> np.ndarray:
    a = np.array(v, dtype=float).reshape(-1)
    if a.shape != (2,):
        raise ValueError(f"expected a 2-vector, got shape {a.shape}")
    return a


@dataclass(frozen=True)
class GeoTransform:
    """Composed geometric transform (Sx, A, u, St)."""

    Sx: float = 1.0
    A: np.ndarray = field(default_factory=lambda: np.eye(2))
    u: np.ndarray = field(default_factory=lambda: np.zeros(2))
    St: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "Sx", float(self.Sx))
        object.__setattr__(self, "St", float(self.St))
        object.__setattr__(self, "A", _as_matrix22(self.A))
        object.__setattr__(self, "u", _as_vector2(self.u))
        if not self.Sx > 0:
            raise ValueError(f"Sx must be positive, got {self.Sx}")
        if not self.St > 0:
            raise ValueError(f"St must be positive, got {self.St}")
        if abs(np.linalg.det(self.A)) <= DET_EPS:
            raise ValueError("A must be invertible (|det A| > %g)" % DET_EPS)

    @classmethod
    def identity(cls) -> "GeoTransform":
        return cls()

    def to_json(self) -> dict:
        return {
            "Sx": self.Sx,
            "A": self.A.tolist(),
            "u": self.u.tolist(),
            "St": self.St,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "GeoTransform":
        # missing factors default to the identity, so partial configs work
        return cls(Sx=obj.get("Sx", 1.0), A=obj.get("A", np.eye(2)),
                   u=obj.get("u", np.zeros(2)), St=obj.get("St", 1.0))


@dataclass(frozen=True)
class RFParams:
    """Receptive-field parameters (s, Sigma, tau, v)."""

    s: float
    Sigma: np.ndarray
    tau: float
    v: np.ndarray = field(default_factory=lambda: np.zeros(2))

    def __post_init__(self):
        object.__setattr__(self, "s", float(self.s))
        object.__setattr__(self, "tau", float(self.tau))
        object.__setattr__(self, "Sigma", _as_matrix22(self.Sigma))
        object.__setattr__(self, "v", _as_vector2(self.v))
        if not self.s > 0:
            raise ValueError(f"s must be positive, got {self.s}")
        if not self.tau > 0:
            raise ValueError(f"tau must be positive, got {self.tau}")
        S = self.Sigma
        if np.max(np.abs(S - S.T)) > STRUCT_TOL:
            raise ValueError("Sigma must be symmetric within %g" % STRUCT_TOL)
        if np.min(np.linalg.eigvalsh(S)) <= 0:
            raise ValueError("Sigma must be positive definite")

    def to_json(self) -> dict:
        return {
            "s": self.s,
            "Sigma": self.Sigma.tolist(),
            "tau": self.tau,
            "v": self.v.tolist(),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "RFParams":
        return cls(s=obj["s"], Sigma=obj["Sigma"], tau=obj["tau"],
                   v=obj.get("v", np.zeros(2)))


@dataclass(frozen=True)
class HomogeneousTransform:
    """3x3 matrix acting on p = (x1, x2, t)."""

    Q: np.ndarray

    def __post_init__(self):
        q = np.array(self.Q, dtype=float)
        if q.shape != (3, 3):
            raise ValueError(f"expected a 3x3 matrix, got shape {q.shape}")
        if abs(np.linalg.det(q)) <= DET_EPS:
            raise ValueError("Q must be invertible")
        object.__setattr__(self, "Q", q)

    def apply(self, x, t):
        x = _as_vector2(x)
        p = self.Q @ np.array([x[0], x[1], float(t)])
        return p[:2], p[2]


def apply_point(g: GeoTransform, x, t: float):
    """Map (x, t) -> (Sx * A @ (x + u t), St * t)."""
    x = _as_vector2(x)
    return g.Sx * (g.A @ (x + g.u * float(t))), g.St * float(t)


def apply_points(g: GeoTransform, x1, x2, t):
    """Vectorized apply_point over arrays of coordinates."""
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    t = np.asarray(t, dtype=float)
    a = g.A
    y1 = g.Sx * (a[0, 0] * (x1 + g.u[0] * t) + a[0, 1] * (x2 + g.u[1] * t))
    y2 = g.Sx * (a[1, 0] * (x1 + g.u[0] * t) + a[1, 1] * (x2 + g.u[1] * t))
    return y1, y2, g.St * t


def to_homogeneous(g: GeoTransform) -> HomogeneousTransform:
    """3x3 matrix Q with Q @ (x1, x2, t) == apply_point(g, x, t)."""
    a, u = g.A, g.u
    q = g.Sx * np.array(
        [
            [a[0, 0], a[0, 1], a[0, 0] * u[0] + a[0, 1] * u[1]],
            [a[1, 0], a[1, 1], a[1, 0] * u[0] + a[1, 1] * u[1]],
            [0.0, 0.0, g.St / g.Sx],
        ]
    )
    return HomogeneousTransform(q)


def from_homogeneous(q: np.ndarray, Sx: float, St: float) -> GeoTransform:
    """Refactor a homogeneous matrix into (Sx, A, u, St) for given scalings."""
    q = np.asarray(q, dtype=float)
    if max(abs(q[2, 0]), abs(q[2, 1])) > STRUCT_TOL * max(1.0, np.max(np.abs(q))):
        raise ValueError("bottom row of Q is not (0, 0, *): not a valid composed transform")
    A = q[:2, :2] / Sx
    u = np.linalg.solve(A, q[:2, 2] / Sx)
    return GeoTransform(Sx=Sx, A=A, u=u, St=St)


def compose(g2: GeoTransform, g1: GeoTransform) -> GeoTransform:
    """Transform equal to applying g1 first, then g2."""
    q = to_homogeneous(g2).Q @ to_homogeneous(g1).Q
    return from_homogeneous(q, Sx=g2.Sx * g1.Sx, St=g2.St * g1.St)


def inverse(g: GeoTransform) -> GeoTransform:
    q = np.linalg.inv(to_homogeneous(g).Q)
    return from_homogeneous(q, Sx=1.0 / g.Sx, St=1.0 / g.St)


def transform_params(p: RFParams, g: GeoTransform) -> RFParams:
    """Receptive-field parameter law (s', Sigma', tau', v').

    The velocity law is v' = Sx * A @ (v + u) / St: the image under the
    point transform of a trajectory moving at velocity v moves at that
    velocity in the transformed domain, which is what makes the smoothing
    covariance identity exact. It reduces to v' = v + u (pure Galilean),
    v' = Sx v (pure spatial scaling), v' = A v (pure affine) and
    v' = v / St (pure temporal scaling).
    """
    return RFParams(
        s=g.Sx**2 * p.s,
        Sigma=g.A @ p.Sigma @ g.A.T,
        tau=g.St**2 * p.tau,
        v=g.Sx * (g.A @ (p.v + g.u)) / g.St,
    )


def gradient_transform_matrices(g: GeoTransform):
    """(Q^T, Q^-T) relating gradients in the two domains.

    grad_p = Q^T grad_p' and grad_p' = Q^-T grad_p; Q^-T is the closed form

        (1 / (Sx det A)) * [[ a22, -a21, 0],
                            [-a12,  a11, 0],
                            [-Sx det A u1/St, -Sx det A u2/St, Sx det A/St]]
    """
    a, u = g.A, g.u
    det = np.linalg.det(a)
    qt = to_homogeneous(g).Q.T
    sd = g.Sx * det
    qinvt = (1.0 / sd) * np.array(
        [
            [a[1, 1], -a[1, 0], 0.0],
            [-a[0, 1], a[0, 0], 0.0],
            [-sd * u[0] / g.St, -sd * u[1] / g.St, sd / g.St],
        ]
    )
    return qt, qinvt


def transform_direction_rotation(phi: float, theta: float) -> float:
    """Direction map phi -> phi + theta (A a rotation by theta), in [0, 2*pi)."""
    return float(np.mod(phi + theta, 2.0 * np.pi))


def rotation(theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])
