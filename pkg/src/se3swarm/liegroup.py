"""SO(3)/SE(3) primitives: hat/vee, exponentials, adjoint and screw coordinates.

Twists are ordered (linear, angular), i.e. xi = [v; w].  Array functions accept
leading batch dimensions so the engine can push a whole swarm through one call.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

ORTHO_TOL = 1e-9
SKEW_TOL = 1e-9

# below this rotation angle the Rodrigues coefficients come from their series
_SERIES_ANGLE = 1e-2

E1 = np.array([1.0, 0.0, 0.0])
E2 = np.array([0.0, 1.0, 0.0])
E3 = np.array([0.0, 0.0, 1.0])


def hat3(v) -> np.ndarray:
    """Skew matrix with ``hat3(v) @ w == cross(v, w)``; batched over leading dims."""
    v = np.asarray(v, dtype=float)
    out = np.zeros(v.shape[:-1] + (3, 3))
    out[..., 0, 1] = -v[..., 2]
    out[..., 0, 2] = v[..., 1]
    out[..., 1, 0] = v[..., 2]
    out[..., 1, 2] = -v[..., 0]
    out[..., 2, 0] = -v[..., 1]
    out[..., 2, 1] = v[..., 0]
    return out


def vee3(m, tol: float = SKEW_TOL) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    asym = np.abs(m + np.swapaxes(m, -1, -2)).max() if m.size else 0.0
    if asym > tol:
        raise ValueError(f"vee3 expects a skew-symmetric matrix (|M + M^T| = {asym:.3e})")
    return np.stack([m[..., 2, 1], m[..., 0, 2], m[..., 1, 0]], axis=-1)


def _rodrigues_coeffs(theta: np.ndarray):
    """Return sin(t)/t, (1-cos t)/t^2, (t-sin t)/t^3 with a series near zero."""
    small = theta < _SERIES_ANGLE
    t = np.where(small, 1.0, theta)
    t2 = theta * theta
    a = np.where(small, 1.0 - t2 / 6.0 + t2 * t2 / 120.0 - t2**3 / 5040.0, np.sin(t) / t)
    b = np.where(small, 0.5 - t2 / 24.0 + t2 * t2 / 720.0 - t2**3 / 40320.0, (1.0 - np.cos(t)) / t**2)
    c = np.where(
        small,
        1.0 / 6.0 - t2 / 120.0 + t2 * t2 / 5040.0 - t2**3 / 362880.0,
        (t - np.sin(t)) / t**3,
    )
    return a, b, c


def exp_so3(omega, h: float = 1.0) -> np.ndarray:
    """Rotation ``expm(h * hat3(omega))`` by the Rodrigues formula (batched)."""
    w = h * np.asarray(omega, dtype=float)
    theta = np.linalg.norm(w, axis=-1)
    a, b, _ = _rodrigues_coeffs(theta)
    W = hat3(w)
    W2 = W @ W
    return np.eye(3) + a[..., None, None] * W + b[..., None, None] * W2


def exp_se3_arrays(v, omega, h: float = 1.0):
    """Batched ``expm(h * hat_se3(v, omega))`` returned as (rotation, translation)."""
    v = h * np.asarray(v, dtype=float)
    w = h * np.asarray(omega, dtype=float)
    theta = np.linalg.norm(w, axis=-1)
    a, b, c = _rodrigues_coeffs(theta)
    W = hat3(w)
    W2 = W @ W
    R = np.eye(3) + a[..., None, None] * W + b[..., None, None] * W2
    # translation block of the SE(3) exponential: V = I + b W + c W^2
    Wv = np.cross(w, v)
    W2v = np.cross(w, Wv)
    p = v + b[..., None] * Wv + c[..., None] * W2v
    return R, p


def is_rotation(R, tol: float = ORTHO_TOL) -> bool:
    R = np.asarray(R, dtype=float)
    if R.shape[-2:] != (3, 3) or not np.all(np.isfinite(R)):
        return False
    drift = orthogonality_drift(R)
    return bool(np.all(drift <= tol) and np.all(np.abs(np.linalg.det(R) - 1.0) <= tol))


def orthogonality_drift(R) -> np.ndarray:
    """Frobenius norm of R^T R - I, batched."""
    R = np.asarray(R, dtype=float)
    D = np.swapaxes(R, -1, -2) @ R - np.eye(3)
    return np.sqrt(np.sum(D * D, axis=(-2, -1)))


@dataclass(frozen=True)
class Pose:
    rotation: np.ndarray
    position: np.ndarray

    def __post_init__(self):
        R = np.array(self.rotation, dtype=float)
        r = np.array(self.position, dtype=float).reshape(3)
        if not is_rotation(R):
            raise ValueError("Pose rotation must be orthonormal with det +1")
        object.__setattr__(self, "rotation", R)
        object.__setattr__(self, "position", r)

    @classmethod
    def identity(cls) -> Pose:
        return cls(np.eye(3), np.zeros(3))

    def compose(self, other: Pose) -> Pose:
        return Pose(self.rotation @ other.rotation, self.rotation @ other.position + self.position)

    def inverse(self) -> Pose:
        Rt = self.rotation.T
        return Pose(Rt, -Rt @ self.position)

    def matrix(self) -> np.ndarray:
        g = np.eye(4)
        g[:3, :3] = self.rotation
        g[:3, 3] = self.position
        return g

    def __matmul__(self, other: Pose) -> Pose:
        return self.compose(other)


@dataclass(frozen=True)
class Twist:
    linear: np.ndarray
    angular: np.ndarray

    def __post_init__(self):
        v = np.array(self.linear, dtype=float).reshape(3)
        w = np.array(self.angular, dtype=float).reshape(3)
        if not (np.all(np.isfinite(v)) and np.all(np.isfinite(w))):
            raise ValueError("Twist components must be finite")
        object.__setattr__(self, "linear", v)
        object.__setattr__(self, "angular", w)

    @property
    def vector(self) -> np.ndarray:
        return np.concatenate([self.linear, self.angular])

    @classmethod
    def from_vector(cls, xi) -> Twist:
        xi = np.asarray(xi, dtype=float)
        return cls(xi[:3], xi[3:])


def hat_se3(xi: Twist) -> np.ndarray:
    m = np.zeros((4, 4))
    m[:3, :3] = hat3(xi.angular)
    m[:3, 3] = xi.linear
    return m


def vee_se3(m) -> Twist:
    m = np.asarray(m, dtype=float)
    if np.abs(m[3]).max() > SKEW_TOL:
        raise ValueError("last row of an se(3) element must vanish")
    return Twist(m[:3, 3], vee3(m[:3, :3]))


def exp_se3(xi: Twist, h: float = 1.0) -> Pose:
    R, p = exp_se3_arrays(xi.linear, xi.angular, h)
    return Pose(R, p)


def adjoint(g: Pose) -> np.ndarray:
    R, r = g.rotation, g.position
    ad = np.zeros((6, 6))
    ad[:3, :3] = R
    ad[3:, 3:] = R
    ad[:3, 3:] = hat3(r) @ R
    return ad


@dataclass(frozen=True)
class ScrewParams:
    """Pitch, axis line (point of minimal norm + unit direction) and magnitude.

    ``pitch`` is ``math.inf`` for a pure translation.
    """

    pitch: float
    axis_point: np.ndarray
    axis_direction: np.ndarray
    magnitude: float

    @property
    def is_translation(self) -> bool:
        return math.isinf(self.pitch)


def screw_of_twist(xi: Twist, zero_tol: float = 0.0) -> ScrewParams:
    v, w = xi.linear, xi.angular
    nw = float(np.linalg.norm(w))
    if nw > zero_tol:
        return ScrewParams(
            pitch=float(w @ v) / nw**2,
            axis_point=np.cross(w, v) / nw**2,
            axis_direction=w / nw,
            magnitude=nw,
        )
    nv = float(np.linalg.norm(v))
    if nv == 0.0:
        raise ValueError("the zero twist has no screw")
    return ScrewParams(pitch=math.inf, axis_point=np.zeros(3), axis_direction=v / nv, magnitude=nv)


def twist_of_screw(screw: ScrewParams) -> Twist:
    """Inverse of :func:`screw_of_twist` (up to the choice of axis representative)."""
    d = np.asarray(screw.axis_direction, dtype=float)
    if screw.is_translation:
        return Twist(screw.magnitude * d, np.zeros(3))
    w = screw.magnitude * d
    q = np.asarray(screw.axis_point, dtype=float)
    return Twist(-np.cross(w, q) + screw.pitch * w, w)


def screw_motion(screw: ScrewParams, point, t: float) -> np.ndarray:
    """Image at time ``t`` of a spatial point carried by the screw motion."""
    point = np.asarray(point, dtype=float)
    d = np.asarray(screw.axis_direction, dtype=float)
    if screw.is_translation:
        return point + t * screw.magnitude * d
    theta = t * screw.magnitude
    q = np.asarray(screw.axis_point, dtype=float)
    return q + exp_so3(d, theta) @ (point - q) + screw.pitch * theta * d


def angle_between(a, b) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return float(np.arctan2(np.linalg.norm(np.cross(a, b)), a @ b))


def line_distance(p1, d1, p2, d2) -> float:
    """Distance between the lines p1 + s d1 and p2 + s d2."""
    p1, d1, p2, d2 = (np.asarray(x, dtype=float) for x in (p1, d1, p2, d2))
    d1 = d1 / np.linalg.norm(d1)
    d2 = d2 / np.linalg.norm(d2)
    n = np.cross(d1, d2)
    nn = np.linalg.norm(n)
    if nn < 1e-12:
        return float(np.linalg.norm(np.cross(p2 - p1, d1)))
    return float(abs((p2 - p1) @ n) / nn)
