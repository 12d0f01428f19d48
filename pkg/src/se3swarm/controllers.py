"""Steering laws for unit-speed particles on SE(3).

Every law is a pure function of the current frames ``R`` (..., N, 3, 3),
positions ``r`` (..., N, 3) and, for dynamic laws, body-frame consensus
variables (..., N, 3).  Controls are returned in the body frame, shape
(..., N, 3).  Leading batch dimensions are carried through untouched.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .consensus import neighbour_sum
from .liegroup import E1, ScrewParams, Twist, exp_se3_arrays, exp_so3, screw_of_twist, twist_of_screw


def _to_body(R, vec):
    return np.einsum("...kba,...kb->...ka", R, vec)


def _to_spatial(R, vec):
    return np.einsum("...kab,...kb->...ka", R, vec)


def parallel(R, r=None, sign: float = 1.0) -> np.ndarray:
    """u_k = sign * R_k^T (x_k x x_av); sign=-1 gives the balancing variant."""
    x = R[..., :, 0]
    x_av = x.mean(axis=-2, keepdims=True)
    return _to_body(R, sign * np.cross(x, x_av))


def screw_fixed(R, r, omega0) -> np.ndarray:
    """u_k = R_k^T (w0 + [(r_k - r_av) x w0 - x_av] x x_k)."""
    omega0 = np.asarray(omega0, dtype=float)
    x = R[..., :, 0]
    x_av = x.mean(axis=-2, keepdims=True)
    r_av = r.mean(axis=-2, keepdims=True)
    inner = np.cross(r - r_av, omega0) - x_av
    return _to_body(R, omega0 + np.cross(inner, x))


def screw_pitch(R, r, omega0, alpha: float) -> np.ndarray:
    """Fixed-axis law with the pitch-shaping term (targets pitch alpha / |w0|)."""
    omega0 = np.asarray(omega0, dtype=float)
    norm = float(np.linalg.norm(omega0))
    if norm == 0.0:
        raise ValueError("screw_pitch needs a nonzero rotation vector omega0")
    if not 0.0 <= alpha < 1.0:
        raise ValueError("alpha must lie in [0, 1)")
    w_hat = omega0 / norm
    x = R[..., :, 0]
    x_av = x.mean(axis=-2, keepdims=True)
    r_av = r.mean(axis=-2, keepdims=True)
    beta = x_av @ w_hat - alpha
    inner = np.cross(r - r_av, omega0) - x_av + beta[..., None] * w_hat
    return _to_body(R, omega0 + np.cross(inner, x))


def _complete_laplacian(n: int) -> np.ndarray:
    return n * np.eye(n) - np.ones((n, n))


def screw_dynamic(R, r, omega):
    """All-to-all dynamic law: returns (u, d omega / dt) in body frames.

    The consensus part is the body-frame image of
    w_k^a' = sum_j (w_j^a - w_k^a).
    """
    omega = np.asarray(omega, dtype=float)
    n = R.shape[-3]
    x_av = R[..., :, 0].mean(axis=-2, keepdims=True)
    r_av = r.mean(axis=-2, keepdims=True)
    rel_body = _to_body(R, r - r_av)
    xav_body = _to_body(R, np.broadcast_to(x_av, r.shape))
    u = omega + np.cross(np.cross(rel_body, omega) - xav_body, E1)
    d_omega = np.cross(omega, u) - neighbour_sum(omega, R, _complete_laplacian(n))
    return u, d_omega


@dataclass
class VirtualParticle:
    """Reference particle r0' = x0, x0' = w0 x x0 broadcasting its screw."""

    r0: np.ndarray
    x0: np.ndarray
    omega0: np.ndarray

    def __post_init__(self):
        self.r0 = np.asarray(self.r0, dtype=float).reshape(3)
        self.x0 = np.asarray(self.x0, dtype=float).reshape(3)
        self.omega0 = np.asarray(self.omega0, dtype=float).reshape(3)
        nx = np.linalg.norm(self.x0)
        if abs(nx - 1.0) > 1e-9:
            raise ValueError(f"virtual particle heading must be a unit vector (|x0| = {nx})")

    @property
    def v0(self) -> np.ndarray:
        return self.x0 + np.cross(self.r0, self.omega0)

    @property
    def twist(self) -> Twist:
        return Twist(self.v0, self.omega0)

    @property
    def screw(self) -> ScrewParams:
        return screw_of_twist(self.twist)

    @classmethod
    def from_screw(cls, pitch: float, axis_point, omega0, phase: float = 0.0) -> VirtualParticle:
        """Place a virtual particle on the screw with given pitch, axis and rotation vector.

        ``axis_point`` may be any point of the axis line.  Needs |pitch| |w0| <= 1
        since the heading has unit length.
        """
        omega0 = np.asarray(omega0, dtype=float)
        m = float(np.linalg.norm(omega0))
        if m == 0.0:
            raise ValueError("use a straight-line reference for omega0 = 0")
        w_hat = omega0 / m
        axial = pitch * m
        if abs(axial) > 1.0:
            raise ValueError(f"|pitch * |omega0|| = {abs(axial):.3f} exceeds 1: unreachable at unit speed")
        q = np.asarray(axis_point, dtype=float)
        q = q - (q @ w_hat) * w_hat
        # any unit vector orthogonal to the axis, rotated by `phase` about it
        seed = np.eye(3)[int(np.argmin(np.abs(w_hat)))]
        t = np.cross(w_hat, seed)
        t /= np.linalg.norm(t)
        t = exp_so3(w_hat, phase) @ t
        s = np.sqrt(max(0.0, 1.0 - axial * axial))
        x0 = axial * w_hat + s * t
        r0 = q + (s / m) * np.cross(t, w_hat)
        return cls(r0, x0, omega0)

    def expected_twist(self) -> Twist:
        return twist_of_screw(self.screw)


def step_virtual(vp: VirtualParticle, h: float) -> VirtualParticle:
    """Exact step along the reference screw (constant spatial twist)."""
    Rh, ph = exp_se3_arrays(vp.v0, vp.omega0, h)
    x0 = Rh @ vp.x0
    # renormalise: repeated rotation lets |x0| random-walk by ~1e-16 per step
    return VirtualParticle(Rh @ vp.r0 + ph, x0 / np.linalg.norm(x0), vp.omega0)


def _reference_controls(R, r, omega0, v0) -> np.ndarray:
    x = R[..., :, 0]
    va = x + np.cross(r, omega0)
    n = va.shape[-2]
    v_tilde = (va.sum(axis=-2, keepdims=True) + v0) / (n + 1)
    return _to_body(R, omega0 + np.cross(va - v_tilde, x))


def screw_reference(R, r, vp: VirtualParticle) -> np.ndarray:
    """u_k = R_k^T [w0 + (v_k^a - v~_av) x x_k], the average including the virtual particle."""
    return _reference_controls(R, r, vp.omega0, vp.v0)


@dataclass
class GroupAssignment:
    """Group index (0-based) of each agent, plus one virtual particle per group."""

    groups: np.ndarray
    virtuals: list = field(default_factory=list)

    def __post_init__(self):
        self.groups = np.asarray(self.groups)
        if self.groups.ndim != 1:
            raise ValueError("groups must be a flat list of indices")
        for i in range(len(self.virtuals)):
            if not np.any(self.groups == i):
                raise ValueError(f"group {i} has no members")

    def members(self, i: int) -> np.ndarray:
        return np.flatnonzero(self.groups == i)


def screw_multigroup(R, r, ga: GroupAssignment) -> np.ndarray:
    n = R.shape[-3]
    g = ga.groups
    if len(g) != n:
        raise ValueError(f"group assignment covers {len(g)} agents, swarm has {n}")
    bad = [k + 1 for k in range(n) if not (0 <= int(g[k]) < len(ga.virtuals))]
    if bad:
        raise ValueError(f"agents {bad} are not assigned to a group")
    u = np.empty(R.shape[:-3] + (n, 3))
    for i, vp in enumerate(ga.virtuals):
        idx = ga.members(i)
        u[..., idx, :] = _reference_controls(R[..., idx, :, :], r[..., idx, :], vp.omega0, vp.v0)
    return u


def parallel_limited(R, r, b, L):
    """u_k = e1 x b_k; b_k' = hat(u_k)^T b_k - sum_j L_kj R_k^T R_j b_j."""
    b = np.asarray(b, dtype=float)
    u = np.cross(E1, b)
    db = np.cross(b, u) - neighbour_sum(b, R, L)
    return u, db


def position_coupling(R, r, L) -> np.ndarray:
    """sum_j L_kj R_k^T r_j, formed from relative positions r_j - r_k only."""
    rel = r[..., None, :, :] - r[..., :, None, :]  # [..., k, j] = r_j - r_k
    s = np.einsum("kj,...kja->...ka", L, rel)
    return _to_body(R, s)


def screw_limited(R, r, omega, b, c, L):
    """Limited-communication screw law: returns (u, d omega, d b, d c)."""
    omega = np.asarray(omega, dtype=float)
    b = np.asarray(b, dtype=float)
    c = np.asarray(c, dtype=float)
    u = omega + np.cross(np.cross(omega, c) - b, E1)
    d_omega = np.cross(omega, u) - neighbour_sum(omega, R, L)
    d_b = np.cross(b, u) - neighbour_sum(b, R, L)
    d_c = np.cross(c, u) - E1 - neighbour_sum(c, R, L) - position_coupling(R, r, L)
    return u, d_omega, d_b, d_c


@dataclass(frozen=True)
class Neighbour:
    """What agent k may observe of neighbour j: a_kj, R_k^T R_j, R_k^T (r_j - r_k), and j's variables."""

    weight: float
    rotation: np.ndarray
    position: np.ndarray
    omega: np.ndarray | None = None
    b: np.ndarray | None = None
    c: np.ndarray | None = None


def observe(k: int, R, r, A, omega=None, b=None, c=None) -> list[Neighbour]:
    """Observation set of agent k under adjacency A (only j with a_kj > 0)."""
    out = []
    for j in np.flatnonzero(np.asarray(A)[k] > 0):
        out.append(
            Neighbour(
                float(A[k, j]),
                R[k].T @ R[j],
                R[k].T @ (r[j] - r[k]),
                None if omega is None else omega[j],
                None if b is None else b[j],
                None if c is None else c[j],
            )
        )
    return out


def _local_sum(own, nbrs, attr):
    total = np.zeros(3)
    for nb in nbrs:
        total += nb.weight * (nb.rotation @ getattr(nb, attr) - own)
    return total


def parallel_limited_local(b_k, nbrs: list[Neighbour]):
    """Per-agent form of :func:`parallel_limited` using only the observation set."""
    b_k = np.asarray(b_k, dtype=float)
    u = np.cross(E1, b_k)
    return u, np.cross(b_k, u) + _local_sum(b_k, nbrs, "b")


def screw_limited_local(omega_k, b_k, c_k, nbrs: list[Neighbour]):
    """Per-agent form of :func:`screw_limited` using only the observation set."""
    omega_k, b_k, c_k = (np.asarray(v, dtype=float) for v in (omega_k, b_k, c_k))
    u = omega_k + np.cross(np.cross(omega_k, c_k) - b_k, E1)
    d_omega = np.cross(omega_k, u) + _local_sum(omega_k, nbrs, "omega")
    d_b = np.cross(b_k, u) + _local_sum(b_k, nbrs, "b")
    pos = sum((nb.weight * nb.position for nb in nbrs), np.zeros(3))
    d_c = np.cross(c_k, u) - E1 + _local_sum(c_k, nbrs, "c") + pos
    return u, d_omega, d_b, d_c
