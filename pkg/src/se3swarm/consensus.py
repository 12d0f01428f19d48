"""Euclidean consensus flows p' = -L p and their body-frame counterparts.

The spatial-frame functions are the reference that the body-frame propagation
(what a limited-communication agent actually runs) is checked against.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .liegroup import hat3


@dataclass
class ConsensusEnsemble:
    values: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim == 1:
            v = v[:, None]
        if v.ndim != 2 or not np.all(np.isfinite(v)):
            raise ValueError("ensemble values must be a finite (N, d) array")
        self.values = v

    @property
    def average(self) -> np.ndarray:
        return self.values.mean(axis=0)


def _values(e) -> np.ndarray:
    return e.values if isinstance(e, ConsensusEnsemble) else np.asarray(e, dtype=float)


def consensus_derivative(e, L) -> np.ndarray:
    """p_k' = sum_j a_kj (p_j - p_k) = -(L p)_k."""
    p = _values(e)
    L = np.asarray(L, dtype=float)
    if L.shape != (p.shape[0], p.shape[0]):
        raise ValueError(f"Laplacian shape {L.shape} does not match {p.shape[0]} agents")
    return -L @ p


def disagreement(e) -> float:
    p = _values(e)
    if p.shape[0] == 0:
        raise ValueError("empty ensemble")
    if p.ndim == 1:
        p = p[:, None]
    dev = p - p.mean(axis=0)
    return float(np.sum(dev * dev))


def neighbour_sum(values_body, R, L) -> np.ndarray:
    """sum_j L_kj R_k^T R_j b_j for every k, batched over leading dims of R."""
    Rt = np.swapaxes(R, -1, -2)
    spatial = np.einsum("...jab,...jb->...ja", R, values_body)
    mixed = np.einsum("kj,...ja->...ka", L, spatial)
    return np.einsum("...kab,...kb->...ka", Rt, mixed)


def body_frame_consensus_derivative(values_body, R, u, L) -> np.ndarray:
    """b_k' = hat(u_k)^T b_k - sum_j L_kj R_k^T R_j b_j."""
    values_body = np.asarray(values_body, dtype=float)
    frame = np.cross(values_body, u)  # hat(u)^T b = -u x b
    return frame - neighbour_sum(values_body, R, np.asarray(L, dtype=float))


def spatial_image_of_derivative(values_body, R, u, d_body, offset_rate=None) -> np.ndarray:
    """Time derivative of R_k b_k (+ offset) given the body derivative and R_k' = R_k hat(u_k)."""
    rot_rate = np.einsum("...kab,...kb->...ka", R @ hat3(u), values_body)
    out = rot_rate + np.einsum("...kab,...kb->...ka", R, d_body)
    if offset_rate is not None:
        out = out + offset_rate
    return out


def euler_step(p, L, h: float) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    return p - h * (np.asarray(L) @ p)


def heun_step(p, L, h: float) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    L = np.asarray(L)
    k1 = -L @ p
    k2 = -L @ (p + h * k1)
    return p + 0.5 * h * (k1 + k2)


STEPPERS = {"euler": euler_step, "heun": heun_step}


def integrate(e, schedule, t0: float, t1: float, h: float, scheme: str = "euler", record: bool = False):
    """Propagate an ensemble over a graph schedule with fixed steps.

    The Laplacian is frozen at the start of each step.  Returns the final
    ensemble, and with ``record`` also the array of visited values (K, N, d).
    """
    stepper = STEPPERS[scheme]
    p = _values(e).copy()
    if p.ndim == 1:
        p = p[:, None]
    n_steps = int(round((t1 - t0) / h))
    hist = [p.copy()] if record else None
    t = t0
    for i in range(n_steps):
        t = t0 + i * h
        p = stepper(p, schedule.laplacian_at(t), h)
        if record:
            hist.append(p.copy())
    out = ConsensusEnsemble(p, t0 + n_steps * h)
    if record:
        return out, np.stack(hist)
    return out
