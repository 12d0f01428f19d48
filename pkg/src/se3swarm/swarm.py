"""Particle states, body/spatial twists and the relative-equilibrium residual."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .liegroup import E1, Pose, Twist, adjoint, orthogonality_drift


@dataclass(frozen=True)
class AgentState:
    pose: Pose
    id: int = 1

    def __post_init__(self):
        if abs(np.linalg.norm(self.pose.rotation[:, 0]) - 1.0) > 1e-12:
            raise ValueError("velocity direction x_k must have unit norm")

    @property
    def rotation(self) -> np.ndarray:
        return self.pose.rotation

    @property
    def position(self) -> np.ndarray:
        return self.pose.position

    @property
    def velocity(self) -> np.ndarray:
        return self.pose.rotation[:, 0]


@dataclass(frozen=True)
class ControlInput:
    """Body-frame steering vector u = (w, -h, q)."""

    u: np.ndarray

    def __post_init__(self):
        u = np.array(self.u, dtype=float).reshape(3)
        if not np.all(np.isfinite(u)):
            raise ValueError("control must be finite")
        object.__setattr__(self, "u", u)

    @classmethod
    def from_curvatures(cls, w: float, h: float, q: float) -> ControlInput:
        return cls(np.array([w, -h, q]))


@dataclass
class SwarmState:
    """N rigid frames stored as stacked arrays; agent ids are 1..N in order."""

    rotations: np.ndarray
    positions: np.ndarray
    time: float = 0.0
    ids: np.ndarray = field(default=None)

    def __post_init__(self):
        self.rotations = np.asarray(self.rotations, dtype=float)
        self.positions = np.asarray(self.positions, dtype=float)
        n = self.rotations.shape[0]
        if self.rotations.shape != (n, 3, 3) or self.positions.shape != (n, 3):
            raise ValueError("expected rotations (N,3,3) and positions (N,3)")
        if self.ids is None:
            self.ids = np.arange(1, n + 1)
        elif len(set(np.asarray(self.ids).tolist())) != n:
            raise ValueError("agent ids must be unique")

    @classmethod
    def from_agents(cls, agents, time: float = 0.0) -> SwarmState:
        agents = list(agents)
        return cls(
            np.stack([a.rotation for a in agents]),
            np.stack([a.position for a in agents]),
            time,
            np.array([a.id for a in agents]),
        )

    @property
    def n(self) -> int:
        return self.rotations.shape[0]

    @property
    def agents(self) -> list[AgentState]:
        return [
            AgentState(Pose(R, r), int(i))
            for R, r, i in zip(self.rotations, self.positions, self.ids)
        ]

    @property
    def velocities(self) -> np.ndarray:
        return self.rotations[:, :, 0]

    def max_orthogonality_drift(self) -> float:
        return float(orthogonality_drift(self.rotations).max())


def body_twist(u) -> Twist:
    if isinstance(u, ControlInput):
        u = u.u
    return Twist(E1, u)


def spatial_twist(a: AgentState, u) -> Twist:
    return Twist.from_vector(adjoint(a.pose) @ body_twist(u).vector)


def spatial_twists(R, r, u) -> np.ndarray:
    """Stacked spatial twists [x + r x Ru, Ru], shape (..., N, 6)."""
    R = np.asarray(R, dtype=float)
    ua = np.einsum("...ij,...j->...i", R, np.asarray(u, dtype=float))
    va = R[..., :, 0] + np.cross(r, ua)
    return np.concatenate([va, ua], axis=-1)


def twist_dispersion(states: SwarmState, controls) -> float:
    """Sum over agents of |xi_k^a - xi_av^a|^2 (not normalised by N)."""
    u = np.array([c.u if isinstance(c, ControlInput) else c for c in controls], dtype=float)
    if u.shape != (states.n, 3):
        raise ValueError(f"expected {states.n} controls, got {len(u)}")
    return float(dispersion_of(spatial_twists(states.rotations, states.positions, u)))


def dispersion_of(values) -> np.ndarray:
    """Sum of squared deviations from the mean over the agent axis (-2)."""
    values = np.asarray(values, dtype=float)
    dev = values - values.mean(axis=-2, keepdims=True)
    return np.sum(dev * dev, axis=(-2, -1))


def relative_pose(a: AgentState, b: AgentState) -> Pose:
    Rk, rk = a.rotation, a.position
    return Pose(Rk.T @ b.rotation, Rk.T @ (b.position - rk))
