"""Closed-loop simulation: geometric stepping, metrics and equilibrium classification.

Poses advance with the frozen-twist update g+ = g exp(h xi(u)), which is exact
whenever the control is constant over the step.  Consensus variables live in
body frames; their neighbour coupling is integrated explicitly while the frame
rotation term is absorbed by the same exponential that moves the pose, so the
spatial images follow the chosen explicit scheme for -L p exactly.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field, fields, replace

import numpy as np
from scipy.spatial.transform import Rotation as _Rot

from . import controllers as ctl
from .config import SimConfig
from .consensus import disagreement
from .liegroup import E1, ScrewParams, Twist, exp_se3_arrays, orthogonality_drift, screw_of_twist
from .swarm import dispersion_of, spatial_twists

CONSENSUS_COLUMNS = {"omega": ("w1", "w2", "w3"), "b": ("b1", "b2", "b3"), "c": ("c1", "c2", "c3")}
# consensus variables that are points (c_k^a = R_k c_k + r_k) rather than free vectors
_POINT_VARIABLES = ("c",)


class IntegrationError(RuntimeError):
    """Raised when a step produces non-finite values."""


@dataclass
class SimState:
    """Swarm state; arrays may carry a leading batch dimension."""

    t: float
    R: np.ndarray
    r: np.ndarray
    cons: dict = field(default_factory=dict)
    virtuals: list = field(default_factory=list)

    def spatial_consensus(self, name: str) -> np.ndarray:
        val = np.einsum("...kab,...kb->...ka", self.R, self.cons[name])
        if name in _POINT_VARIABLES:
            val = val + self.r
        return val


def _draw(cfg: SimConfig, seed: int):
    n = cfg.n_agents
    ini = cfg.initial
    rng = np.random.default_rng(seed)
    R = _Rot.random(n, random_state=rng).as_matrix()
    r = rng.uniform(-ini.position_half_width, ini.position_half_width, (n, 3))
    spatial = {}
    centers = {"omega": ini.omega_center, "b": ini.b_center, "c": ini.c_center}
    for name in cfg.consensus_variables:
        w = ini.consensus_half_width
        spatial[name] = np.asarray(centers[name]) + rng.uniform(-w, w, (n, 3))
    return R, r, spatial, "spatial"


def initial_state(cfg: SimConfig, seed: int | None = None) -> SimState:
    ex = cfg.initial.explicit
    if ex is not None:
        R = np.array(ex["rotations"], dtype=float)
        r = np.array(ex["positions"], dtype=float)
        frame = ex.get("consensus_frame", "spatial")
        given = {k: np.array(ex[k], dtype=float) for k in cfg.consensus_variables if k in ex}
        if len(given) != len(cfg.consensus_variables):
            # fill missing consensus values from the seeded draw
            _, _, drawn, _ = _draw(cfg, cfg.seed if seed is None else seed)
            for k in cfg.consensus_variables:
                if k not in given:
                    given[k] = drawn[k] if frame == "spatial" else _to_body_vals(R, r, k, drawn[k])
    else:
        R, r, given, frame = _draw(cfg, cfg.seed if seed is None else seed)
    cons = {}
    for k, v in given.items():
        cons[k] = _to_body_vals(R, r, k, v) if frame == "spatial" else v
    return SimState(0.0, R, r, cons, _virtuals(cfg))


def _to_body_vals(R, r, name, spatial):
    if name in _POINT_VARIABLES:
        spatial = spatial - r
    return np.einsum("...kba,...kb->...ka", R, spatial)


def _virtuals(cfg: SimConfig) -> list:
    if cfg.law.name == "screw_reference":
        return [cfg.law.virtual_particle()]
    if cfg.law.name == "screw_multigroup":
        return list(cfg.law.group_assignment(cfg.n_agents).virtuals)
    return []


def batch_initial_state(cfg: SimConfig, seeds) -> SimState:
    states = [initial_state(cfg, s) for s in seeds]
    return SimState(
        0.0,
        np.stack([s.R for s in states]),
        np.stack([s.r for s in states]),
        {k: np.stack([s.cons[k] for s in states]) for k in states[0].cons},
        states[0].virtuals,
    )


class LawEvaluator:
    """Maps a state to (body controls, body consensus derivatives) for the configured law."""

    def __init__(self, cfg: SimConfig):
        self.cfg = cfg
        law = cfg.law
        self.name = law.name
        self.omega0 = None if law.omega0 is None else np.asarray(law.omega0, dtype=float)
        self.groups = law.group_assignment(cfg.n_agents) if law.name == "screw_multigroup" else None
        self.schedule = cfg.graph

    def reference_omega(self, state: SimState):
        """Rotation vector the S potential is measured against (None if undefined)."""
        if self.name in ("screw_fixed", "screw_pitch"):
            return self.omega0
        if self.name == "screw_reference":
            return state.virtuals[0].omega0
        if self.name in ("screw_dynamic", "screw_limited"):
            return state.spatial_consensus("omega").mean(axis=-2)
        return None

    def __call__(self, R, r, cons: dict, t: float, virtuals=None):
        name = self.name
        if name in ("parallel", "balanced"):
            return ctl.parallel(R, r, self.cfg.law.sign), {}
        if name == "screw_fixed":
            return ctl.screw_fixed(R, r, self.omega0), {}
        if name == "screw_pitch":
            return ctl.screw_pitch(R, r, self.omega0, self.cfg.law.alpha), {}
        if name == "screw_reference":
            return ctl.screw_reference(R, r, virtuals[0]), {}
        if name == "screw_multigroup":
            ga = ctl.GroupAssignment(self.groups.groups, virtuals)
            return ctl.screw_multigroup(R, r, ga), {}
        if name == "screw_dynamic":
            u, dw = ctl.screw_dynamic(R, r, cons["omega"])
            return u, {"omega": dw}
        L = self.schedule.laplacian_at(t)
        if name == "parallel_limited":
            u, db = ctl.parallel_limited(R, r, cons["b"], L)
            return u, {"b": db}
        if name == "screw_limited":
            u, dw, db, dc = ctl.screw_limited(R, r, cons["omega"], cons["b"], cons["c"], L)
            return u, {"omega": dw, "b": db, "c": dc}
        raise ValueError(f"unknown law {name!r}")

    def evaluate(self, state: SimState):
        return self(state.R, state.r, state.cons, state.t, state.virtuals)


def reorthonormalize(R):
    """One Newton step toward the polar factor; removes accumulated rounding drift.

    The correction is quadratic in the drift, so on exact rotations it is a no-op
    up to rounding and it never lets |R^T R - I| build up over long runs.
    """
    E = np.swapaxes(R, -1, -2) @ R
    return 0.5 * R @ (3.0 * np.eye(3) - E)


def _coupling_rates(cons, derivs, u):
    """Body-frame derivative minus the frame-rotation term, per variable."""
    rates = {}
    for name, val in cons.items():
        rate = derivs[name] - np.cross(val, u)
        if name in _POINT_VARIABLES:
            rate = rate + E1
        rates[name] = rate
    return rates


def step(state: SimState, u, derivs: dict, h: float, scheme: str = "euler", rederive=None) -> SimState:
    """Advance one step of size h with controls frozen over the step.

    ``rederive(cons) -> (u, derivs)`` re-evaluates the law at intermediate
    consensus values with the poses frozen; it is needed for ``scheme="heun"``.
    """
    u = np.asarray(u, dtype=float)
    if not np.all(np.isfinite(u)):
        bad = np.argwhere(~np.isfinite(u))[0]
        raise IntegrationError(f"non-finite control at t={state.t:.6g} (index {tuple(bad)})")
    Rs, ps = exp_se3_arrays(np.broadcast_to(E1, u.shape), u, h)
    R_new = reorthonormalize(state.R @ Rs)
    r_new = state.r + np.einsum("...kab,...kb->...ka", state.R, ps)
    cons_new = {}
    if state.cons:
        rates = _coupling_rates(state.cons, derivs, u)
        if scheme == "heun":
            mid = {k: v + h * rates[k] for k, v in state.cons.items()}
            u2, d2 = rederive(mid)
            rates2 = _coupling_rates(mid, d2, u2)
            rates = {k: 0.5 * (rates[k] + rates2[k]) for k in rates}
        elif scheme != "euler":
            raise ValueError(f"unknown consensus scheme {scheme!r}")
        RsT = np.swapaxes(Rs, -1, -2)
        for k, v in state.cons.items():
            w = v + h * rates[k]
            if k in _POINT_VARIABLES:
                w = w - ps
            cons_new[k] = np.einsum("...kab,...kb->...ka", RsT, w)
            if not np.all(np.isfinite(cons_new[k])):
                raise IntegrationError(f"non-finite consensus variable {k} at t={state.t:.6g}")
    virtuals = [ctl.step_virtual(vp, h) for vp in state.virtuals]
    return SimState(state.t + h, R_new, r_new, cons_new, virtuals)


@dataclass
class MetricsRecord:
    t: float
    V: float
    V_x: float
    S: float | None
    Q: float | None
    U: float | None
    x_av_norm: float
    twist_dispersion: float
    ortho_drift: float
    unit_drift: float
    disagreement_omega: float | None = None
    disagreement_b: float | None = None
    disagreement_c: float | None = None
    pitches: list = field(default_factory=list)

    SCALARS = (
        "t", "V", "V_x", "S", "Q", "U", "x_av_norm", "twist_dispersion",
        "ortho_drift", "unit_drift", "disagreement_omega", "disagreement_b", "disagreement_c",
    )


def lyapunov_S(R, r, omega_ref) -> np.ndarray:
    va = R[..., :, 0] + np.cross(r, omega_ref[..., None, :] if np.ndim(omega_ref) > 1 else omega_ref)
    return 0.5 * dispersion_of(va)


def lyapunov_Vx(R) -> np.ndarray:
    n = R.shape[-3]
    x_av = R[..., :, 0].mean(axis=-2)
    return 0.5 * n * (1.0 - np.sum(x_av * x_av, axis=-1))


def lyapunov_Q(R, omega0, alpha) -> np.ndarray:
    n = R.shape[-3]
    w_hat = np.asarray(omega0) / np.linalg.norm(omega0)
    x_av = R[..., :, 0].mean(axis=-2)
    return 0.5 * n * (x_av @ w_hat - alpha) ** 2


def lyapunov_U(omega_spatial) -> np.ndarray:
    n = omega_spatial.shape[-2]
    return 0.5 * n * dispersion_of(omega_spatial)


def agent_pitches(u) -> list:
    out = []
    for uk in np.asarray(u):
        nn = float(uk @ uk)
        out.append(None if nn == 0.0 else float(uk[0]) / nn)
    return out


def compute_metrics(state: SimState, u, law: LawEvaluator) -> MetricsRecord:
    R, r = state.R, state.r
    x = R[:, :, 0]
    x_av = x.mean(axis=0)
    xi = spatial_twists(R, r, u)
    disp = float(dispersion_of(xi))
    w_ref = law.reference_omega(state)
    S = None if w_ref is None else float(lyapunov_S(R, r, w_ref))
    Q = None
    if law.name == "screw_pitch":
        Q = float(lyapunov_Q(R, law.omega0, law.cfg.law.alpha))
    U = None
    dis = {}
    for k in state.cons:
        dis[k] = disagreement(state.spatial_consensus(k))
    if "omega" in state.cons:
        U = float(lyapunov_U(state.spatial_consensus("omega")))
    return MetricsRecord(
        t=state.t,
        V=0.5 * disp,
        V_x=float(lyapunov_Vx(R)),
        S=S,
        Q=Q,
        U=U,
        x_av_norm=float(np.linalg.norm(x_av)),
        twist_dispersion=disp,
        ortho_drift=float(orthogonality_drift(R).max()),
        unit_drift=float(np.abs(np.linalg.norm(x, axis=1) - 1.0).max()),
        disagreement_omega=dis.get("omega"),
        disagreement_b=dis.get("b"),
        disagreement_c=dis.get("c"),
        pitches=agent_pitches(u),
    )


class Kind(str, enum.Enum):
    PARALLEL = "Parallel"
    CIRCULAR = "Circular"
    HELICAL = "Helical"
    NONE = "None"


@dataclass
class EquilibriumVerdict:
    kind: Kind
    screw: ScrewParams | None
    window: tuple
    residual: float
    agents: list | None = None
    common_twist: np.ndarray | None = None

    def summary(self) -> str:
        lines = [f"kind: {self.kind.value}"]
        if self.agents is not None:
            lines.append("agents: [" + ", ".join(str(a) for a in self.agents) + "]")
        lines.append(f"window: [{self.window[0]!r}, {self.window[1]!r}]")
        lines.append(f"residual: {self.residual!r}")
        if self.screw is not None:
            s = self.screw
            lines.append(f"pitch: {'inf' if s.is_translation else repr(s.pitch)}")
            lines.append("axis_point: " + _fmt_vec(s.axis_point))
            lines.append("axis_direction: " + _fmt_vec(s.axis_direction))
            lines.append(f"magnitude: {s.magnitude!r}")
        return "\n".join(lines)


def _fmt_vec(v) -> str:
    return "[" + ", ".join(repr(float(c)) for c in v) + "]"


@dataclass
class Trajectory:
    times: np.ndarray
    rotations: np.ndarray
    positions: np.ndarray
    controls: np.ndarray
    consensus: dict = field(default_factory=dict)
    ids: np.ndarray | None = None

    def __post_init__(self):
        if self.ids is None:
            self.ids = np.arange(1, self.rotations.shape[1] + 1)

    @property
    def n_agents(self) -> int:
        return self.rotations.shape[1]

    def spatial_twists(self) -> np.ndarray:
        return spatial_twists(self.rotations, self.positions, self.controls)

    def dispersion_series(self, agents=None) -> np.ndarray:
        xi = self.spatial_twists()
        if agents is not None:
            xi = xi[:, self._index(agents)]
        return dispersion_of(xi)

    def _index(self, agents):
        pos = {int(a): i for i, a in enumerate(self.ids)}
        return np.array([pos[int(a)] for a in agents])

    def window_mask(self, window) -> np.ndarray:
        a, b = window
        return (self.times >= a - 1e-9) & (self.times <= b + 1e-9)


def classify_equilibrium(traj: Trajectory, window, tolerances=None, agents=None) -> EquilibriumVerdict:
    """Decide parallel / circular / helical / none from the twists inside ``window``."""
    from .config import Tolerances

    tol = tolerances or Tolerances()
    mask = traj.window_mask(window)
    if mask.sum() < 10:
        raise ValueError(f"window {window} contains {int(mask.sum())} samples; need at least 10")
    xi = traj.spatial_twists()[mask]
    if agents is not None:
        xi = xi[:, traj._index(agents)]
    n = xi.shape[1]
    residual = float(dispersion_of(xi).mean()) / n
    window = (float(window[0]), float(window[1]))
    agent_list = None if agents is None else [int(a) for a in agents]
    if not residual <= tol.eq:
        return EquilibriumVerdict(Kind.NONE, None, window, residual, agent_list)
    common = xi.mean(axis=(0, 1))
    v, w = common[:3], common[3:]
    if np.linalg.norm(w) <= tol.omega:
        screw = screw_of_twist(Twist(v, np.zeros(3)))
        kind = Kind.PARALLEL
    else:
        screw = screw_of_twist(Twist(v, w))
        kind = Kind.CIRCULAR if abs(screw.pitch) <= tol.pitch else Kind.HELICAL
    return EquilibriumVerdict(kind, screw, window, residual, agent_list, common)


@dataclass
class SimResult:
    config: SimConfig
    trajectory: Trajectory
    metrics: list
    verdict: EquilibriumVerdict
    group_verdicts: list = field(default_factory=list)
    final_state: SimState | None = None

    def verdict_text(self) -> str:
        parts = [self.verdict.summary()]
        for i, gv in enumerate(self.group_verdicts, start=1):
            parts.append(f"[group {i}]\n{gv.summary()}")
        return "\n\n".join(parts) + "\n"


def simulate(cfg: SimConfig, on_step=None) -> SimResult:
    """Run one closed-loop simulation; deterministic given the config (and its seed).

    ``on_step(state, u)`` is called at every step before the update, for
    monitoring that needs finer resolution than the metrics stride.
    """
    cfg.validate()
    law = LawEvaluator(cfg)
    state = initial_state(cfg)
    h = cfg.h
    n_steps = cfg.n_steps
    ts, Rs, rs, us = [], [], [], []
    cons_hist = {k: [] for k in state.cons}
    metrics = []
    traj_stride = cfg.output.trajectory_stride
    met_stride = cfg.output.metrics_stride
    for i in range(n_steps + 1):
        state.t = i * h
        u, derivs = law.evaluate(state)
        if on_step is not None:
            on_step(state, u)
        if i % traj_stride == 0 or i == n_steps:
            ts.append(state.t)
            Rs.append(state.R)
            rs.append(state.r)
            us.append(u)
            for k in cons_hist:
                cons_hist[k].append(state.cons[k])
        if i % met_stride == 0 or i == n_steps:
            metrics.append(compute_metrics(state, u, law))
        if i == n_steps:
            break
        rederive = None
        if cfg.consensus_scheme == "heun":
            R_, r_, t_, vps = state.R, state.r, state.t, state.virtuals
            rederive = lambda cons, R_=R_, r_=r_, t_=t_, vps=vps: law(R_, r_, cons, t_, vps)  # noqa: E731
        state = step(state, u, derivs, h, cfg.consensus_scheme, rederive)
    traj = Trajectory(
        np.array(ts),
        np.array(Rs),
        np.array(rs),
        np.array(us),
        {k: np.array(v) for k, v in cons_hist.items()},
    )
    window = cfg.verdict_window()
    verdict = classify_equilibrium(traj, window, cfg.tolerances)
    group_verdicts = []
    if cfg.law.name == "screw_multigroup":
        ga = law.groups
        for i in range(len(ga.virtuals)):
            group_verdicts.append(classify_equilibrium(traj, window, cfg.tolerances, ga.members(i) + 1))
    return SimResult(cfg, traj, metrics, verdict, group_verdicts, state)


def simulate_batch(cfg: SimConfig, seeds, monitors: dict | None = None, monitor_stride: int = 1):
    """Run the same config for many seeds at once (vectorised over a batch axis).

    ``monitors`` maps a name to ``f(state, u) -> array(B)``; each is sampled every
    ``monitor_stride`` steps (and at the final time).  Returns the final batched
    state, the final controls and a dict of monitor traces shaped (K, B).
    """
    cfg.validate()
    law = LawEvaluator(cfg)
    state = batch_initial_state(cfg, list(seeds))
    monitors = monitors or {}
    traces = {k: [] for k in monitors}
    times = []
    n_steps = cfg.n_steps
    h = cfg.h
    for i in range(n_steps + 1):
        state.t = i * h
        u, derivs = law.evaluate(state)
        if i % monitor_stride == 0 or i == n_steps:
            times.append(state.t)
            for k, f in monitors.items():
                traces[k].append(np.asarray(f(state, u)))
        if i == n_steps:
            break
        rederive = None
        if cfg.consensus_scheme == "heun":
            R_, r_, t_, vps = state.R, state.r, state.t, state.virtuals
            rederive = lambda cons, R_=R_, r_=r_, t_=t_, vps=vps: law(R_, r_, cons, t_, vps)  # noqa: E731
        state = step(state, u, derivs, h, cfg.consensus_scheme, rederive)
    return state, u, np.array(times), {k: np.array(v) for k, v in traces.items()}


def apply_group_action(cfg: SimConfig, R0, T0) -> SimConfig:
    """Left-translate every initial pose by (R0, T0); body-frame consensus values are kept.

    Random initial conditions are first materialised from the seed, so the
    returned config always carries explicit initial data.
    """
    R0 = np.asarray(R0, dtype=float)
    T0 = np.asarray(T0, dtype=float)
    state = initial_state(cfg)
    explicit = {
        "rotations": (R0 @ state.R).tolist(),
        "positions": (state.r @ R0.T + T0).tolist(),
        "consensus_frame": "body",
    }
    for k, v in state.cons.items():
        explicit[k] = v.tolist()
    return replace(cfg, initial=replace(cfg.initial, explicit=explicit)).validate()


# --- CSV I/O -----------------------------------------------------------------

POSE_COLUMNS = ("rx", "ry", "rz", "xx", "xy", "xz", "yx", "yy", "yz", "zx", "zy", "zz")


def write_trajectory_csv(traj: Trajectory, path) -> None:
    cons_names = [k for k in ("omega", "b", "c") if k in traj.consensus]
    header = ["t", "agent_id", *POSE_COLUMNS, "u1", "u2", "u3"]
    for k in cons_names:
        header += CONSENSUS_COLUMNS[k]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for i, t in enumerate(traj.times):
            R = traj.rotations[i]
            for a in range(traj.n_agents):
                row = [repr(float(t)), str(int(traj.ids[a]))]
                vals = [*traj.positions[i, a], *R[a][:, 0], *R[a][:, 1], *R[a][:, 2], *traj.controls[i, a]]
                for k in cons_names:
                    vals += list(traj.consensus[k][i, a])
                row += [repr(float(v)) for v in vals]
                w.writerow(row)


class TrajectoryFormatError(ValueError):
    pass


def read_trajectory_csv(path) -> Trajectory:
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise TrajectoryFormatError(str(exc)) from exc
    if not rows:
        raise TrajectoryFormatError(f"{path}: empty file")
    header = rows[0]
    required = ["t", "agent_id", *POSE_COLUMNS, "u1", "u2", "u3"]
    if header[: len(required)] != required:
        raise TrajectoryFormatError(f"{path}: header does not match the trajectory schema")
    extra = header[len(required):]
    cons_names = []
    j = 0
    for name, cols in CONSENSUS_COLUMNS.items():
        if extra[j : j + 3] == list(cols):
            cons_names.append(name)
            j += 3
    if j != len(extra):
        raise TrajectoryFormatError(f"{path}: unexpected columns {extra[j:]}")
    try:
        data = np.array([[float(x) for x in row] for row in rows[1:]])
    except ValueError as exc:
        raise TrajectoryFormatError(f"{path}: non-numeric entry ({exc})") from exc
    if data.ndim != 2 or data.shape[1] != len(header):
        raise TrajectoryFormatError(f"{path}: ragged rows")
    ids = []
    for a in data[:, 1]:
        if int(a) in ids:
            break
        ids.append(int(a))
    n = len(ids)
    if n == 0 or data.shape[0] % n:
        raise TrajectoryFormatError(f"{path}: rows are not whole snapshots of {n} agents")
    k = data.shape[0] // n
    data = data.reshape(k, n, -1)
    if not np.all(data[:, :, 1] == np.array(ids)) or not np.all(data[:, :, 0] == data[:, :1, 0]):
        raise TrajectoryFormatError(f"{path}: inconsistent agent ordering or time stamps")
    pos = data[:, :, 2:5]
    R = np.stack([data[:, :, 5:8], data[:, :, 8:11], data[:, :, 11:14]], axis=-1)
    u = data[:, :, 14:17]
    cons = {name: data[:, :, 17 + 3 * i : 20 + 3 * i] for i, name in enumerate(cons_names)}
    return Trajectory(data[:, 0, 0], R, pos, u, cons, np.array(ids))


def write_metrics_csv(metrics: list, path) -> None:
    n = len(metrics[0].pitches) if metrics else 0
    header = list(MetricsRecord.SCALARS) + [f"pitch_{k}" for k in range(1, n + 1)]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for m in metrics:
            row = [_cell(getattr(m, name)) for name in MetricsRecord.SCALARS]
            row += [_cell(p) for p in m.pitches]
            w.writerow(row)


def _cell(x) -> str:
    if x is None:
        return ""
    return repr(float(x))


def read_metrics_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        rdr = csv.DictReader(fh)
        return [{k: (None if v == "" else float(v)) for k, v in row.items()} for row in rdr]


def agent_screws(traj: Trajectory, index: int = -1) -> list:
    """Instantaneous screw of each agent's spatial twist at one sample."""
    xi = traj.spatial_twists()[index]
    return [screw_of_twist(Twist.from_vector(x)) for x in xi]


def metrics_field_names() -> list[str]:
    return [f.name for f in fields(MetricsRecord)]


def screw_distance(a: ScrewParams, b: ScrewParams) -> dict:
    """Pitch difference, axis angle and axis-line distance between two screws."""
    from .liegroup import angle_between, line_distance

    return {
        "pitch": abs(a.pitch - b.pitch) if not (math.isinf(a.pitch) or math.isinf(b.pitch)) else math.inf,
        "angle": angle_between(a.axis_direction, b.axis_direction),
        "line": line_distance(a.axis_point, a.axis_direction, b.axis_point, b.axis_direction),
    }
