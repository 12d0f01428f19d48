"""Simulation configuration: dataclasses, YAML loading and validation.

Config files are YAML (JSON is accepted as a subset).  Schema::

    n_agents: 10
    seed: 0
    h: 0.01
    horizon: 100.0
    consensus_scheme: euler        # euler | heun
    law:
      name: screw_pitch            # see LAWS
      omega0: [0, 0, 1]            # screw_fixed, screw_pitch
      alpha: 0.3                   # screw_pitch
      virtual: {pitch: 0.5, axis_point: [1, -1, 0], omega0: [1, 1, 1]}
      groups:                      # screw_multigroup
        - {members: [1, 2, 3, 4], virtual: {...}}
    initial:
      position_half_width: 2.0
      consensus_half_width: 1.0
      omega_center: [0, 0, 0]
      b_center: [0, 0, 0]
      c_center: [0, 0, 0]
      explicit:                    # optional, overrides the random draw
        rotations: [[[...]]]       # N x 3 x 3
        positions: [[...]]         # N x 3
        omega: [[...]]             # consensus values, spatial frame unless
        consensus_frame: spatial   # consensus_frame: body
    graph: schedules/cycle.yaml    # file (relative to the config) or inline mapping
    output: {trajectory_stride: 10, metrics_stride: 10, verdict_window: [90, 100]}
    tolerances: {eq: 1.0e-6, omega: 1.0e-4, pitch: 1.0e-3}
"""

from __future__ import annotations

import copy
from dataclasses import asdict, dataclass, field, replace
from importlib import resources
from pathlib import Path

import numpy as np
import yaml

from .commnet import GraphSchedule, ScheduleError, load_schedule, schedule_from_dict, schedule_to_dict
from .controllers import GroupAssignment, VirtualParticle

LAWS = (
    "parallel",
    "balanced",
    "screw_fixed",
    "screw_pitch",
    "screw_dynamic",
    "screw_reference",
    "screw_multigroup",
    "parallel_limited",
    "screw_limited",
)
LIMITED_LAWS = ("parallel_limited", "screw_limited")
CONSENSUS_VARIABLES = {
    "screw_dynamic": ("omega",),
    "parallel_limited": ("b",),
    "screw_limited": ("omega", "b", "c"),
}


class ConfigError(ValueError):
    """Inconsistent or malformed simulation configuration."""


@dataclass
class LawConfig:
    name: str
    omega0: tuple | None = None
    alpha: float | None = None
    sign: float = 1.0
    virtual: dict | None = None
    groups: list | None = None

    def virtual_particle(self) -> VirtualParticle:
        return _virtual_from_dict(self.virtual)

    def group_assignment(self, n: int) -> GroupAssignment:
        idx = np.full(n, -1)
        vps = []
        for i, grp in enumerate(self.groups or []):
            for m in grp["members"]:
                if not 1 <= int(m) <= n:
                    raise ConfigError(f"group member {m} outside 1..{n}")
                if idx[int(m) - 1] != -1:
                    raise ConfigError(f"agent {m} assigned to more than one group")
                idx[int(m) - 1] = i
            vps.append(_virtual_from_dict(grp["virtual"]))
        if np.any(idx < 0):
            raise ConfigError(f"agents {list(np.flatnonzero(idx < 0) + 1)} are not assigned to a group")
        return GroupAssignment(idx, vps)


def _virtual_from_dict(d: dict | None) -> VirtualParticle:
    if not d:
        raise ConfigError("law needs a virtual particle specification")
    try:
        if "x0" in d:
            return VirtualParticle(d.get("r0", [0, 0, 0]), d["x0"], d["omega0"])
        return VirtualParticle.from_screw(
            float(d["pitch"]), d.get("axis_point", [0, 0, 0]), d["omega0"], float(d.get("phase", 0.0))
        )
    except KeyError as exc:
        raise ConfigError(f"virtual particle definition missing {exc}") from exc
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


@dataclass
class InitialConditions:
    position_half_width: float = 2.0
    consensus_half_width: float = 1.0
    omega_center: tuple = (0.0, 0.0, 0.0)
    b_center: tuple = (0.0, 0.0, 0.0)
    c_center: tuple = (0.0, 0.0, 0.0)
    explicit: dict | None = None


@dataclass
class OutputConfig:
    trajectory_stride: int = 10
    metrics_stride: int = 10
    verdict_window: tuple | None = None


@dataclass
class Tolerances:
    eq: float = 1e-6
    omega: float = 1e-4
    pitch: float = 1e-3


@dataclass
class SimConfig:
    n_agents: int
    law: LawConfig
    h: float = 0.01
    horizon: float = 100.0
    seed: int = 0
    consensus_scheme: str = "euler"
    initial: InitialConditions = field(default_factory=InitialConditions)
    graph: GraphSchedule | None = None
    output: OutputConfig = field(default_factory=OutputConfig)
    tolerances: Tolerances = field(default_factory=Tolerances)
    name: str = ""

    @property
    def n_steps(self) -> int:
        return int(round(self.horizon / self.h))

    @property
    def consensus_variables(self) -> tuple:
        return CONSENSUS_VARIABLES.get(self.law.name, ())

    def verdict_window(self) -> tuple[float, float]:
        if self.output.verdict_window is not None:
            a, b = self.output.verdict_window
            return float(a), float(b)
        # last 10% of the run, widened if needed to hold 10 recorded samples
        t_end = self.n_steps * self.h
        span = max(0.1 * t_end, 9 * self.output.trajectory_stride * self.h)
        return max(0.0, t_end - span), t_end

    def verdict_samples(self) -> int:
        """Number of recorded trajectory samples inside the verdict window."""
        a, b = self.verdict_window()
        stride = self.output.trajectory_stride
        ticks = [i for i in range(0, self.n_steps + 1, stride)]
        if ticks[-1] != self.n_steps:
            ticks.append(self.n_steps)
        return sum(1 for i in ticks if a - 1e-9 <= i * self.h <= b + 1e-9)

    def validate(self) -> SimConfig:
        if self.n_agents < 1:
            raise ConfigError("n_agents must be >= 1")
        if not self.h > 0:
            raise ConfigError("h must be positive")
        if self.horizon < self.h:
            raise ConfigError("horizon must be at least one step")
        if self.consensus_scheme not in ("euler", "heun"):
            raise ConfigError(f"unknown consensus_scheme {self.consensus_scheme!r}")
        law = self.law
        if law.name not in LAWS:
            raise ConfigError(f"unknown law {law.name!r}; choose one of {', '.join(LAWS)}")
        if law.name in ("screw_fixed", "screw_pitch"):
            if law.omega0 is None or len(law.omega0) != 3:
                raise ConfigError(f"{law.name} needs omega0 (3-vector)")
        if law.name == "screw_pitch":
            if np.linalg.norm(law.omega0) == 0:
                raise ConfigError("screw_pitch needs a nonzero omega0")
            if law.alpha is None or not 0.0 <= float(law.alpha) < 1.0:
                raise ConfigError("screw_pitch needs alpha in [0, 1)")
        if law.name == "screw_reference":
            law.virtual_particle()
        if law.name == "screw_multigroup":
            if not law.groups:
                raise ConfigError("screw_multigroup needs a list of groups")
            law.group_assignment(self.n_agents)
        if law.name in LIMITED_LAWS:
            g = self.graph
            if g is None:
                raise ConfigError(f"{law.name} needs a communication graph schedule")
            if g.n != self.n_agents:
                raise ConfigError(f"graph has {g.n} nodes but n_agents = {self.n_agents}")
            if g.period is None and (g.start > 0 or g.end < self.n_steps * self.h - 1e-12):
                raise ConfigError("graph schedule does not cover the simulation horizon")
        if self.output.trajectory_stride < 1 or self.output.metrics_stride < 1:
            raise ConfigError("output strides must be >= 1")
        if self.verdict_samples() < 10:
            raise ConfigError(
                f"verdict window {self.verdict_window()} holds fewer than 10 trajectory samples; "
                "lengthen the run, widen the window or lower output.trajectory_stride"
            )
        ex = self.initial.explicit
        if ex is not None:
            n = self.n_agents
            R = np.asarray(ex.get("rotations"), dtype=float)
            r = np.asarray(ex.get("positions"), dtype=float)
            if R.shape != (n, 3, 3) or r.shape != (n, 3):
                raise ConfigError("explicit initial rotations/positions have the wrong shape")
            for key in self.consensus_variables:
                if key in ex and np.asarray(ex[key]).shape != (n, 3):
                    raise ConfigError(f"explicit initial {key} must be {n}x3")
        return self

    def to_dict(self) -> dict:
        d = {
            "name": self.name,
            "n_agents": self.n_agents,
            "seed": self.seed,
            "h": self.h,
            "horizon": self.horizon,
            "consensus_scheme": self.consensus_scheme,
            "law": {k: v for k, v in asdict(self.law).items() if v is not None},
            "initial": {k: v for k, v in asdict(self.initial).items() if v is not None},
            "output": asdict(self.output),
            "tolerances": asdict(self.tolerances),
        }
        if self.graph is not None:
            d["graph"] = schedule_to_dict(self.graph)
        return _plain(d)


def _plain(obj):
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def _vec(x, what):
    if x is None:
        return None
    v = tuple(float(c) for c in x)
    if len(v) != 3:
        raise ConfigError(f"{what} must have 3 components")
    return v


def config_from_dict(d: dict, base_dir: Path | None = None) -> SimConfig:
    if not isinstance(d, dict):
        raise ConfigError("config must be a mapping")
    d = copy.deepcopy(d)
    try:
        law_d = d.pop("law")
        if isinstance(law_d, str):
            law_d = {"name": law_d}
        law = LawConfig(
            name=str(law_d["name"]),
            omega0=_vec(law_d.get("omega0"), "law.omega0"),
            alpha=None if law_d.get("alpha") is None else float(law_d["alpha"]),
            sign=float(law_d.get("sign", 1.0)),
            virtual=law_d.get("virtual"),
            groups=law_d.get("groups"),
        )
        if law.name == "balanced" and "sign" not in law_d:
            law.sign = -1.0
        ini = d.pop("initial", {}) or {}
        initial = InitialConditions(
            position_half_width=float(ini.get("position_half_width", 2.0)),
            consensus_half_width=float(ini.get("consensus_half_width", 1.0)),
            omega_center=_vec(ini.get("omega_center", (0, 0, 0)), "omega_center"),
            b_center=_vec(ini.get("b_center", (0, 0, 0)), "b_center"),
            c_center=_vec(ini.get("c_center", (0, 0, 0)), "c_center"),
            explicit=ini.get("explicit"),
        )
        out = d.pop("output", {}) or {}
        vw = out.get("verdict_window")
        output = OutputConfig(
            trajectory_stride=int(out.get("trajectory_stride", 10)),
            metrics_stride=int(out.get("metrics_stride", 10)),
            verdict_window=None if vw is None else (float(vw[0]), float(vw[1])),
        )
        tol = d.pop("tolerances", {}) or {}
        tolerances = Tolerances(
            eq=float(tol.get("eq", 1e-6)), omega=float(tol.get("omega", 1e-4)), pitch=float(tol.get("pitch", 1e-3))
        )
        graph = d.pop("graph", None)
        if isinstance(graph, str):
            path = Path(graph)
            if not path.is_absolute() and base_dir is not None:
                path = base_dir / path
            graph = load_schedule(path)
        elif isinstance(graph, dict):
            graph = schedule_from_dict(graph)
        cfg = SimConfig(
            n_agents=int(d.pop("n_agents")),
            law=law,
            h=float(d.pop("h", 0.01)),
            horizon=float(d.pop("horizon", 100.0)),
            seed=int(d.pop("seed", 0)),
            consensus_scheme=str(d.pop("consensus_scheme", "euler")),
            initial=initial,
            graph=graph,
            output=output,
            tolerances=tolerances,
            name=str(d.pop("name", "")),
        )
    except ScheduleError as exc:
        raise ConfigError(f"graph schedule: {exc}") from exc
    except (KeyError, TypeError, IndexError) as exc:
        raise ConfigError(f"malformed config: missing or invalid {exc}") from exc
    if d:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(d))}")
    return cfg.validate()


def bundled_config_names() -> list[str]:
    root = resources.files("se3swarm") / "configs"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".yaml"))


def resolve_config_path(name_or_path) -> Path:
    path = Path(name_or_path)
    if path.exists():
        return path
    bundled = resources.files("se3swarm") / "configs" / f"{name_or_path}.yaml"
    if bundled.is_file():
        return Path(str(bundled))
    raise ConfigError(f"no config file or bundled preset named {name_or_path!r}")


def load_config(name_or_path, overrides: dict | None = None) -> SimConfig:
    """Load a config file (or bundled preset name) and apply scalar overrides.

    ``overrides`` keys are dotted paths, e.g. ``{"seed": 3, "law.alpha": 0.7}``.
    """
    path = resolve_config_path(name_or_path)
    try:
        data = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected a mapping at top level")
    data.setdefault("name", path.stem)
    if isinstance(data.get("law"), str):
        data["law"] = {"name": data["law"]}
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        node = data
        parts = key.split(".")
        for p in parts[:-1]:
            node = node.setdefault(p, {})
            if isinstance(node, str):
                raise ConfigError(f"cannot override {key}")
        node[parts[-1]] = value
    return config_from_dict(data, base_dir=path.parent)


def with_overrides(cfg: SimConfig, **kw) -> SimConfig:
    return replace(cfg, **kw).validate()
