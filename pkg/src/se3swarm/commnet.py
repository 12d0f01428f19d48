"""Time-varying weighted digraphs: Laplacians, balance and uniform connectivity.

Convention: ``weights[k, j] = a_kj > 0`` means agent k listens to agent j.  In
schedule files an edge ``{from: j, to: k}`` describes information flowing from
j to k, so it sets ``a_kj``.  Node ids in files are 1-based.

For connectivity the union graph carries an edge k -> j whenever the window
integral of a_kj is positive; a root is a node reachable from every other node,
i.e. a node whose information eventually reaches everybody.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import yaml
from scipy.sparse.csgraph import breadth_first_order

BALANCE_TOL = 1e-12
_TIME_TOL = 1e-12


class ScheduleError(ValueError):
    """Malformed graph snapshot or schedule."""


@dataclass(frozen=True)
class GraphSnapshot:
    n: int
    weights: np.ndarray

    def __post_init__(self):
        A = np.array(self.weights, dtype=float)
        if A.shape != (self.n, self.n):
            raise ScheduleError(f"adjacency must be {self.n}x{self.n}, got {A.shape}")
        if not np.all(np.isfinite(A)) or np.any(A < 0):
            raise ScheduleError("adjacency weights must be finite and nonnegative")
        if np.any(np.diag(A) != 0):
            raise ScheduleError("self-loops are not allowed (a_kk must be 0)")
        object.__setattr__(self, "weights", A)

    @classmethod
    def complete(cls, n: int, weight: float = 1.0) -> GraphSnapshot:
        return cls(n, weight * (np.ones((n, n)) - np.eye(n)))


def laplacian(g: GraphSnapshot | np.ndarray) -> np.ndarray:
    A = g.weights if isinstance(g, GraphSnapshot) else np.asarray(g, dtype=float)
    return np.diag(A.sum(axis=1)) - A


def is_balanced(g: GraphSnapshot | np.ndarray, tol: float = BALANCE_TOL) -> bool:
    A = g.weights if isinstance(g, GraphSnapshot) else np.asarray(g, dtype=float)
    return bool(np.all(np.abs(A.sum(axis=1) - A.sum(axis=0)) <= tol))


@dataclass(frozen=True)
class ConnectivityReport:
    uniformly_connected: bool
    witness_root: int | None
    horizon_T: float
    failing_window: tuple[float, float] | None
    certified_until: float
    windows_checked: int

    def summary(self) -> str:
        lines = [
            f"uniformly_connected: {str(self.uniformly_connected).lower()}",
            f"T: {self.horizon_T!r}",
            f"windows_checked: {self.windows_checked}",
            f"certified_until: {'periodic' if math.isinf(self.certified_until) else repr(self.certified_until)}",
        ]
        if self.witness_root is not None:
            lines.append(f"witness_root: {self.witness_root}")
        if self.failing_window is not None:
            a, b = self.failing_window
            lines.append(f"failing_window: [{a!r}, {b!r}]")
        return "\n".join(lines)


class GraphSchedule:
    """Piecewise-constant adjacency A(t) over contiguous segments.

    With ``period`` set, the segments must tile ``[0, period)`` and the schedule
    repeats forever.
    """

    def __init__(self, segments, eta: float, gamma: float, period: float | None = None):
        self.segments = [(float(a), float(b), g) for a, b, g in segments]
        self.eta = float(eta)
        self.gamma = float(gamma)
        self.period = None if period is None else float(period)
        self._validate()

    def _validate(self):
        if not self.segments:
            raise ScheduleError("schedule needs at least one segment")
        if not (0 < self.eta <= self.gamma):
            raise ScheduleError("require 0 < eta <= gamma")
        n = self.segments[0][2].n
        prev_end = None
        for a, b, g in self.segments:
            if g.n != n:
                raise ScheduleError("all snapshots must share the node count")
            if not b > a:
                raise ScheduleError(f"segment [{a}, {b}] has nonpositive length")
            if prev_end is not None and abs(a - prev_end) > _TIME_TOL:
                raise ScheduleError(f"segments must be contiguous (gap/overlap at t={a})")
            nz = g.weights[g.weights > 0]
            if nz.size and (nz.min() < self.eta - 1e-15 or nz.max() > self.gamma + 1e-15):
                raise ScheduleError(f"nonzero weights must lie in [eta, gamma] on [{a}, {b}]")
            prev_end = b
        if self.period is not None:
            if abs(self.start) > _TIME_TOL or abs(self.end - self.period) > _TIME_TOL:
                raise ScheduleError("a periodic schedule must tile [0, period)")

    @property
    def n(self) -> int:
        return self.segments[0][2].n

    @property
    def start(self) -> float:
        return self.segments[0][0]

    @property
    def end(self) -> float:
        return self.segments[-1][1]

    @property
    def span(self) -> float:
        return math.inf if self.period is not None else self.end - self.start

    @classmethod
    def static(cls, g: GraphSnapshot, horizon: float = 1.0, periodic: bool = True) -> GraphSchedule:
        nz = g.weights[g.weights > 0]
        eta = float(nz.min()) if nz.size else 1.0
        gamma = float(nz.max()) if nz.size else 1.0
        return cls([(0.0, horizon, g)], eta, gamma, horizon if periodic else None)

    def _index_at(self, t: float) -> int:
        for i, (a, b, _) in enumerate(self.segments):
            if a - _TIME_TOL <= t < b:
                return i
        if abs(t - self.end) <= _TIME_TOL:
            return len(self.segments) - 1
        raise ScheduleError(f"t={t} is outside the schedule [{self.start}, {self.end}]")

    def snapshot_at(self, t: float) -> GraphSnapshot:
        if self.period is not None:
            t = t % self.period
        return self.segments[self._index_at(t)][2]

    def adjacency_at(self, t: float) -> np.ndarray:
        return self.snapshot_at(t).weights

    def laplacian_at(self, t: float) -> np.ndarray:
        return laplacian(self.snapshot_at(t))

    def boundaries(self) -> list[float]:
        return [a for a, _, _ in self.segments]

    def pieces(self, t0: float, t1: float):
        """Yield (duration, snapshot) for the parts of [t0, t1] covered by each segment."""
        if t1 < t0:
            raise ValueError("t1 must be >= t0")
        if self.period is None:
            if t0 < self.start - _TIME_TOL or t1 > self.end + _TIME_TOL:
                raise ScheduleError(
                    f"[{t0}, {t1}] is not covered by the schedule [{self.start}, {self.end}]"
                )
            offsets = [0.0]
        else:
            k0 = math.floor(t0 / self.period)
            k1 = math.floor(t1 / self.period)
            offsets = [k * self.period for k in range(k0, k1 + 1)]
        for off in offsets:
            for a, b, g in self.segments:
                lo, hi = max(t0, a + off), min(t1, b + off)
                if hi > lo:
                    yield hi - lo, g


def integrate_adjacency(s: GraphSchedule, t0: float, t1: float) -> np.ndarray:
    out = np.zeros((s.n, s.n))
    for d, g in s.pieces(t0, t1):
        out += d * g.weights
    return out


def roots_of(adjacency) -> set[int]:
    """0-based nodes reachable from every node along edges k -> j with a_kj > 0."""
    A = np.asarray(adjacency) > 0
    n = A.shape[0]
    reversed_graph = A.T.astype(np.int8)
    roots = set()
    for k in range(n):
        reached = breadth_first_order(reversed_graph, k, directed=True, return_predecessors=False)
        if len(reached) == n:
            roots.add(k)
    return roots


def is_uniformly_connected(s: GraphSchedule, T: float) -> ConnectivityReport:
    if not T > 0:
        raise ValueError("T must be positive")
    if T > s.span + _TIME_TOL:
        raise ScheduleError(f"T={T} exceeds the schedule span {s.span}")
    if s.period is not None:
        anchors = s.boundaries()
        certified = math.inf
    else:
        anchors = [b for b in s.boundaries() if b + T <= s.end + _TIME_TOL]
        certified = s.end
    candidates = set(range(s.n))
    failing = None
    for t in anchors:
        win = integrate_adjacency(s, t, min(t + T, s.end) if s.period is None else t + T)
        candidates &= roots_of(win)
        if not candidates:
            failing = (t, t + T)
            break
    ok = bool(candidates)
    return ConnectivityReport(
        uniformly_connected=ok,
        witness_root=min(candidates) + 1 if ok else None,
        horizon_T=float(T),
        failing_window=failing,
        certified_until=certified,
        windows_checked=len(anchors),
    )


def schedule_from_dict(d: dict) -> GraphSchedule:
    try:
        n = int(d["n"])
        eta = float(d["eta"])
        gamma = float(d.get("gamma", eta))
        period = d.get("periodic")
        segments = []
        for seg in d["segments"]:
            A = np.zeros((n, n))
            for e in seg.get("edges") or []:
                src, dst = int(e["from"]), int(e["to"])
                if not (1 <= src <= n and 1 <= dst <= n):
                    raise ScheduleError(f"edge {src}->{dst} references a node outside 1..{n}")
                A[dst - 1, src - 1] = float(e.get("weight", eta))
            segments.append((float(seg["t_start"]), float(seg["t_end"]), GraphSnapshot(n, A)))
    except (KeyError, TypeError) as exc:
        raise ScheduleError(f"malformed schedule: {exc!r}") from exc
    return GraphSchedule(segments, eta, gamma, None if period in (None, False) else float(period))


def schedule_to_dict(s: GraphSchedule) -> dict:
    segs = []
    for a, b, g in s.segments:
        edges = [
            {"from": int(j) + 1, "to": int(k) + 1, "weight": float(g.weights[k, j])}
            for k, j in zip(*np.nonzero(g.weights))
        ]
        segs.append({"t_start": a, "t_end": b, "edges": edges})
    d = {"n": s.n, "eta": s.eta, "gamma": s.gamma, "segments": segs}
    if s.period is not None:
        d["periodic"] = s.period
    return d


def load_schedule(path) -> GraphSchedule:
    try:
        data = yaml.safe_load(Path(path).read_text())
    except yaml.YAMLError as exc:
        raise ScheduleError(f"cannot parse {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ScheduleError(f"{path}: expected a mapping at top level")
    return schedule_from_dict(data)


def cycling_edges_schedule(n: int, dwell: float, weight: float = 1.0) -> GraphSchedule:
    """Periodic schedule activating the single edge k -> k+1 (mod n) in turn."""
    segments = []
    for i in range(n):
        A = np.zeros((n, n))
        A[(i + 1) % n, i] = weight
        segments.append((i * dwell, (i + 1) * dwell, GraphSnapshot(n, A)))
    return GraphSchedule(segments, weight, weight, n * dwell)
