"""Command line entry point: ``se3swarm {simulate,check-graph,analyze,sweep}``.

Exit codes: 0 success (or graph connected), 1 property failure or integration
abort, 2 usage / schema / config error.
"""

from __future__ import annotations

import argparse
import csv
import json
import subprocess
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, asdict
from pathlib import Path

import numpy as np

from . import __version__
from .commnet import ScheduleError, is_uniformly_connected, load_schedule
from .config import LAWS, ConfigError, bundled_config_names, load_config, resolve_config_path
from .engine import (
    IntegrationError,
    TrajectoryFormatError,
    agent_screws,
    classify_equilibrium,
    read_trajectory_csv,
    simulate,
    write_metrics_csv,
    write_trajectory_csv,
)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


@dataclass
class RunManifest:
    config_path: str
    seed: int
    output_dir: str
    version: str
    wall_clock_seconds: float
    law: str
    n_agents: int
    h: float
    horizon: float


def version_string() -> str:
    """Package version, suffixed with ``git describe`` output when available."""
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty", "--tags"],
            capture_output=True,
            text=True,
            timeout=5,
            cwd=Path(__file__).resolve().parent,
        )
        if out.returncode == 0 and out.stdout.strip():
            return f"{__version__}+{out.stdout.strip()}"
    except (OSError, subprocess.SubprocessError):
        pass
    return __version__


def _overrides(args) -> dict:
    ov = {"seed": args.seed, "h": args.h, "horizon": args.horizon}
    if args.law is not None:
        ov["law.name"] = args.law
    for item in args.set or []:
        key, sep, raw = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        ov[key] = _parse_scalar(raw)
    return ov


def _parse_scalar(raw: str):
    import yaml

    return yaml.safe_load(raw)


def cmd_simulate(args) -> int:
    cfg = load_config(args.config, _overrides(args))
    out = Path(args.out or f"runs/{cfg.name or 'run'}_seed{cfg.seed}")
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    result = simulate(cfg)
    elapsed = time.perf_counter() - t0
    write_trajectory_csv(result.trajectory, out / "trajectory.csv")
    write_metrics_csv(result.metrics, out / "metrics.csv")
    (out / "verdict.txt").write_text(result.verdict_text())
    manifest = RunManifest(
        config_path=str(resolve_config_path(args.config)),
        seed=cfg.seed,
        output_dir=str(out),
        version=version_string(),
        wall_clock_seconds=elapsed,
        law=cfg.law.name,
        n_agents=cfg.n_agents,
        h=cfg.h,
        horizon=cfg.horizon,
    )
    payload = asdict(manifest)
    payload["config"] = cfg.to_dict()
    (out / "manifest.json").write_text(json.dumps(payload, indent=2) + "\n")
    print(result.verdict_text(), end="")
    print(f"outputs written to {out}")
    return EXIT_OK


def cmd_check_graph(args) -> int:
    schedule = load_schedule(args.schedule)
    T = args.T
    if T is None:
        T = schedule.period if schedule.period is not None else schedule.end - schedule.start
    report = is_uniformly_connected(schedule, T)
    print(report.summary())
    return EXIT_OK if report.uniformly_connected else EXIT_FAILURE


def cmd_analyze(args) -> int:
    traj = read_trajectory_csv(args.trajectory)
    if args.window is not None:
        window = tuple(args.window)
    else:
        # same rule as the live run: last 10%, widened to hold 10 samples
        t0, t_end = float(traj.times[0]), float(traj.times[-1])
        dt = float(traj.times[1] - traj.times[0]) if len(traj.times) > 1 else 0.0
        span = max(0.1 * (t_end - t0), 9 * dt)
        window = (max(t0, t_end - span), t_end)
    agents = args.agents
    verdict = classify_equilibrium(traj, window, agents=agents)
    print(verdict.summary())
    print()
    print("per-agent screws at the last sample:")
    for aid, s in zip(traj.ids, agent_screws(traj)):
        if agents is not None and int(aid) not in agents:
            continue
        pitch = "inf" if s.is_translation else f"{s.pitch:.9g}"
        print(
            f"  agent {int(aid)}: pitch {pitch}  magnitude {s.magnitude:.9g}  "
            f"direction [{', '.join(f'{c:.6f}' for c in s.axis_direction)}]  "
            f"point [{', '.join(f'{c:.6f}' for c in s.axis_point)}]"
        )
    series = traj.dispersion_series(agents)
    if args.dispersion_out:
        with open(args.dispersion_out, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", "twist_dispersion"])
            for t, d in zip(traj.times, series):
                w.writerow([repr(float(t)), repr(float(d))])
        print(f"dispersion series written to {args.dispersion_out}")
    else:
        print()
        print("twist dispersion series (t, dispersion):")
        idx = np.unique(np.linspace(0, len(series) - 1, min(len(series), 21)).astype(int))
        for i in idx:
            print(f"  {traj.times[i]:.4f}  {series[i]:.6e}")
    return EXIT_OK


def _sweep_one(job):
    config, overrides = job
    cfg = load_config(config, overrides)
    try:
        res = simulate(cfg)
    except IntegrationError as exc:
        return {"seed": cfg.seed, "kind": "error", "error": str(exc)}
    v = res.verdict
    last = res.metrics[-1]
    row = {
        "seed": cfg.seed,
        "kind": v.kind.value,
        "residual": v.residual,
        "x_av_norm": last.x_av_norm,
        "twist_dispersion": last.twist_dispersion,
        "pitch": None,
        "magnitude": None,
    }
    if v.screw is not None:
        row["pitch"] = None if v.screw.is_translation else v.screw.pitch
        row["magnitude"] = v.screw.magnitude
    return row


def cmd_sweep(args) -> int:
    base = _overrides(args)
    seeds = range(args.seeds[0], args.seeds[1])
    jobs = [(args.config, {**base, "seed": s}) for s in seeds]
    load_config(args.config, base)  # fail fast on config errors
    if args.workers > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            rows = list(pool.map(_sweep_one, jobs))
    else:
        rows = [_sweep_one(j) for j in jobs]
    fields = ["seed", "kind", "residual", "x_av_norm", "twist_dispersion", "pitch", "magnitude", "error"]
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=fields, lineterminator="\n")
        w.writeheader()
        for row in rows:
            w.writerow({k: "" if row.get(k) is None else row[k] for k in fields})
    counts: dict[str, int] = {}
    for row in rows:
        counts[row["kind"]] = counts.get(row["kind"], 0) + 1
    print(", ".join(f"{k}: {n}" for k, n in sorted(counts.items())) + f"  ({len(rows)} runs) -> {out}")
    return EXIT_FAILURE if counts.get("error") else EXIT_OK


def _add_overrides(p):
    p.add_argument("--seed", type=int)
    p.add_argument("--h", type=float)
    p.add_argument("--horizon", type=float)
    p.add_argument("--law", choices=LAWS)
    p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override any config field, e.g. law.alpha=0.3")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="se3swarm", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one simulation from a config file or bundled preset")
    p.add_argument("config", help=f"config path or preset name ({', '.join(bundled_config_names())})")
    p.add_argument("--out", help="output directory (default runs/<name>_seed<seed>)")
    _add_overrides(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("check-graph", help="audit a graph schedule for uniform connectivity")
    p.add_argument("schedule")
    p.add_argument("--T", type=float, help="window length (default: period, or the full span)")
    p.set_defaults(func=cmd_check_graph)

    p = sub.add_parser("analyze", help="classify a recorded trajectory")
    p.add_argument("trajectory")
    p.add_argument("--window", type=float, nargs=2, metavar=("T_A", "T_B"))
    p.add_argument("--agents", type=int, nargs="+", help="restrict to these 1-based agent ids")
    p.add_argument("--dispersion-out", help="write the full dispersion series to this CSV")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("sweep", help="run one config over a range of seeds")
    p.add_argument("config")
    p.add_argument("--seeds", type=int, nargs=2, default=(0, 10), metavar=("FIRST", "STOP"))
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", default="sweep.csv")
    _add_overrides(p)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (ConfigError, ScheduleError, TrajectoryFormatError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except IntegrationError as exc:
        print(f"integration aborted: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
