"""Record the potentials of one run at every step and check they never rise.

    python3 scripts/lyapunov_traces.py screw_pitch --out lyap.csv
"""

import argparse
import csv

import numpy as np

from se3swarm.config import load_config
from se3swarm.engine import LawEvaluator, compute_metrics, simulate

NAMES = ("V_x", "S", "Q", "U")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("config")
    ap.add_argument("--seed", type=int)
    ap.add_argument("--horizon", type=float)
    ap.add_argument("--out", help="optional CSV of the per-step values")
    args = ap.parse_args()

    cfg = load_config(args.config, {"seed": args.seed, "horizon": args.horizon})
    law = LawEvaluator(cfg)
    rows = []
    simulate(cfg, on_step=lambda s, u: rows.append(compute_metrics(s, u, law)))

    print(f"{cfg.name} (law {cfg.law.name}), {len(rows)} steps, h = {cfg.h}")
    series = {}
    for name in NAMES:
        vals = [getattr(m, name) for m in rows]
        if vals[0] is not None:
            series[name] = np.array(vals, dtype=float)
    if "S" in series and "Q" in series:
        # the pitch-shaping law decreases the sum, not Q alone
        series["S+Q"] = series["S"] + series["Q"]
    for name, vals in series.items():
        rise = np.diff(vals).max()
        flag = "non-increasing" if rise <= 1e-12 else ""
        print(f"  {name:4s} start {vals[0]:.4e}  end {vals[-1]:.4e}  largest one-step increase {rise:9.2e}  {flag}")
    if args.out:
        with open(args.out, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", *NAMES])
            for m in rows:
                w.writerow([m.t, *("" if getattr(m, k) is None else getattr(m, k) for k in NAMES)])
        print(f"written to {args.out}")


if __name__ == "__main__":
    main()
