"""Run one preset over many seeds in a single vectorised batch and summarise the outcome.

    python3 scripts/seed_sweep.py parallel_n10 --seeds 100
    python3 scripts/seed_sweep.py balanced --seeds 100 --threshold 1e-3 --below
"""

import argparse
import time

import numpy as np

from se3swarm.config import load_config
from se3swarm.engine import simulate_batch
from se3swarm.swarm import dispersion_of, spatial_twists


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("config")
    ap.add_argument("--seeds", type=int, default=100)
    ap.add_argument("--horizon", type=float)
    ap.add_argument("--threshold", type=float, default=0.999, help="|x_av| threshold")
    ap.add_argument("--below", action="store_true", help="count runs with |x_av| <= threshold instead")
    args = ap.parse_args()

    cfg = load_config(args.config, {"horizon": args.horizon})
    t0 = time.perf_counter()
    state, u, _, _ = simulate_batch(cfg, range(args.seeds))
    elapsed = time.perf_counter() - t0

    x_av = np.linalg.norm(state.R[..., :, 0].mean(axis=-2), axis=-1)
    disp = dispersion_of(spatial_twists(state.R, state.r, u))
    hits = x_av <= args.threshold if args.below else x_av >= args.threshold
    rel = "<=" if args.below else ">="
    print(f"{cfg.name}: {args.seeds} seeds, N={cfg.n_agents}, t={cfg.n_steps * cfg.h:g}  ({elapsed:.1f} s)")
    print(f"  |x_av| {rel} {args.threshold:g}: {int(hits.sum())}/{args.seeds}")
    print(f"  |x_av|     min {x_av.min():.6f}  median {np.median(x_av):.6f}  max {x_av.max():.6f}")
    print(f"  dispersion min {disp.min():.2e}  median {np.median(disp):.2e}  max {disp.max():.2e}")
    worst = np.argsort(disp)[-3:][::-1]
    print("  slowest seeds:", ", ".join(f"{int(s)} ({disp[s]:.1e})" for s in worst))


if __name__ == "__main__":
    main()
