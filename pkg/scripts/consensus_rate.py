"""Fitted decay rate of squared disagreement on a complete graph versus the spectral value 2N.

Compares the explicit Euler and Heun steppers at several step sizes, both for
the bare consensus flow and for the closed-loop all-to-all screw law.
"""

import argparse

import numpy as np

from se3swarm.commnet import GraphSchedule, GraphSnapshot
from se3swarm.config import load_config
from se3swarm.consensus import disagreement, integrate
from se3swarm.engine import simulate


def fitted_rate(t, D):
    keep = (D > 1e-20) & (D < 0.5 * D[0])
    return -np.polyfit(t[keep], np.log(D[keep]), 1)[0]


def bare(n, h, scheme, rng):
    s = GraphSchedule.static(GraphSnapshot.complete(n), 1.0)
    _, hist = integrate(rng.normal(size=(n, 3)), s, 0.0, 1.5, h, scheme=scheme, record=True)
    t = np.arange(len(hist)) * h
    return fitted_rate(t, np.array([disagreement(p) for p in hist]))


def closed_loop(n, h, scheme):
    cfg = load_config("screw_dynamic", {"n_agents": n, "h": h, "horizon": 2.0, "consensus_scheme": scheme})
    samples = []
    simulate(cfg, on_step=lambda s, u: samples.append((s.t, disagreement(s.spatial_consensus("omega")))))
    t, D = np.array(samples).T
    return fitted_rate(t, D)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=10)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    target = 2 * args.n
    print(f"spectral prediction: {target}")
    print(f"{'h':>7} {'scheme':>6} {'bare':>10} {'err%':>7} {'closed':>10} {'err%':>7}")
    for h in (0.02, 0.01, 0.005):
        for scheme in ("euler", "heun"):
            a = bare(args.n, h, scheme, rng)
            b = closed_loop(args.n, h, scheme)
            print(f"{h:7.3f} {scheme:>6} {a:10.4f} {100 * abs(a - target) / target:7.2f} {b:10.4f} {100 * abs(b - target) / target:7.2f}")


if __name__ == "__main__":
    main()
