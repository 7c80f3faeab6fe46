"""Compare the compiled kernels with the pure-Python fallback.

    python benchmarks/bench_kernels.py [--repeat 2000] [--users 8] [--env-steps 5000]

Kernel timings call both implementations directly. The environment timing
runs a short random-policy rollout in a child process per backend, since
the backend is fixed at import time.
"""

from __future__ import annotations

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from aahc_sim import _purepy, kernels

ROLLOUT = """
import time
from aahc_sim.agents.policies import RandomPolicy
from aahc_sim.env import MetaverseEnv, ScenarioConfig
from aahc_sim.harness.rng import derive_streams, stream
from aahc_sim import kernels
cfg = ScenarioConfig.from_name('3-{users}')
env = MetaverseEnv(cfg, derive_streams(0))
pol = RandomPolicy(cfg, stream(0, 'bench'))
t = time.perf_counter()
for _ in range({steps}):
    if env.done:
        env.reset()
    env.uplink_step(pol.uplink())
    env.downlink_step(pol.downlink())
print(kernels.BACKEND, (time.perf_counter() - t) / {steps} * 1e6)
"""


def bench(fn, args, repeat):
    return min(timeit.repeat(lambda: fn(*args), number=repeat, repeat=3)) / repeat * 1e6


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--repeat", type=int, default=2000)
    ap.add_argument("--users", type=int, default=8)
    ap.add_argument("--gae-length", type=int, default=2048)
    ap.add_argument("--env-steps", type=int, default=5000)
    args = ap.parse_args(argv)

    rng = np.random.default_rng(0)
    n, m = args.users, 3
    gamma = rng.integers(0, m + 1, n)
    p = rng.uniform(1, 20, n)
    g2 = 10 ** rng.uniform(-9, -4, (n, m))
    w = np.full(m, 10e9)
    nz = np.full((n, m), 3.98e-21)
    t = args.gae_length
    r, v, vn = rng.normal(size=(3, t))
    d = (rng.random(t) < 0.05).astype(np.uint8)

    impls = [("python", _purepy)]
    if kernels.BACKEND == "compiled":
        impls.append(("compiled", kernels._impl))
    else:
        print("compiled extension not built; only the fallback is timed")

    cases = [
        (f"ul_rates N={n}", "ul_rates", (gamma, p, g2, w, 3.98e-21), args.repeat),
        (f"dl_rates N={n}", "dl_rates", (gamma, p, g2, w, nz), args.repeat),
        (f"gae T={t}", "gae", (r, v, vn, d, 0.99, 0.95), max(args.repeat // 20, 10)),
    ]
    print(f"{'kernel':<16}" + "".join(f"{name + ' us':>16}" for name, _ in impls) + f"{'speedup':>10}")
    for label, attr, fargs, rep in cases:
        times = [bench(getattr(mod, attr), fargs, rep) for _, mod in impls]
        speed = f"{times[0] / times[-1]:.1f}x" if len(times) > 1 else "-"
        print(f"{label:<16}" + "".join(f"{x:>16.2f}" for x in times) + f"{speed:>10}")

    if args.env_steps > 0:
        print(f"\nenvironment iteration (3-{n}, random policy, {args.env_steps} steps):")
        code = ROLLOUT.format(users=n, steps=args.env_steps)
        for pure in ("1", "0"):
            env = dict(os.environ, AAHC_SIM_PURE=pure)
            out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
            backend, us = out.stdout.split()
            print(f"  {backend:<10}{float(us):>10.1f} us/iteration")


if __name__ == "__main__":
    main()
