"""Time the numba and pure-numpy backends on the same workloads.

Each backend runs in its own interpreter because the choice is made at
import time from CXBOHM_DISABLE_NUMBA.

    python3 benchmarks/bench_backends.py [--particles N] [--repeat R]
"""
import argparse
import json
import os
import subprocess
import sys

WORKER = r"""
import json, math, sys, time
import numpy as np
from cxbohm import BACKEND, GaussianPacket, HarmonicOscillator, integrate_trajectory
from cxbohm.ensemble import evolve_real_ensemble, sample_born

n, repeat = int(sys.argv[1]), int(sys.argv[2])

def best(fn):
    fn()  # warm-up (numba compiles here, or loads its cache)
    ts = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        ts.append(time.perf_counter() - t)
    return min(ts)

s1 = HarmonicOscillator(n=1)
g = GaussianPacket()
snap = sample_born(g, 0.0, n, 1)
t_start = time.perf_counter()
res = {
    "backend": BACKEND,
    "trajectory_ho1_x4": best(lambda: [integrate_trajectory(s1, x0, (0, 2 * math.pi)) for x0 in (1.2, 1.35, 1.45, 1.55)]),
    "trajectory_packet_t50": best(lambda: integrate_trajectory(g, 1 + 1j, (0, 50.0))),
    f"ensemble_packet_n{n}": best(lambda: evolve_real_ensemble(snap, 2.0)),
}
print(json.dumps(res))
"""


def run(disable, n, repeat):
    env = dict(os.environ)
    env.pop("CXBOHM_DISABLE_NUMBA", None)
    if disable:
        env["CXBOHM_DISABLE_NUMBA"] = "1"
    out = subprocess.run([sys.executable, "-c", WORKER, str(n), str(repeat)], env=env, capture_output=True, text=True, check=True)
    return json.loads(out.stdout)


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--particles", type=int, default=20_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    fast = run(False, args.particles, args.repeat)
    slow = run(True, args.particles, args.repeat)
    if fast["backend"] != "numba":
        print("numba is not installed; only the numpy backend was timed")
    keys = [k for k in slow if k != "backend"]
    print(f"{'workload':<26}{fast['backend']:>12}{'numpy':>12}{'speedup':>10}")
    for k in keys:
        print(f"{k:<26}{fast[k]:>11.4f}s{slow[k]:>11.4f}s{slow[k] / fast[k]:>9.1f}x")


if __name__ == "__main__":
    main()
