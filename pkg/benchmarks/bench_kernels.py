"""Time the hot kernels under numba and under the plain numpy fallback.

Each backend runs in its own interpreter because the choice is fixed at
import time by BIRKHOFF_LAB_DISABLE_NUMBA.

    python3 benchmarks/bench_kernels.py [--repeat N]
"""
import argparse
import json
import os
import subprocess
import sys

WORKER = r"""
import json, sys, time
import numpy as np
from birkhoff_lab import _backend, _kernels as K
from birkhoff_lab.birkhoff import OptimizerConfig, nearest_ru
from birkhoff_lab.diamond import diamond_distance
from birkhoff_lab.channels import RUChannel
from birkhoff_lab.lindblad import LindbladParams, dephasing_coefficients_series
from birkhoff_lab.model import ModelParams, channel_at

repeat = int(sys.argv[1])
ch = channel_at(ModelParams(), 1.5)
ru = RUChannel([0.5, 0.5], np.array([np.eye(4), np.diag([1, -1, 1, -1])]))
theta = np.random.default_rng(0).normal(size=8 * 3 + 8)
lp = LindbladParams(ModelParams(), 0.5)
grid = np.linspace(0, 10, 101)

cases = {
    "diamond_distance": lambda: diamond_distance(ch, ru, method="general"),
    "diag_diamond_fg": lambda: K.diag_diamond_fg(theta, 8, ch.gram, np.full(4, 0.5), 5000, 1e-12),
    "lindblad_block_series": lambda: dephasing_coefficients_series(lp, grid),
    "nearest_ru_2_starts": lambda: nearest_ru(ch, 8, OptimizerConfig(starts=2)),
}
out = {"backend": _backend.BACKEND}
for name, fn in cases.items():
    t0 = time.perf_counter()
    fn()  # warm-up, includes compilation on the numba path
    first = time.perf_counter() - t0
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    out[name] = {"first": first, "best": best}
print(json.dumps(out))
"""


def run(disable, repeat):
    env = dict(os.environ, BIRKHOFF_LAB_DISABLE_NUMBA="1" if disable else "0")
    res = subprocess.run([sys.executable, "-c", WORKER, str(repeat)], env=env, check=True, capture_output=True, text=True)
    return json.loads(res.stdout.strip().splitlines()[-1])


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    fast, slow = run(False, args.repeat), run(True, args.repeat)
    print(f"{'kernel':<24}{'numba [s]':>12}{'numpy [s]':>12}{'speedup':>10}")
    for name in fast:
        if name == "backend":
            continue
        a, b = fast[name]["best"], slow[name]["best"]
        print(f"{name:<24}{a:>12.4f}{b:>12.4f}{b / a:>10.1f}")


if __name__ == "__main__":
    main()
