"""Time the demonstrator kernels under the numba and pure-numpy backends.

Each backend runs in its own interpreter (the backend is fixed at import time
by ``INVBANDIT_NUMBA``).  The numba timing excludes the first, compiling call.

    python3 benchmarks/bench_kernels.py [--runs 20] [--T 5000]
"""
import argparse
import json
import os
import subprocess
import sys

_WORKER = r"""
import json, sys, time
import numpy as np
from invbandit import BACKEND, DemonstratorConfig, RewardModel, RewardTape, make_instance, simulate

runs, horizon = int(sys.argv[1]), int(sys.argv[2])
inst = make_instance([1.0, 0.8, 0.6, 0.5], RewardModel.gaussian(1.0))
out = {"backend": BACKEND}
for alg in ("UCB", "SAE", "ETC"):
    cfg = DemonstratorConfig(alg, 0.25, horizon)
    simulate(inst, cfg, 0)  # warm-up / compile
    t0 = time.perf_counter()
    digest = 0
    for seed in range(runs):
        digest ^= hash(simulate(inst, cfg, seed).actions.tobytes())
    out[alg] = (time.perf_counter() - t0) / runs
    out[alg + "_digest"] = digest
tape = RewardTape(inst, 1)
tape.read_block(1, 0, 10)
t0 = time.perf_counter()
block = tape.read_block(1, 0, 200_000)
out["tape_200k"] = time.perf_counter() - t0
out["tape_sum"] = float(block.sum())
print(json.dumps(out))
"""


def run_backend(flag, runs, horizon):
    env = dict(os.environ, INVBANDIT_NUMBA=flag)
    res = subprocess.run([sys.executable, "-c", _WORKER, str(runs), str(horizon)], env=env,
                         capture_output=True, text=True, check=True)
    return json.loads(res.stdout)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--runs", type=int, default=20)
    ap.add_argument("--T", type=int, default=5000)
    args = ap.parse_args()

    fast = run_backend("1", args.runs, args.T)
    slow = run_backend("0", max(1, args.runs // 4), args.T)
    print(f"K=4 Gaussian, alpha=0.25, T={args.T}; seconds per call")
    print(f"{'kernel':<12}{fast['backend']:>12}{slow['backend']:>12}{'speedup':>10}")
    for key in ("UCB", "SAE", "ETC", "tape_200k"):
        print(f"{key:<12}{fast[key]:>12.5f}{slow[key]:>12.5f}{slow[key] / fast[key]:>9.1f}x")
    if fast["tape_sum"] != slow["tape_sum"]:
        print("warning: backends disagree on the reward tape", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
