"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Also times a full simulated run under each backend (the backend is fixed at
import, so each run happens in a fresh interpreter).
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from elo_arena import kernels


def cases(rng):
    rewards = rng.integers(0, 2, (64, 8)).astype(np.float64)
    adv = kernels.python_backend.group_advantages(rewards)
    outputs = rng.normal(size=rewards.shape)
    r_opp = rng.uniform(1200, 2200, 64)
    scores = rng.integers(0, 2, 10_000).astype(np.float64)
    probs = rng.dirichlet(np.ones(3))
    u = rng.random(64)
    return {
        "elo_walk (10k matches)": lambda b: b.elo_walk(1350.0, 1700.0, scores, 32.0),
        "elo_batch_delta (64x8)": lambda b: b.elo_batch_delta(1350.0, r_opp, rewards, 2.0),
        "group_advantages (64x8)": lambda b: b.group_advantages(rewards),
        "clipped_surrogate (64x8)": lambda b: b.clipped_surrogate(outputs, adv, 0.1, 0.0, 1.0, 0.2),
        "inverse_cdf_sample (64)": lambda b: b.inverse_cdf_sample(probs, u),
    }


RUN_SNIPPET = """
import time
from elo_arena import BACKEND
from elo_arena.config import curriculum_config
from elo_arena.orchestrator import cache_for, run
cfg = curriculum_config(seed=0, iterations=2000)
cache = cache_for(cfg)
t = time.perf_counter()
run(cfg, cache)
print(BACKEND, time.perf_counter() - t)
"""


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--number", type=int, default=200)
    args = ap.parse_args()
    if kernels.compiled_backend is None:
        print("compiled extension not built; only the python backend is available")
    backends = {"python": kernels.python_backend}
    if kernels.compiled_backend is not None:
        backends["cython"] = kernels.compiled_backend

    print(f"{'kernel':28s}" + "".join(f"{n:>14s}" for n in backends) + "   speedup")
    for name, fn in cases(np.random.default_rng(0)).items():
        times = {}
        for bname, b in backends.items():
            best = min(timeit.repeat(lambda: fn(b), number=args.number, repeat=args.repeat))
            times[bname] = best / args.number * 1e6
        row = f"{name:28s}" + "".join(f"{times[n]:12.2f}us" for n in backends)
        if "cython" in times:
            row += f"   {times['python'] / times['cython']:6.1f}x"
        print(row)

    print("\nfull run (2000 iterations, B=4, G=8):")
    for flag in (["1"] if kernels.compiled_backend is None else ["1", "0"]):
        env = dict(os.environ, ELO_ARENA_PURE_PYTHON=flag)
        out = subprocess.run([sys.executable, "-c", RUN_SNIPPET], env=env, capture_output=True,
                             text=True, check=True)
        backend, secs = out.stdout.split()
        print(f"  {backend:8s} {float(secs):.3f} s")


if __name__ == "__main__":
    main()
