"""Compiled core vs numpy fallback on the hot kernels and a short run.

    python benchmarks/bench_core.py [--n 20000] [--repeat 5]
"""
import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from fkpp_nonlocal import _backend

RUN_SNIPPET = """
import time
from fkpp_nonlocal import BACKEND, InitialData, Kernel, SimConfig, run
t0 = time.perf_counter()
run(Kernel.step(0.25), InitialData(), SimConfig(dt_max=0.05, t_end=15.0, large_courant=True, deterministic=True))
print(BACKEND, time.perf_counter() - t0)
"""


def cases(n, rng):
    diag = 2.0 + rng.random(n)
    lower = -rng.random(n - 1)
    upper = -rng.random(n - 1)
    rhs = rng.random(n)
    u = rng.random(n)
    small = rng.uniform(-0.4, 0.4, n + 1)
    large = np.cumsum(rng.uniform(-0.2, 0.2, n + 1)) * 0.05 + 3.0
    k = rng.random(2001)
    return {
        "tridiag_solve": lambda m: m.tridiag_solve(lower, diag, upper, rhs),
        "upwind_fluxes": lambda m: m.upwind_fluxes(u, small),
        "remap_fluxes": lambda m: m.remap_fluxes(u, large),
        "direct_convolve(2000)": lambda m: m.direct_convolve(u[:2000], k),
    }


def short_run(pure):
    env = dict(os.environ, FKPP_PURE_PYTHON="1" if pure else "0")
    out = subprocess.run([sys.executable, "-c", RUN_SNIPPET], env=env, capture_output=True, text=True, check=True)
    name, secs = out.stdout.split()
    return name, float(secs)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=20_000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    try:
        fast = _backend.get("cython")
    except ImportError:
        sys.exit("compiled core not built; run pip install -e . first")
    slow = _backend.get("python")
    print(f"{'kernel':<24}{'python ms':>12}{'cython ms':>12}{'speedup':>10}")
    for name, fn in cases(args.n, np.random.default_rng(0)).items():
        tp = min(timeit.repeat(lambda: fn(slow), number=1, repeat=args.repeat)) * 1e3
        tc = min(timeit.repeat(lambda: fn(fast), number=1, repeat=args.repeat)) * 1e3
        print(f"{name:<24}{tp:>12.3f}{tc:>12.3f}{tp / tc:>10.1f}")
    _, tp = short_run(True)
    _, tc = short_run(False)
    print(f"{'step kernel t=15 run':<24}{tp * 1e3:>12.0f}{tc * 1e3:>12.0f}{tp / tc:>10.1f}")


if __name__ == "__main__":
    main()
