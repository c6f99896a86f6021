#!/usr/bin/env python3
"""Benchmark the compiled Gray-code permanent kernels against the numpy
fallback.

Usage:
    python benchmarks/bench_permanent.py [--max-n 20] [--repeats 3]
"""

import argparse
import time

import numpy as np

from csrank._kernels import BACKEND, permanent_py

try:
    from csrank._kernels import _glynn_ryser
except ImportError:
    _glynn_ryser = None


def time_call(fn, m, repeats):
    best = float("inf")
    value = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        value = fn(m)
        best = min(best, time.perf_counter() - t0)
    return best, value


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--max-n", type=int, default=20)
    parser.add_argument("--repeats", type=int, default=3)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    print(f"selected backend: {BACKEND}")
    if _glynn_ryser is None:
        print("compiled kernel unavailable; timing the numpy fallback only")

    rng = np.random.default_rng(args.seed)
    header = f"{'n':>3} {'glynn-py':>12} {'ryser-py':>12}"
    if _glynn_ryser is not None:
        header += f" {'glynn-cy':>12} {'ryser-cy':>12} {'speedup':>8}"
    print(header)

    for n in range(8, args.max_n + 1, 2):
        m = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        tg_py, vg_py = time_call(permanent_py.glynn, m, args.repeats)
        tr_py, vr_py = time_call(permanent_py.ryser, m, args.repeats)
        line = f"{n:>3} {tg_py:>12.4e} {tr_py:>12.4e}"
        if _glynn_ryser is not None:
            tg_cy, vg_cy = time_call(_glynn_ryser.glynn, m, args.repeats)
            tr_cy, vr_cy = time_call(_glynn_ryser.ryser, m, args.repeats)
            rel = abs(vg_py - vg_cy) / max(abs(vg_cy), 1e-300)
            assert rel < 1e-9, f"backend mismatch at n={n}: rel {rel:.2e}"
            rel = abs(vr_py - vr_cy) / max(abs(vr_cy), 1e-300)
            assert rel < 1e-9, f"backend mismatch at n={n}: rel {rel:.2e}"
            line += f" {tg_cy:>12.4e} {tr_cy:>12.4e} {tg_py / tg_cy:>7.1f}x"
        print(line)


if __name__ == "__main__":
    main()
