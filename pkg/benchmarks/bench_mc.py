#!/usr/bin/env python3
"""Benchmark the compiled Monte-Carlo kernel against the numpy fallback.

Times the raw membership-counting kernels on identical pre-drawn sample
arrays, one row per relaxation body, and reports throughput plus speedup.

    python3 benchmarks/bench_mc.py --samples 2000000 --repeat 5
"""

import argparse
import time

import numpy as np

from perspex import Breakpoints, Interval, PowerFn, RelaxationKind, make_body
from perspex import _mc_fallback
from perspex.mc import _KIND_CODE

try:
    from perspex import _mc_kernel
except ImportError:
    _mc_kernel = None


def _best_time(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--samples", type=int, default=2_000_000)
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--p", type=float, default=2.0)
    args = parser.parse_args()

    iv = Interval(0.5, 1.0)
    pf = PowerFn(args.p, iv)
    bp = Breakpoints.equally_spaced(iv, 8)

    gen = np.random.Generator(np.random.Philox(key=0))
    r = gen.random((3, args.samples))

    if _mc_kernel is None:
        print("compiled kernel not built; timing the numpy fallback only\n")

    header = f"{'body':8s} {'numpy ms':>10s} {'numpy Ms/s':>11s}"
    if _mc_kernel is not None:
        header += f" {'compiled ms':>12s} {'compiled Ms/s':>14s} {'speedup':>8s}"
    print(f"samples per body: {args.samples:,} (p={args.p})")
    print(header)

    for kind in RelaxationKind:
        body = make_body(kind, pf, bp)
        xs = r[0] * body.interval.upper
        ys = r[1] * body.box_height
        zs = r[2]
        code = _KIND_CODE[kind]
        kernel_args = body._kernel_args()

        t_py = _best_time(
            lambda: _mc_fallback.count_hits(code, xs, ys, zs, *kernel_args), args.repeat
        )
        line = f"{kind.value:8s} {t_py*1e3:10.1f} {args.samples/t_py/1e6:11.1f}"
        if _mc_kernel is not None:
            hits_c = _mc_kernel.count_hits(code, xs, ys, zs, *kernel_args)
            hits_p = _mc_fallback.count_hits(code, xs, ys, zs, *kernel_args)
            assert hits_c == hits_p, f"backend mismatch for {kind.value}: {hits_c} vs {hits_p}"
            t_c = _best_time(
                lambda: _mc_kernel.count_hits(code, xs, ys, zs, *kernel_args), args.repeat
            )
            line += f" {t_c*1e3:12.1f} {args.samples/t_c/1e6:14.1f} {t_py/t_c:7.1f}x"
        print(line)


if __name__ == "__main__":
    main()
