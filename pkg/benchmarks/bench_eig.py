"""Benchmark the shifted-QR eigenvalue kernel: compiled extension vs the
pure-Python fallback.

Usage: python benchmarks/bench_eig.py [sizes...]
"""

from __future__ import annotations

import sys
import time

import numpy as np

from nlcurrents import eig as E


def bench(n: int, repeats: int = 3) -> tuple[float, float, float]:
    rng = np.random.default_rng(n)
    A = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    H = E.hessenberg(A)
    times = {}
    for label, use_compiled in (("compiled", True), ("python", False)):
        if use_compiled and not E.USING_COMPILED:
            times[label] = float("nan")
            continue
        best = float("inf")
        for _ in range(repeats):
            work = H.copy()
            t0 = time.perf_counter()
            E._qr_values(work, use_compiled=use_compiled)
            best = min(best, time.perf_counter() - t0)
        times[label] = best
    v1 = np.sort_complex(E._qr_values(H.copy(), use_compiled=False))
    v2 = np.sort_complex(E._qr_values(H.copy(),
                                      use_compiled=E.USING_COMPILED))
    return times["compiled"], times["python"], float(np.max(np.abs(v1 - v2)))


def main() -> None:
    sizes = [int(s) for s in sys.argv[1:]] or [20, 50, 100, 156, 250]
    print(f"compiled kernel available: {E.USING_COMPILED}")
    print(f"{'n':>5} {'compiled [s]':>14} {'python [s]':>14} "
          f"{'speedup':>8} {'max |dE|':>10}")
    for n in sizes:
        tc, tp, diff = bench(n)
        speed = tp / tc if tc == tc and tc > 0 else float("nan")
        print(f"{n:>5} {tc:>14.6f} {tp:>14.6f} {speed:>8.1f} {diff:>10.2e}")


if __name__ == "__main__":
    main()
