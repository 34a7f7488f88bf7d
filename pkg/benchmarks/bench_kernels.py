"""Time the numba and numpy kernel paths on trajectory-sized inputs.

    python benchmarks/bench_kernels.py [--repeat N]

JIT compilation is excluded (one warm-up call per kernel).  Each row also
reports the largest difference between the two paths' outputs.
"""
import argparse
import math
import time

import numpy as np

from qipflow import _kernels


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - start)
    return min(times), out


def cases():
    rng = np.random.default_rng(0)
    g = rng.normal(size=(4001, 4, 4)) + 1j * rng.normal(size=(4001, 4, 4))
    herm = 0.5 * (g + np.conj(np.transpose(g, (0, 2, 1))))
    h = 0.005
    kern = 0.05 * np.exp((0.01j - 0.1) * np.arange(12001) * h)
    grid = np.linspace(0.0, 50.0, 4001)
    ohmic = (1e-8, 0.5 * math.gamma(3.5), 1.0, 3.5)
    return [
        ("jacobi_eigh 4001 x (4x4)",
         lambda: _kernels.jacobi_eigh_numba(herm)[0], lambda: _kernels.jacobi_eigh_numpy(herm)[0]),
        ("volterra 12001 steps",
         lambda: _kernels.volterra_numba(kern, h), lambda: _kernels.volterra_numpy(kern, h)),
        ("ohmic_cumulative 4001 points",
         lambda: _kernels.ohmic_cumulative_numba(grid, *ohmic)[0],
         lambda: _kernels.ohmic_cumulative_numpy(grid, *ohmic)[0]),
    ]


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()
    if _kernels.numba is None:
        raise SystemExit("numba is not installed; nothing to compare")
    print(f"{'kernel':32s} {'numba [s]':>10s} {'numpy [s]':>10s} {'speedup':>8s} {'max diff':>9s}")
    for name, fast, slow in cases():
        fast()  # compile
        t_fast, a = best_of(fast, args.repeat)
        t_slow, b = best_of(slow, args.repeat)
        diff = float(np.max(np.abs(np.asarray(a) - np.asarray(b))))
        print(f"{name:32s} {t_fast:10.4f} {t_slow:10.4f} {t_slow / t_fast:8.1f} {diff:9.1e}")


if __name__ == "__main__":
    main()
