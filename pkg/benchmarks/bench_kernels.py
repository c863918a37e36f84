"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Prints best-of-N wall time per kernel and backend, the speed-up, and the
largest difference between the two outputs.
"""

import argparse
import time

import numpy as np

from loopqrc import _core
from loopqrc.reservoir import ReservoirConfig, draw_crystal
from loopqrc.gaussian import vacuum_covariance


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def bench_loop(N, L, repeat):
    cfg = ReservoirConfig(N=N, R=0.75, r=0.75)
    S = draw_crystal(cfg, np.random.default_rng(0), 200_000)
    phases = cfg.m * np.pi * np.random.default_rng(1).uniform(-1, 1, L)
    g0 = vacuum_covariance(N)
    rows = {}
    for backend in ("python", "cython"):
        rows[backend] = best_of(
            lambda: _core.loop_recursion(S, cfg.R, g0, phases, cfg.r_input, backend), repeat
        )
    diff = np.max(np.abs(rows["python"][1][0] - rows["cython"][1][0]))
    return f"loop_recursion N={N} L={L}", rows, diff


def bench_mg(n_steps, repeat):
    rows = {}
    for backend in ("python", "cython"):
        rows[backend] = best_of(
            lambda: _core.mackey_glass_grid(0.9, n_steps, 170, 0.1, 0.2, 0.1, 10.0, True, backend),
            repeat,
        )
    diff = np.max(np.abs(rows["python"][1] - rows["cython"][1]))
    return f"mackey_glass_grid steps={n_steps}", rows, diff


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if _core._kernels is None:
        raise SystemExit("compiled kernels are not built; run `pip install -e .` first")
    cases = [bench_loop(8, 5200, args.repeat), bench_loop(12, 5200, args.repeat),
             bench_mg(160_000, args.repeat)]
    print(f"{'kernel':34s} {'python [s]':>11s} {'cython [s]':>11s} {'speed-up':>9s} {'max |diff|':>11s}")
    for name, rows, diff in cases:
        tp, tc = rows["python"][0], rows["cython"][0]
        print(f"{name:34s} {tp:11.4f} {tc:11.4f} {tp / tc:8.1f}x {diff:11.2e}")


if __name__ == "__main__":
    main()
