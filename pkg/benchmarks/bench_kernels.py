"""Compare the numba and numpy kernel backends.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Each kernel runs once untimed (JIT warm-up), then ``repeat`` times; the best
wall time is reported.
"""

import argparse
import time

import numpy as np

from bngkit import _kernels as k


def best_of(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    if not k.HAVE_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")

    rng = np.random.default_rng(0)
    alphas = rng.uniform(-1, 1, 20_000)
    alphas[-1] = -alphas[:-1].sum()
    phases = rng.uniform(-np.pi, np.pi, 64)
    sorted_phases = np.sort(rng.uniform(-np.pi, np.pi, 200_000))

    cases = [
        ("greedy_order n=20000", lambda: k.greedy_order_numpy(alphas), lambda: k.greedy_order_numba(alphas)),
        ("ell_grid D=64 grid=1e5", lambda: k.ell_grid_numpy(phases), lambda: k.ell_grid_numba(phases)),
        ("max_gap n=200000", lambda: k.max_gap_numpy(sorted_phases), lambda: k.max_gap_numba(sorted_phases)),
    ]
    print(f"{'kernel':<26}{'numpy [ms]':>12}{'numba [ms]':>12}{'speedup':>10}")
    for name, slow, fast in cases:
        t_np, t_nb = best_of(slow, args.repeat), best_of(fast, args.repeat)
        print(f"{name:<26}{1e3 * t_np:>12.3f}{1e3 * t_nb:>12.3f}{t_np / t_nb:>9.1f}x")


if __name__ == "__main__":
    main()
