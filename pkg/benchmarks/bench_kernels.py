"""Time the compiled path kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--paths N] [--repeat R]
"""

import argparse
import time

import numpy as np

from extremal_decay import _fallback

try:
    from extremal_decay import _kernels
except ImportError:
    _kernels = None


def _best(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(n_paths):
    load1 = np.array([[np.sqrt(0.05)]])
    load2 = np.ascontiguousarray(np.array([[1.0, 0.0], [0.4, 1.0]]) * np.sqrt(0.05))
    return {
        "gauss d=1, 4000 steps": lambda m, g: m.gauss_walk_sup(
            g, n_paths, 4000, load1, np.array([0.05]), np.array([1.0])),
        "gauss d=2, 1000 steps": lambda m, g: m.gauss_walk_sup(
            g, n_paths, 1000, load2, np.full(2, 0.05), np.ones(2)),
        "on-off, 1000 steps": lambda m, g: m.onoff_sources(
            g, max(1, n_paths // 10), 1000, 0.6, 0.7, 0.5),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--paths", type=int, default=10_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    if _kernels is None:
        print("compiled kernels not built; only the fallback is timed")
    print(f"{'case':<26}{'compiled s':>12}{'python s':>12}{'speedup':>10}")
    for name, run in cases(args.paths).items():
        py = _best(lambda: run(_fallback, np.random.default_rng(0)), args.repeat)
        if _kernels is None:
            print(f"{name:<26}{'-':>12}{py:>12.3f}{'-':>10}")
            continue
        cc = _best(lambda: run(_kernels, np.random.default_rng(0)), args.repeat)
        print(f"{name:<26}{cc:>12.3f}{py:>12.3f}{py / cc:>9.1f}x")


if __name__ == "__main__":
    main()
