"""Time the numba and numpy backends of the hot kernels on identical inputs.

    python benchmarks/bench_kernels.py [--repeat 3] [--scale 1.0]

Each kernel is run once per backend before timing so numba compilation is
excluded; the script also reports the largest disagreement between backends.
"""
import argparse
import time

import numpy as np

from alphawilton import _kernels as kern
from alphawilton._accel import HAVE_NUMBA


def best_of(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def cases(scale):
    rng = np.random.default_rng(2024)
    n = int(20_000 * scale)
    xs = rng.uniform(0.0, 1.0, n)
    lo = np.zeros_like(xs)
    starts = rng.uniform(0.0, 0.6, int(200 * scale))
    return {
        f"series_batch  W_2/5  n={n}": lambda b: kern.series_batch(xs, lo, 0.4, 1e-10, 200, backend=b),
        f"series_batch  B_1/2  n={n}": lambda b: kern.series_batch(xs, lo, 0.5, 1e-10, 200,
                                                                   mode=kern.MODE_BRJUNO, backend=b),
        f"logq_batch    k=10^4 trials={starts.size}": lambda b: kern.logq_batch(starts, 0.42, 10_000, b),
        f"orbit_hist    64 bins steps=10^4 orbits={starts.size}":
            lambda b: kern.orbit_histogram(starts, 0.45, 10_000, 64, b),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--scale", type=float, default=1.0)
    args = ap.parse_args()
    if not HAVE_NUMBA:
        print("numba is not installed; only the numpy backend is available")
    print(f"{'kernel':<48} {'numpy s':>9} {'numba s':>9} {'speedup':>8} {'max diff':>10}")
    for name, run in cases(args.scale).items():
        t_np, out_np = best_of(lambda: run("numpy"), args.repeat)
        if HAVE_NUMBA:
            t_nb, out_nb = best_of(lambda: run("numba"), args.repeat)
            diff = max(float(np.max(np.abs(np.asarray(a, dtype=float) - np.asarray(b, dtype=float))))
                       for a, b in zip(out_np, out_nb) if np.ndim(a))
            print(f"{name:<48} {t_np:9.4f} {t_nb:9.4f} {t_np / t_nb:8.1f} {diff:10.2e}")
        else:
            print(f"{name:<48} {t_np:9.4f} {'-':>9} {'-':>8} {'-':>10}")


if __name__ == "__main__":
    main()
