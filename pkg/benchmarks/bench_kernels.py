"""Compare the numba and pure-numpy kernel paths.

    python benchmarks/bench_kernels.py [--repeat N]

Each kernel is run on a few input sizes; both paths must agree before they
are timed. The jit column is empty when numba is not installed.
"""

import argparse
import timeit

import numpy as np

from timegrain import kernels
from timegrain._accel import HAVE_NUMBA
from timegrain.evaluation import IntervalSet


def cases(rng):
    for n in (50, 400, 2000):
        a = rng.integers(0, 30, n)
        b = rng.integers(0, 30, n)
        yield "lcs_length", n, kernels.lcs_length_numpy, kernels.lcs_length_jit, (a, b)
    for n in (10, 1000, 20000):
        def ivs():
            # kernels take disjoint sorted sets, as IntervalSet stores them
            s = rng.uniform(0, 10 * n, n)
            norm = IntervalSet(zip(s, s + rng.uniform(0, 4, n)))
            return norm.starts, norm.ends
        args = (*ivs(), *ivs())
        yield "intersection_length", n, kernels.intersection_length_numpy, kernels.intersection_length_jit, args
    for seconds in (1, 30, 120):
        x = rng.standard_normal(16000 * seconds)
        yield "frame_stats", f"{seconds}s", kernels.frame_stats_numpy, kernels.frame_stats_jit, (x, 320)


def best_of(fn, args, repeat):
    number = max(1, int(0.05 / max(timeit.timeit(lambda: fn(*args), number=1), 1e-7)))
    return min(timeit.repeat(lambda: fn(*args), number=number, repeat=repeat)) / number


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()
    rng = np.random.default_rng(args.seed)
    print(f"{'kernel':<20} {'size':>6} {'numpy_ms':>10} {'jit_ms':>10} {'speedup':>8}")
    for name, size, np_fn, jit_fn, a in cases(rng):
        t_np = best_of(np_fn, a, args.repeat)
        row = f"{name:<20} {size!s:>6} {1e3 * t_np:>10.4f}"
        if HAVE_NUMBA:
            want, got = np_fn(*a), jit_fn(*a)
            if not np.allclose(want, got, rtol=0, atol=1e-9):
                raise SystemExit(f"{name}: numpy and jit paths disagree")
            t_jit = best_of(jit_fn, a, args.repeat)
            row += f" {1e3 * t_jit:>10.4f} {t_np / t_jit:>7.1f}x"
        print(row)


if __name__ == "__main__":
    main()
