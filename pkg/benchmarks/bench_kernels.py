"""Compare the compiled Jacobi eigensolver with the pure-Python fallback.

Usage: python benchmarks/bench_kernels.py [--batch 4096] [--repeat 5]

For each matrix size and dtype, times one batched call of ``sym_eigh`` per
backend (best of ``--repeat``), and reports the speedup of the compiled
kernel. In float64 the fallback is ``numpy.linalg.eigh``; in long double it
is a batch-vectorized numpy Jacobi.
"""

import argparse
import timeit

import numpy as np

from jordan_cone import _kernels_py

try:
    from jordan_cone import _kernels
except ImportError:  # extension not built
    _kernels = None


def random_symmetric(rng, batch, n, dtype):
    a = rng.standard_normal((batch, n, n))
    return (0.5 * (a + np.swapaxes(a, -1, -2))).astype(dtype)


def best_time(fn, a, repeat):
    return min(timeit.repeat(lambda: fn(a), number=1, repeat=repeat))


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--batch", type=int, default=4096)
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--sizes", default="2,3,4,6")
    args = parser.parse_args()
    if _kernels is None:
        raise SystemExit("compiled kernel not available; build with `pip install -e . --no-build-isolation`")

    rng = np.random.default_rng(0)
    print(f"batch={args.batch}, best of {args.repeat}")
    print(f"{'dtype':>10} {'n':>3} {'compiled ms':>12} {'fallback ms':>12} {'speedup':>8} {'max |dw|':>10}")
    for dtype in (np.float64, np.longdouble):
        for n in map(int, args.sizes.split(",")):
            a = random_symmetric(rng, args.batch, n, dtype)
            tc = best_time(_kernels.sym_eigh, a, args.repeat)
            tp = best_time(_kernels_py.sym_eigh, a, args.repeat)
            dw = float(np.max(np.abs(_kernels.sym_eigh(a)[0] - _kernels_py.sym_eigh(a)[0])))
            print(f"{np.dtype(dtype).name:>10} {n:>3} {tc * 1e3:>12.2f} {tp * 1e3:>12.2f} "
                  f"{tp / tc:>7.1f}x {dw:>10.1e}")


if __name__ == "__main__":
    main()
