"""Timing comparison of the two column-iterative ascent kernels.

Imports both backend modules directly (bypassing the import-time
selector), checks that they produce the same iterate on each problem,
then times full sweep loops on the Gram shapes the designs actually
produce: per-user combiner Grams (small), mid-size, and the combined
transmit-side Gram (large).

Run from the repository root::

    python3 benchmarks/bench_cia.py [--sweeps 100] [--repeat 5]
"""

import argparse
import math
import sys
import time

import numpy as np

from hbfsim._kernels import _cia_py

try:
    from hbfsim._kernels import _cia_cy
except ImportError:
    _cia_cy = None


CASES = [
    ("combiner  4x4, m=2", 4, 2),
    ("mid      16x16, m=4", 16, 4),
    ("precoder 64x64, m=8", 64, 8),
    ("precoder 64x64, m=16", 64, 16),
]


def _gram(rng, n):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return np.ascontiguousarray(a @ a.conj().T)


def _run_sweeps(impl, d, m, n_sweeps):
    n = d.shape[0]
    scale = 1.0 / math.sqrt(n)
    b = np.full((n, m), scale + 0j)
    for _ in range(n_sweeps):
        impl.cia_sweep(d, b, scale, 1e-10)
    return b


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    parser.add_argument("--sweeps", type=int, default=100,
                        help="sweeps per timed run (default 100)")
    parser.add_argument("--repeat", type=int, default=5,
                        help="timed repetitions, best is reported")
    args = parser.parse_args(argv)

    if _cia_cy is None:
        print("compiled backend not importable; timing python only")
    rng = np.random.default_rng(0)

    header = "%-22s %12s %12s %9s" % ("case", "python", "compiled",
                                      "speedup")
    print(header)
    print("-" * len(header))
    for name, n, m in CASES:
        d = _gram(rng, n)
        if _cia_cy is not None:
            b_py = _run_sweeps(_cia_py, d, m, 3)
            b_cy = _run_sweeps(_cia_cy, d, m, 3)
            if not np.allclose(b_py, b_cy, atol=1e-9):
                print("backend mismatch on %s" % name, file=sys.stderr)
                return 1

        def best(impl):
            times = []
            for _ in range(args.repeat):
                t0 = time.perf_counter()
                _run_sweeps(impl, d, m, args.sweeps)
                times.append(time.perf_counter() - t0)
            return min(times)

        t_py = best(_cia_py)
        if _cia_cy is not None:
            t_cy = best(_cia_cy)
            print("%-22s %10.2f ms %10.2f ms %8.2fx"
                  % (name, 1e3 * t_py, 1e3 * t_cy, t_py / t_cy))
        else:
            print("%-22s %10.2f ms %12s %9s" % (name, 1e3 * t_py, "-", "-"))
    return 0


if __name__ == "__main__":
    sys.exit(main())
