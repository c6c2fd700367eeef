"""Compare the numba and pure-numpy kernels on evolution and residual sweeps.

Usage: python3 benchmarks/bench_kernels.py [--size 400] [--repeat 5]
"""

import argparse
import time

import numpy as np

from lpkdv import _kernels


def _time(func, repeat):
    func()  # warm-up (JIT compilation for numba)
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        func()
        best = min(best, time.perf_counter() - t)
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--size", type=int, default=400)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    n = args.size
    p, q = 2.0, 1.0
    rng = np.random.default_rng(0)
    base = np.full((n, n), np.nan)
    base[:, 0] = 0.01 * rng.standard_normal(n)
    base[-1, :] = base[-1, 0]
    field = rng.standard_normal((n, n))

    if not _kernels.NUMBA_KERNELS:
        print("numba unavailable; only the numpy backend can be timed")
    print(f"{'kernel':<26}{'numpy [s]':>12}{'numba [s]':>12}{'speed-up':>10}")
    for name, make in (
        ("fill_lower_right", lambda: (base.copy(), p, q)),
        ("residual_field", lambda: (field, p, q)),
    ):
        times = {}
        outs = {}
        for label, table in (("numpy", _kernels.NUMPY_KERNELS), ("numba", _kernels.NUMBA_KERNELS)):
            if name not in table:
                continue
            fn = table[name]

            def run(fn=fn, label=label):
                argv = make()
                res = fn(*argv)
                outs[label] = argv[0] if name.startswith("fill") else res

            times[label] = _time(run, args.repeat)
        nb = times.get("numba", float("nan"))
        print(f"{name:<26}{times['numpy']:>12.4f}{nb:>12.4f}{times['numpy'] / nb:>10.1f}")
        if len(outs) == 2:
            print(f"{'':<26}max |numpy - numba| = {np.nanmax(np.abs(outs['numpy'] - outs['numba'])):.2e}")


if __name__ == "__main__":
    main()
