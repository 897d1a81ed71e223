#!/usr/bin/env python3
"""Time the compiled OS-CFAR kernel against the numpy fallback.

The window scan is the hot inner loop of the Monte-Carlo detection runs
(everything else in the chain is FFT/BLAS-bound), so this is the kernel
the compiled extension exists for.
"""

import argparse
import time

import numpy as np

from ddsense import kernels


def time_backend(power, geom, order_k, backend, repeats):
    g_l, g_k, t_l, t_k = geom
    kernels.cfar_scan(power, g_l, g_k, t_l, t_k, order_k, 5.0, backend=backend)
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        kernels.cfar_scan(power, g_l, g_k, t_l, t_k, order_k, 5.0,
                          backend=backend)
        best = min(best, time.perf_counter() - start)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=20)
    args = parser.parse_args()

    cases = [
        ("16x16 map, guard 1, train 4", (16, 16), (1, 1, 4, 4)),
        ("64x64 map, guard 1, train 4", (64, 64), (1, 1, 4, 4)),
        ("64x64 map, guard 2, train 8", (64, 64), (2, 2, 8, 8)),
        ("256x128 map, guard 2, train 6", (256, 128), (2, 2, 6, 6)),
    ]
    rng = np.random.default_rng(0)
    backends = ["numpy"] + (["compiled"] if kernels.HAVE_COMPILED else [])
    print(f"compiled kernel available: {kernels.HAVE_COMPILED}")
    print(f"{'case':<34}" + "".join(f"{b:>12}" for b in backends) + f"{'speedup':>10}")
    for name, shape, geom in cases:
        power = rng.exponential(size=shape)
        g_l, g_k, t_l, t_k = geom
        nwin = (2 * (g_l + t_l) + 1) * (2 * (g_k + t_k) + 1) \
            - (2 * g_l + 1) * (2 * g_k + 1)
        order_k = int(np.ceil(0.75 * nwin))
        times = [time_backend(power, geom, order_k, b, args.repeats)
                 for b in backends]
        row = f"{name:<34}" + "".join(f"{t * 1e3:>10.2f}ms" for t in times)
        if len(times) == 2:
            row += f"{times[0] / times[1]:>9.1f}x"
        print(row)


if __name__ == "__main__":
    main()
