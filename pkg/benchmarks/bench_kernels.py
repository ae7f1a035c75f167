"""Compare the numpy and numba kernel paths on the hot operations.

Run:  python benchmarks/bench_kernels.py [--sizes 1e3,1e5,1e6] [--repeat 7]

Both backends are imported directly (the ISONETS_KERNELS flag is not
needed here); the numba functions are warmed up before timing so JIT
compilation does not pollute the numbers.  The last section times a
path-ordered 2x2 frame product of the kind the net transforms run,
batched across one grid axis.
"""

import argparse
import statistics
import time

import numpy as np

from isonets.kernels import numba_backend, numpy_backend


def timeit(fn, repeat):
    samples = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        samples.append(time.perf_counter() - t0)
    return statistics.median(samples)


def row(label, t_np, t_nb):
    ratio = t_np / t_nb if t_nb > 0 else float("inf")
    print(f"{label:<28} numpy {t_np * 1e3:9.3f} ms   numba {t_nb * 1e3:9.3f} ms   "
          f"numpy/numba {ratio:5.2f}x")


def bench_size(n, repeat, rng):
    print(f"\n-- batch size {n:,} --")
    p = rng.normal(size=(n, 4))
    q = rng.normal(size=(n, 4))
    row("hamilton product",
        timeit(lambda: numpy_backend.qmul(p, q), repeat),
        timeit(lambda: numba_backend.qmul(p, q), repeat))
    row("quaternion inverse",
        timeit(lambda: numpy_backend.qinv(p), repeat),
        timeit(lambda: numba_backend.qinv(p), repeat))
    m = max(n // 4, 1)
    a = rng.normal(size=(m, 2, 2, 4))
    b = rng.normal(size=(m, 2, 2, 4))
    v = rng.normal(size=(m, 2, 4))
    row("2x2 matrix product",
        timeit(lambda: numpy_backend.mat2_mul(a, b), repeat),
        timeit(lambda: numba_backend.mat2_mul(a, b), repeat))
    row("2x2 matrix-vector",
        timeit(lambda: numpy_backend.mat2_vec(a, v), repeat),
        timeit(lambda: numba_backend.mat2_vec(a, v), repeat))
    row("2x2 inverse",
        timeit(lambda: numpy_backend.mat2_inv(a), repeat),
        timeit(lambda: numba_backend.mat2_inv(a), repeat))


def bench_frame_sweep(steps, width, repeat, rng):
    print(f"\n-- path-ordered frame sweep: {steps} steps, {width} columns --")
    s = rng.normal(size=(steps, width, 2, 2, 4)) * 0.1
    s[..., 0, 0, 0] += 1.0
    s[..., 1, 1, 0] += 1.0

    def sweep(backend):
        t = np.zeros((width, 2, 2, 4))
        t[:, 0, 0, 0] = 1.0
        t[:, 1, 1, 0] = 1.0
        for k in range(steps):
            t = backend.mat2_mul(t, s[k])
        return t

    t_np = timeit(lambda: sweep(numpy_backend), repeat)
    t_nb = timeit(lambda: sweep(numba_backend), repeat)
    row("frame sweep", t_np, t_nb)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", default="1e3,1e5,1e6",
                        help="comma-separated batch sizes")
    parser.add_argument("--repeat", type=int, default=7)
    args = parser.parse_args()
    rng = np.random.default_rng(0)

    print("warming up the numba kernels (JIT compile, cached afterwards)")
    warm = rng.normal(size=(8, 4))
    numba_backend.qmul(warm, warm)
    numba_backend.qinv(warm)
    wm = rng.normal(size=(4, 2, 2, 4))
    wv = rng.normal(size=(4, 2, 4))
    numba_backend.mat2_mul(wm, wm)
    numba_backend.mat2_vec(wm, wv)
    numba_backend.mat2_inv(wm)

    for size in args.sizes.split(","):
        bench_size(int(float(size)), args.repeat, rng)
    bench_frame_sweep(steps=40, width=41, repeat=args.repeat, rng=rng)
    bench_frame_sweep(steps=400, width=401, repeat=args.repeat, rng=rng)


if __name__ == "__main__":
    main()
