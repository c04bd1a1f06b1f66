"""Time the numba kernels against their numpy twins.

    python3 benchmarks/bench_kernels.py [--repeat 20] [--size 512]
    python3 benchmarks/bench_kernels.py --suite levelt   # whole suite, both backends

The first numba call (compilation) is excluded from the per-call timings.
"""
import argparse
import os
import subprocess
import sys
import time

import numpy as np

from toda2d import _kernels as K


def inputs(n, rng):
    theta = 2 * np.pi * np.arange(n) / n
    z = np.exp(1j * theta)
    w = z + 0.1 + 0.25 / z + 0.05 * rng.normal(size=n)
    g = np.log(w / z)
    dg = 1.0 / (1j * z * (1 - 0.25 / z ** 2)) - 1.0 / w
    dw = 1j * (z - 0.25 / z)
    x = (rng.normal(size=4 * n) + 1j * rng.normal(size=4 * n)) * 2
    return {
        "phase_increment": (w,),
        "segment_scan": (w.real.copy(), w.imag.copy()),
        "cauchy_boundary": (w, g, dg.astype(complex), dw),
        "ein_series": (x,),
        "stride2_series": (x, 0.3 + 0.1j, 2),
    }


def best_of(fn, args, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        times.append(time.perf_counter() - t0)
    return min(times)


def bench_kernels(size, repeat):
    rng = np.random.default_rng(0)
    args = inputs(size, rng)
    print(f"{'kernel':18s} {'numpy ms':>10s} {'numba ms':>10s} {'speedup':>8s} {'max diff':>10s}")
    for name, a in args.items():
        np_fn, nb_fn = K.NUMPY_KERNELS[name], K.NUMBA_KERNELS[name]
        ref = np_fn(*a)
        t_compile = time.perf_counter()
        out = nb_fn(*a)
        t_compile = time.perf_counter() - t_compile
        diff = float(np.max(np.abs(np.asarray(ref, dtype=complex) - np.asarray(out, dtype=complex))))
        t_np = best_of(np_fn, a, repeat)
        t_nb = best_of(nb_fn, a, repeat)
        print(f"{name:18s} {1e3 * t_np:10.3f} {1e3 * t_nb:10.3f} {t_np / t_nb:8.1f} {diff:10.2e}"
              f"   (first numba call {t_compile:.2f} s)")


def bench_suite(suite, config):
    for label, env in (("numpy", {"TODA_NO_NUMBA": "1"}), ("numba", {"TODA_NO_NUMBA": "0"})):
        t0 = time.perf_counter()
        proc = subprocess.run([sys.executable, "-m", "toda2d", "check", suite, config, "--no-timing"],
                              env={**os.environ, **env}, capture_output=True, text=True)
        dt = time.perf_counter() - t0
        print(f"{suite} [{label}]: exit {proc.returncode}, {dt:.2f} s wall (includes start-up and JIT)")


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--size", type=int, default=512)
    p.add_argument("--repeat", type=int, default=20)
    p.add_argument("--suite")
    p.add_argument("--config", default=os.path.join(os.path.dirname(__file__), "sample.json"))
    args = p.parse_args()
    if not K.HAVE_NUMBA:
        print("numba is not installed; both columns time the numpy kernels")
    if args.suite:
        bench_suite(args.suite, args.config)
    else:
        bench_kernels(args.size, args.repeat)


if __name__ == "__main__":
    main()
