#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy fallbacks.

Run directly:  python3 benchmarks/bench_kernels.py
The numpy-only path can also be forced process-wide with
BLOCKADESIM_PURE_NUMPY=1 (this script always times both implementations).
"""

import time

import numpy as np

from blockadesim import _kernels


def bench(label, fn, *args, repeat=5):
    fn(*args)                      # warm up (JIT compile)
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    print(f"  {label:<18s} {best * 1e3:9.2f} ms")
    return best


def main():
    print(f"numba available and active: {_kernels.HAS_NUMBA}")

    rng = np.random.default_rng(0)
    pos = rng.uniform(0, 10, (30000, 16, 3))
    print("min_pair_kappa, 30000 configs x 16 atoms:")
    t_np = bench("pure numpy", _kernels.min_pair_kappa_numpy, pos, 100.0)
    if _kernels.HAS_NUMBA:
        t_nb = bench("numba njit", _kernels.min_pair_kappa, pos, 100.0)
        print(f"  speedup            {t_np / t_nb:9.1f} x")

    dim = 64
    h = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    h = h + h.conj().T
    w, u = np.linalg.eigh(h)
    phases = np.exp(-1j * w * 1e-3)
    decay = np.exp(-0.5 * rng.uniform(0, 0.05, dim) * 1e-3)
    psi = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    psi /= np.linalg.norm(psi)
    print(f"strang_apply, dim {dim}, 2000 steps:")
    t_np = bench("pure numpy", _kernels.strang_apply_numpy,
                 u, phases, decay, psi, 2000)
    if _kernels.HAS_NUMBA:
        t_nb = bench("numba njit", _kernels.strang_apply,
                     u, phases, decay, psi, 2000)
        print(f"  speedup            {t_np / t_nb:9.1f} x")


if __name__ == "__main__":
    main()
