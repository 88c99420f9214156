#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy fallback.

Times the three hot kernels on realistic shapes:

* mode-table log/resolvent sums at d=3, L=64 (one saddle-solve inner step);
* neighbor bilinear sums on a full Monte Carlo batch at N=64.

Run as ``python benchmarks/bench_kernels.py``.  The active production
backend is whatever ``qsm.kernels.BACKEND`` reports (set ``QSM_NUMBA=0``
to force the numpy path package-wide).
"""

import time

import numpy as np

from qsm import kernels
from qsm.oracles import neighbor_table
from qsm.spherical import LatticeSpec, _mode_cos_sums


def best_of(func, *args, repeats=5):
    times = []
    for _ in range(repeats):
        start = time.perf_counter()
        result = func(*args)
        times.append(time.perf_counter() - start)
    return min(times), result


def compare(name, args):
    np_impl = kernels.NUMPY_IMPLS[name]
    t_np, ref = best_of(np_impl, *args)
    line = f"{name:22s} numpy {t_np * 1e3:8.2f} ms"
    if kernels.NUMBA_IMPLS is not None:
        nb_impl = kernels.NUMBA_IMPLS[name]
        nb_impl(*args)  # trigger JIT outside the timed region
        t_nb, got = best_of(nb_impl, *args)
        assert np.allclose(ref, got, rtol=1e-10, atol=1e-12)
        line += f"   numba {t_nb * 1e3:8.2f} ms   speedup x{t_np / t_nb:5.2f}"
    else:
        line += "   (numba unavailable)"
    print(line)


def main():
    print(f"active backend: {kernels.BACKEND}")

    sums = _mode_cos_sums(64, 3)  # 262144 modes
    print(f"mode table: d=3, L=64, {sums.size} modes, shift w + d = 3.25")
    compare("log_mean_shifted", (sums, 3.25))
    compare("inv_mean_shifted", (sums, 3.25))

    lattice = LatticeSpec(1, 64)
    nbr = neighbor_table(lattice)
    rng = np.random.default_rng(0)
    z = rng.standard_normal((65536, lattice.N))
    print(f"MC batch: {z.shape[0]} samples, N={lattice.N}")
    compare("neighbor_pair_sum", (z, nbr))


if __name__ == "__main__":
    main()
