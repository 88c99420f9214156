"""Hot numeric kernels: numba-jitted with a pure-numpy fallback.

The heavy inner loops of the package live here:

* per-mode log-determinant / resolvent sums over hypercubic Brillouin grids
  (``log_mean_shifted`` / ``inv_mean_shifted``), called many times per
  saddle-point solve;
* nearest-neighbor bilinear sums over Monte Carlo sample batches
  (``neighbor_pair_sum``).

Backend selection: numba is used when importable unless the environment
variable ``QSM_NUMBA`` is set to ``0``/``no``/``false``/``numpy``, in which
case the vectorized numpy implementations are used.  ``BACKEND`` records the
active choice.  The numba sums are Kahan-compensated so both backends agree
to ~1 ulp per element; bitwise reproducibility is guaranteed within a
backend, not across backends.

``benchmarks/bench_kernels.py`` compares the two paths.
"""

from __future__ import annotations

import os

import numpy as np

__all__ = [
    "BACKEND",
    "neighbor_pair_sum",
    "log_mean_shifted",
    "inv_mean_shifted",
    "NUMPY_IMPLS",
    "NUMBA_IMPLS",
]


def _np_log_mean_shifted(values: np.ndarray, shift: float) -> float:
    return float(np.mean(np.log(shift - values)))


def _np_inv_mean_shifted(values: np.ndarray, shift: float) -> float:
    return float(np.mean(1.0 / (shift - values)))


def _np_neighbor_pair_sum(z: np.ndarray, nbr: np.ndarray) -> np.ndarray:
    # z: (nsamples, N); nbr: (N, d) flat index of the +1 neighbor per axis
    out = np.zeros(z.shape[0])
    for axis in range(nbr.shape[1]):
        out += np.einsum("ij,ij->i", z, z[:, nbr[:, axis]])
    return out


NUMPY_IMPLS = {
    "log_mean_shifted": _np_log_mean_shifted,
    "inv_mean_shifted": _np_inv_mean_shifted,
    "neighbor_pair_sum": _np_neighbor_pair_sum,
}

NUMBA_IMPLS = None


def _build_numba_impls():
    from numba import njit

    @njit(cache=True)
    def log_mean_shifted(values, shift):
        total = 0.0
        comp = 0.0  # Kahan compensation
        for i in range(values.shape[0]):
            term = np.log(shift - values[i]) - comp
            t = total + term
            comp = (t - total) - term
            total = t
        return total / values.shape[0]

    @njit(cache=True)
    def inv_mean_shifted(values, shift):
        total = 0.0
        comp = 0.0
        for i in range(values.shape[0]):
            term = 1.0 / (shift - values[i]) - comp
            t = total + term
            comp = (t - total) - term
            total = t
        return total / values.shape[0]

    @njit(cache=True)
    def neighbor_pair_sum(z, nbr):
        nsamp, nsite = z.shape
        ndim = nbr.shape[1]
        out = np.zeros(nsamp)
        for s in range(nsamp):
            acc = 0.0
            for j in range(nsite):
                zj = z[s, j]
                for axis in range(ndim):
                    acc += zj * z[s, nbr[j, axis]]
            out[s] = acc
        return out

    return {
        "log_mean_shifted": log_mean_shifted,
        "inv_mean_shifted": inv_mean_shifted,
        "neighbor_pair_sum": neighbor_pair_sum,
    }


def _want_numba() -> bool:
    flag = os.environ.get("QSM_NUMBA", "").strip().lower()
    return flag not in {"0", "no", "false", "numpy"}


BACKEND = "numpy"
if _want_numba():
    try:
        NUMBA_IMPLS = _build_numba_impls()
        BACKEND = "numba"
    except ImportError:
        NUMBA_IMPLS = None

_active = NUMBA_IMPLS if BACKEND == "numba" else NUMPY_IMPLS

log_mean_shifted = _active["log_mean_shifted"]
inv_mean_shifted = _active["inv_mean_shifted"]
neighbor_pair_sum = _active["neighbor_pair_sum"]
