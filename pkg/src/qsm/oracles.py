"""Independent ground truth at desk scale.

Three method-independent routes against which the analytic modules are
checked:

* dense exact diagonalization of the spin chain (no fermionization, no
  parity bookkeeping -- just the full 2^L x 2^L spectrum);
* the exact finite-N contour integral for the constrained-spin partition
  function, with every normalization factor derived from scratch (adjacency
  matrix built from the actual lattice graph and diagonalized numerically);
* plain Monte Carlo over the uniform measure on the constraint sphere.

The delta-function convention is the genuine Dirac one: integrating
``delta(sum r^2 - N)`` over radii converts to surface measure divided by
``2 sqrt(N)``, so with all couplings off

    Z_N = A_{3N}(sqrt(N)) / (2 sqrt(N)) = pi^{3N/2} N^{3N/2-1} / Gamma(3N/2),

which both oracles reproduce exactly and which pins the additive constant
of the saddle-point free energy.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import kernels
from .exceptions import DimensionCap, DomainError, NonConvergence
from .numerics import QuadratureSpec, RandomStream, RootSpec, find_min_convex, integrate
from .spherical import LatticeSpec, SphericalParams

__all__ = [
    "ChainSpec",
    "MCSpec",
    "ed_free_energy",
    "ed_correlation",
    "contour_partition",
    "sphere_mc_partition",
    "decoupled_log_partition",
]

_ED_CAP = 12


@dataclass(frozen=True)
class ChainSpec:
    """Periodic chain small enough for dense diagonalization (4 <= L <= 12).

    ``B`` of either sign is admitted: the spectrum is B -> -B symmetric and
    the oracle should be able to witness that.
    """

    L: int
    J: float
    B: float
    beta: float
    boundary: str = "periodic"

    def __post_init__(self):
        if self.L > _ED_CAP:
            raise DimensionCap(f"L={self.L} exceeds the dense-ED cap {_ED_CAP}")
        if self.L < 4:
            raise ValueError(f"need L >= 4, got {self.L!r}")
        if self.boundary != "periodic":
            raise ValueError("only periodic chains are supported")
        if not (self.J >= 0 and self.beta > 0):
            raise ValueError("need J >= 0, beta > 0")


@dataclass(frozen=True)
class MCSpec:
    """Monte Carlo budget: total samples, stream, and batch size cap.

    Production estimates want >= 1e4 samples; smaller budgets run anyway
    (with a warning) so that low-sample behavior stays observable, they just
    produce wide error bars.  Batches are shrunk if needed so at least 16
    batch means feed the error bar.
    """

    samples: int
    stream: RandomStream
    batch_size: int = 65536

    def __post_init__(self):
        if self.samples < 1:
            raise ValueError("samples must be positive")
        if self.samples < 10_000:
            warnings.warn(
                f"{self.samples} samples is below the 1e4 floor; error bars will be wide",
                stacklevel=2,
            )
        if self.batch_size < 1:
            raise ValueError("batch_size must be positive")

    def resolve_batches(self) -> tuple[int, int]:
        """(batch size, batch count) actually used; at least 16 batches."""
        size = max(1, min(self.batch_size, -(-self.samples // 16)))
        return size, -(-self.samples // size)


def _chain_hamiltonian(spec: ChainSpec) -> np.ndarray:
    """Dense H = -J sum s^x_n s^x_{n+1} + B sum s^z_n, periodic, bit basis.

    Site n maps to bit n; s^z eigenvalue +1 on a cleared bit.  The x-x bond
    flips the two bits, so it contributes -J on states paired by the flip
    mask.
    """
    L = spec.L
    dim = 1 << L
    states = np.arange(dim)
    bits = (states[:, None] >> np.arange(L)[None, :]) & 1
    diag = spec.B * (L - 2 * bits.sum(axis=1)).astype(float)
    h = np.zeros((dim, dim))
    h[states, states] = diag
    for n in range(L):
        mask = (1 << n) | (1 << ((n + 1) % L))
        h[states ^ mask, states] -= spec.J
    return h


def _log_partition(energies: np.ndarray, beta: float) -> float:
    e0 = energies.min()
    return float(-beta * e0 + np.log(np.sum(np.exp(-beta * (energies - e0)))))


def ed_free_energy(spec: ChainSpec) -> float:
    """Free energy per site from the full dense spectrum."""
    energies = np.linalg.eigvalsh(_chain_hamiltonian(spec))
    return -_log_partition(energies, spec.beta) / (spec.beta * spec.L)


def ed_correlation(spec: ChainSpec, i: int, j: int) -> float:
    """Thermal <s^x_i s^x_j> by full spectral decomposition.

    At fields below the chain's critical point the finite-L ground space is
    a quasi-degenerate doublet, so this is the symmetrized (thermal)
    correlation; a warning reports when the states above the doublet are
    not frozen out (beta * gap < 20).
    """
    if not (0 <= i < j < spec.L):
        raise ValueError(f"need 0 <= i < j < L, got i={i!r}, j={j!r}")
    energies, vectors = np.linalg.eigh(_chain_hamiltonian(spec))
    gap = energies[2] - energies[0]
    if spec.beta * gap < 20.0:
        warnings.warn(
            f"thermal state not ground-dominated: beta*gap = {spec.beta * gap:.3g}",
            stacklevel=2,
        )
    mask = (1 << i) | (1 << j)
    states = np.arange(1 << spec.L)
    diag_in_eigenbasis = np.einsum("sn,sn->n", vectors[states ^ mask, :], vectors)
    weights = np.exp(-spec.beta * (energies - energies.min()))
    return float((weights * diag_in_eigenbasis).sum() / weights.sum())


def _hypercube_adjacency(lattice: LatticeSpec) -> np.ndarray:
    """Adjacency matrix of the periodic hypercube, built from the lattice graph."""
    n = lattice.N
    if n > 4096:
        raise DimensionCap(f"contour oracle caps at 4096 sites, got N={n}")
    adj = np.zeros((n, n))
    sites = np.arange(n)
    coords = np.empty((lattice.d, n), dtype=int)
    rem = sites
    for axis in range(lattice.d):
        coords[axis] = rem % lattice.L
        rem = rem // lattice.L
    strides = lattice.L ** np.arange(lattice.d)
    for axis in range(lattice.d):
        shifted = sites + ((coords[axis] + 1) % lattice.L - coords[axis]) * strides[axis]
        adj[sites, shifted] = 1.0
        adj[shifted, sites] = 1.0
    return adj


def neighbor_table(lattice: LatticeSpec) -> np.ndarray:
    """(N, d) flat indices of each site's +1 neighbor per axis (pairs once)."""
    n = lattice.N
    sites = np.arange(n)
    out = np.empty((n, lattice.d), dtype=np.int64)
    rem = sites
    strides = lattice.L ** np.arange(lattice.d)
    for axis in range(lattice.d):
        coord = rem % lattice.L
        rem = rem // lattice.L
        out[:, axis] = sites + ((coord + 1) % lattice.L - coord) * strides[axis]
    return out


def decoupled_log_partition(n_sites: int) -> float:
    """Closed-form log Z with all couplings off: the surface measure of the
    radius-sqrt(N) sphere in 3N dimensions under the Dirac delta convention,
    log[pi^{3N/2} N^{3N/2-1} / Gamma(3N/2)]."""
    n = n_sites
    return 1.5 * n * math.log(math.pi) + (1.5 * n - 1.0) * math.log(n) - math.lgamma(1.5 * n)


def contour_partition(
    params: SphericalParams,
    lattice: LatticeSpec,
    spec: QuadratureSpec | None = None,
    abscissa: float | None = None,
) -> float:
    """Exact log Z_N by the one-dimensional contour integral.

    All Gaussian integrals are carried with their prefactors:

        Z_N = (pi^{3N/2} / 2 pi) * integral ds  exp(G(a + i s)),
        G(p) = N p + N (beta B)^2/(4 p) + (beta H)^2 q(p)/4
             - N log p - (1/2) sum_m log(p - (beta J / 2) mu_m),

    with ``mu_m`` the numerically diagonalized adjacency spectrum and
    ``q(p) = sum_m o_m^2 / lambda_m`` the ones-vector resolvent.  The
    abscissa defaults to the minimizer of G on the real axis (any abscissa
    right of the spectral edge gives the same answer; that invariance is a
    test).  The tail is bounded analytically and integrated until it is
    below tolerance.
    """
    spec = spec or QuadratureSpec()
    n = lattice.N
    beta = params.beta
    mu, vecs = np.linalg.eigh(_hypercube_adjacency(lattice))
    shifts = 0.5 * beta * params.J * mu  # lambda_m(p) = p - shifts_m
    overlap_sq = vecs.sum(axis=0) ** 2
    edge = shifts.max()
    bb = beta * params.B
    bh = beta * params.H

    def g_real(p: float) -> float:
        lam = p - shifts
        val = n * p + 0.25 * bb * bb * n / p - n * math.log(p)
        val -= 0.5 * float(np.sum(np.log(lam)))
        if bh > 0:
            val += 0.25 * bh * bh * float(np.sum(overlap_sq / lam))
        return val

    def g_real_deriv(p: float) -> float:
        lam = p - shifts
        val = n - 0.25 * bb * bb * n / p**2 - n / p
        val -= 0.5 * float(np.sum(1.0 / lam))
        if bh > 0:
            val -= 0.25 * bh * bh * float(np.sum(overlap_sq / lam**2))
        return val

    if abscissa is None:
        lo = edge + 1.0
        while g_real_deriv(lo) >= 0.0:
            lo = edge + (lo - edge) / 8.0
            if lo - edge < 1e-300:
                raise NonConvergence("no interior minimum right of the spectral edge")
        hi = edge + 1.0
        while g_real_deriv(hi) <= 0.0:
            hi = edge + 2.0 * (hi - edge)
        a = find_min_convex(g_real, (lo, hi), RootSpec(), derivative=g_real_deriv).x_min
    else:
        a = float(abscissa)
        if a <= edge:
            raise DomainError(f"abscissa {a!r} is not right of the spectral edge {edge!r}")

    g_a = g_real(a)

    def shifted_integrand(s: np.ndarray) -> np.ndarray:
        p = a + 1j * np.asarray(s, dtype=float)[:, None]
        gval = n * p[:, 0] + 0.25 * bb * bb * n / p[:, 0] - n * np.log(p[:, 0])
        gval = gval - 0.5 * np.sum(np.log(p - shifts[None, :]), axis=1)
        if bh > 0:
            gval = gval + 0.25 * bh * bh * np.sum(overlap_sq[None, :] / (p - shifts[None, :]), axis=1)
        return np.real(np.exp(gval - g_a))

    # half-line integral; the imaginary part cancels by conjugate symmetry
    width = 1.0 / math.sqrt(max(_g2_estimate(a, shifts, overlap_sq, n, bb, bh), 1e-300))
    t_hi = 10.0 * width
    half, err = integrate(shifted_integrand, 0.0, t_hi, spec)
    # analytic tail bound: |exp(G(a+is) - G(a))| <= (1+s^2/a^2)^{-N/2} (1+s^2/D^2)^{-N/4}
    d_slow = a - shifts.min()
    for _ in range(200):
        tail = (a**n * d_slow ** (0.5 * n)) * t_hi ** (1.0 - 1.5 * n) / (1.5 * n - 1.0)
        if tail <= max(spec.abs_tol, spec.rel_tol * abs(half)):
            break
        piece, perr = integrate(shifted_integrand, t_hi, 2.0 * t_hi, spec)
        half += piece
        err += perr
        t_hi *= 2.0
    else:
        raise NonConvergence("contour tail did not fall below tolerance")

    return 1.5 * n * math.log(math.pi) - math.log(2.0 * math.pi) + g_a + math.log(2.0 * half)


def _g2_estimate(a, shifts, overlap_sq, n, bb, bh) -> float:
    lam = a - shifts
    val = 0.5 * bb * bb * n / a**3 + n / a**2 + 0.5 * float(np.sum(1.0 / lam**2))
    if bh > 0:
        val += 0.5 * bh * bh * float(np.sum(overlap_sq / lam**3))
    return val


def sphere_mc_partition(
    params: SphericalParams,
    lattice: LatticeSpec,
    mc: MCSpec,
    threads: int = 1,
) -> tuple[float, float]:
    """Monte Carlo estimate of log Z_N on the constraint sphere.

    Draws isotropic Gaussian vectors in 3N dimensions, scales them onto the
    radius-sqrt(N) sphere, and averages ``exp(beta J sum_<jk> z_j z_k +
    beta sum_j (B x_j + H z_j))``; the prefactor is the sphere surface
    measure over ``2 sqrt(N)`` (see :func:`decoupled_log_partition`).

    Returns ``(log Z, std_err)`` with the error bar from batch means.
    Batches draw from counter-offset substreams and are reduced in batch
    order, so the estimate is bitwise reproducible for a given
    :class:`MCSpec` regardless of thread count.
    """
    n = lattice.N
    if n > 64:
        raise DimensionCap(f"sphere MC caps at 64 sites, got N={n}")
    nbr = neighbor_table(lattice)
    beta = params.beta
    batch_size, n_batches = mc.resolve_batches()

    def batch_mean(index: int) -> float:
        gen = mc.stream.substream(index)
        g = gen.standard_normal((batch_size, 3 * n))
        g *= math.sqrt(n) / np.linalg.norm(g, axis=1)[:, None]
        x = g[:, :n]
        z = g[:, 2 * n :]
        energy = beta * params.J * kernels.neighbor_pair_sum(z, nbr)
        energy += beta * (params.B * x.sum(axis=1) + params.H * z.sum(axis=1))
        return float(np.exp(energy).mean())

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            means = np.array(list(pool.map(batch_mean, range(n_batches))))
    else:
        means = np.array([batch_mean(b) for b in range(n_batches)])

    mean = means.mean()
    if n_batches > 1:
        std_err_mean = means.std(ddof=1) / math.sqrt(n_batches)
    else:
        std_err_mean = 0.0
    log_z = decoupled_log_partition(n) + math.log(mean)
    return log_z, float(std_err_mean / mean)
