"""Acceptance gate: every release-blocking check with its pinned tolerance.

Each criterion is a standalone callable returning (passed, detail); the CLI
``check`` command and the pytest acceptance module both drive this table.
Tolerances are fixed here, not configurable, so a green run means the same
thing everywhere.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import ising_chain, oracles, spherical, toeplitz
from .numerics import QuadratureSpec, RandomStream, integrate
from .spherical import LatticeSpec, SphericalParams

__all__ = ["CriterionResult", "CRITERIA", "run_all"]


@dataclass(frozen=True)
class CriterionResult:
    name: str
    passed: bool
    detail: str
    runtime_s: float


def _tfim_ground_closed_points() -> tuple[bool, str]:
    f0 = ising_chain.ground_energy(1.0, 0.0)[0]
    f1 = ising_chain.ground_energy(1.0, 1.0)[0]
    e0 = abs(f0 + 1.0)
    e1 = abs(f1 + 4.0 / math.pi)
    ok = e0 <= 1e-12 and e1 <= 1e-10
    return ok, f"|f(1,0)+1|={e0:.2e} (tol 1e-12), |f(1,1)+4/pi|={e1:.2e} (tol 1e-10)"


def _tfim_jb_symmetry() -> tuple[bool, str]:
    values = (0.4, 0.8, 1.2, 1.9, 2.7)
    betas = (0.5, 1.1, 2.3)
    worst = 0.0
    for j in values:
        for b in values:
            for beta in betas:
                fa = ising_chain.free_energy(ising_chain.IsingParams(j, b, beta))[0]
                fb = ising_chain.free_energy(ising_chain.IsingParams(b, j, beta))[0]
                worst = max(worst, abs(fa - fb))
    return worst < 1e-10, f"max |f(J,B)-f(B,J)| = {worst:.2e} over 5x5x3 grid (tol 1e-10)"


def _szego_limit() -> tuple[bool, str]:
    r1 = toeplitz.correlation_determinant(toeplitz.CorrelationQuery(0.6, 20))
    gap = abs(r1.det_value - (1.0 - 0.36) ** 0.25)
    r2 = toeplitz.correlation_determinant(toeplitz.CorrelationQuery(1.2, 64))
    ok = gap < 1e-3 and abs(r2.det_value) < 1e-3
    return ok, (
        f"|D_20(k=0.6)-0.64^(1/4)|={gap:.2e} (tol 1e-3); "
        f"D_64(k=1.2)={r2.det_value:.2e} (tol 1e-3)"
    )


def _aitken(v1: float, v2: float, v3: float) -> float:
    d1, d2 = v2 - v1, v3 - v2
    if d2 == d1:
        return v3
    return v3 - d2 * d2 / (d2 - d1)


def _ed_cross_check() -> tuple[bool, str]:
    f_ed = oracles.ed_free_energy(oracles.ChainSpec(12, 1.0, 0.5, 20.0))
    f_chain = ising_chain.ground_energy(1.0, 0.5)[0]
    gap_f = abs(f_ed - f_chain)
    corr = [
        oracles.ed_correlation(oracles.ChainSpec(L, 1.0, 0.6, 50.0), 0, 2)
        for L in (8, 10, 12)
    ]
    extrapolated = _aitken(*corr)
    det = toeplitz.correlation_determinant(toeplitz.CorrelationQuery(0.6, 2)).det_value
    gap_c = abs(extrapolated - det)
    ok = gap_f < 5e-3 and gap_c < 1e-2
    return ok, (
        f"|f_ED(L=12)-f_gs|={gap_f:.2e} (tol 5e-3); "
        f"|corr_ED(extrap)-D_2|={gap_c:.2e} (tol 1e-2)"
    )


def _spherical_feq() -> tuple[bool, str]:
    worst = 0.0
    for d in (1, 2, 3):
        for j in (0.5, 1.0, 2.0):
            for ratio in (0.0, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0):
                b = ratio * 2.0 * j * d
                exact = -(j * d + b * b / (4.0 * j * d)) if b <= 2.0 * j * d else -b
                got = spherical.ground_energy_h_extrapolated(j, b, d)
                worst = max(worst, abs(got - exact))
    # continuity and slope continuity across the branch point
    worst_cont = 0.0
    worst_slope = 0.0
    for d in (1, 2, 3):
        for j in (0.5, 1.0, 2.0):
            bc = 2.0 * j * d
            f = lambda b: spherical.ground_energy_h_extrapolated(j, b, d)
            worst_cont = max(worst_cont, abs(f(bc) + 2.0 * j * d))
            delta = 0.25 * j * d
            left = (3 * f(bc) - 4 * f(bc - delta) + f(bc - 2 * delta)) / (2 * delta)
            right = (-3 * f(bc) + 4 * f(bc + delta) - f(bc + 2 * delta)) / (2 * delta)
            worst_slope = max(worst_slope, abs(left - right))
    ok = worst < 1e-6 and worst_cont < 1e-5 and worst_slope < 1e-5
    return ok, (
        f"max ground-energy err {worst:.2e} (tol 1e-6); branch continuity "
        f"{worst_cont:.2e}, slope mismatch {worst_slope:.2e} (tol 1e-5)"
    )


def _saddle_limit() -> tuple[bool, str]:
    sol = spherical.solve_saddle(SphericalParams(J=1.0, B=4.0, H=0.0, d=1, beta=1e3))
    gap = abs((sol.w0 + 1.0) - 2.0)
    return gap < 1e-3, f"|u0 - B/2J| = {gap:.2e} at beta=1e3 (tol 1e-3)"


def _susceptibility_equality() -> tuple[bool, str]:
    worst_chain = max(
        abs(ising_chain.susceptibility_at_zero_field(j) - 1.0 / (2.0 * j))
        for j in (0.5, 1.0, 2.0)
    )
    worst_sph = max(
        abs(spherical.susceptibility_at_zero_field(j, d) - 1.0 / (2.0 * j * d))
        for j, d in ((1.0, 1), (1.0, 3), (2.0, 2))
    )
    cross = abs(
        ising_chain.susceptibility_at_zero_field(1.0)
        - spherical.susceptibility_at_zero_field(1.0, 1)
    )
    ok = worst_chain < 1e-4 and worst_sph < 1e-6 and cross < 1e-4
    return ok, (
        f"chain dev {worst_chain:.2e} (tol 1e-4); spherical dev {worst_sph:.2e} "
        f"(tol 1e-6); chain-vs-spherical at (J=1,d=1) {cross:.2e} (tol 1e-4)"
    )


def _oracle_consistency() -> tuple[bool, str]:
    lat = LatticeSpec(1, 4)
    ref = SphericalParams(J=1.0, B=1.0, H=0.5, d=1, beta=0.5)
    lz_contour = oracles.contour_partition(ref, lat)
    lz_mc, err = oracles.sphere_mc_partition(
        ref, lat, oracles.MCSpec(10**6, RandomStream(20250810))
    )
    sigmas = abs(lz_mc - lz_contour) / err
    # abscissa invariance: integrate along 1.5x the default saddle abscissa
    sol = spherical.solve_saddle(ref, lat)
    base = ref.beta * ref.J * (sol.w0 + ref.d)
    shift_gap = abs(
        oracles.contour_partition(ref, lat, abscissa=1.5 * base) - lz_contour
    )
    # decoupled closed form, both oracles
    free = SphericalParams(J=0.0, B=0.0, H=0.0, d=1, beta=1.0)
    closed = oracles.decoupled_log_partition(lat.N)
    tight = QuadratureSpec(abs_tol=1e-14, rel_tol=1e-12)
    gap_contour = abs(oracles.contour_partition(free, lat, tight) - closed)
    gap_mc = abs(
        oracles.sphere_mc_partition(free, lat, oracles.MCSpec(10**4, RandomStream(1)))[0]
        - closed
    )
    ok = sigmas < 3.0 and shift_gap < 1e-8 and gap_contour < 1e-10 and gap_mc < 1e-10
    return ok, (
        f"MC vs contour: {sigmas:.2f} sigma (tol 3); abscissa shift {shift_gap:.2e} "
        f"(tol 1e-8); decoupled closed form: contour {gap_contour:.2e}, "
        f"MC {gap_mc:.2e} (tol 1e-10)"
    )


def _finite_beta_approach() -> tuple[bool, str]:
    fs = [
        spherical.free_energy_finite_beta(
            SphericalParams(J=1.0, B=5.0, H=0.0, d=1, beta=beta)
        ).value
        for beta in (10.0, 20.0, 40.0)
    ]
    monotone = fs[0] > fs[1] > fs[2] > -5.0
    gap_sph = abs(fs[2] + 5.0)
    f20 = ising_chain.free_energy(ising_chain.IsingParams(1.0, 0.5, 20.0))[0]
    gap_tfim = abs(f20 - ising_chain.ground_energy(1.0, 0.5)[0])
    ok = monotone and gap_sph < 0.2 and gap_tfim < 1e-6
    return ok, (
        f"f(beta)={fs[0]:.4f},{fs[1]:.4f},{fs[2]:.4f} monotone={monotone}, "
        f"|f(40)+5|={gap_sph:.3f} (tol 0.2); TFIM |f(20)-f_gs|={gap_tfim:.2e} (tol 1e-6)"
    )


def _property_suites() -> tuple[bool, str]:
    failures = []

    # quadrature linearity on random polynomials
    for trial in range(100):
        rng = RandomStream(2024, trial).generator()
        ca = rng.uniform(-1, 1, size=rng.integers(2, 7))
        cb = rng.uniform(-1, 1, size=rng.integers(2, 7))
        alpha, gamma = rng.uniform(-2, 2, size=2)
        fa = np.polynomial.Polynomial(ca)
        fb = np.polynomial.Polynomial(cb)
        combined = integrate(lambda x: alpha * fa(x) + gamma * fb(x), 0.0, 2.0)[0]
        split = alpha * integrate(fa, 0.0, 2.0)[0] + gamma * integrate(fb, 0.0, 2.0)[0]
        if abs(combined - split) > 10 * QuadratureSpec().abs_tol:
            failures.append(f"linearity trial {trial}: {abs(combined - split):.2e}")

    # strict convexity of the saddle exponent at random valid parameters
    for trial in range(100):
        rng = RandomStream(777, trial).generator()
        params = SphericalParams(
            J=float(rng.uniform(0.3, 3.0)),
            B=float(rng.uniform(0.0, 3.0)),
            H=float(rng.uniform(0.0, 1.0)),
            d=int(rng.integers(1, 3)),
            beta=float(rng.uniform(0.1, 20.0)),
        )
        lattice = None
        if rng.uniform() < 0.5:
            lattice = LatticeSpec(params.d, int(rng.integers(3, 9)))
        for w in (0.1, 0.5, 1.0, 5.0):
            h = 1e-3 * w
            second = (
                spherical.saddle_exponent(params, w + h, lattice)
                - 2.0 * spherical.saddle_exponent(params, w, lattice)
                + spherical.saddle_exponent(params, w - h, lattice)
            )
            if not second > 0.0:
                failures.append(f"convexity trial {trial}: d2F<=0 at w={w}")

    # Toeplitz determinants decrease with separation for 0 < k < 1
    for trial in range(100):
        rng = RandomStream(31337, trial).generator()
        k = float(rng.uniform(0.05, 0.95))
        coeffs = toeplitz.symbol_fourier_coefficients(k, 11)
        full = _toeplitz_matrix(coeffs[11:], coeffs[11::-1])
        prev = None
        for n in range(1, 13):
            det = float(np.linalg.det(full[:n, :n]))
            if prev is not None and det > prev + 1e-10:
                failures.append(f"monotonicity trial {trial}: D_{n} rose at k={k:.3f}")
            prev = det

    # random-stream determinism
    for trial in range(100):
        seeds = RandomStream(99, trial).generator().integers(0, 2**63, size=2)
        s = RandomStream(int(seeds[0]), int(seeds[1]))
        a = s.generator().standard_normal(64)
        b = s.generator().standard_normal(64)
        if not np.array_equal(a, b):
            failures.append(f"stream trial {trial}: draws differ")
        c = s.substream(5).standard_normal(8)
        s.substream(2).standard_normal(8)  # interleave another batch
        d = s.substream(5).standard_normal(8)
        if not np.array_equal(c, d):
            failures.append(f"stream trial {trial}: substream order-dependent")

    ok = not failures
    head = "; ".join(failures[:3])
    return ok, "400 randomized trials, zero failures" if ok else f"{len(failures)} failures: {head}"


def _toeplitz_matrix(col: np.ndarray, row: np.ndarray) -> np.ndarray:
    import scipy.linalg

    return scipy.linalg.toeplitz(col, row)


CRITERIA: list[tuple[str, Callable[[], tuple[bool, str]]]] = [
    ("1-tfim-ground-closed-points", _tfim_ground_closed_points),
    ("2-tfim-jb-symmetry", _tfim_jb_symmetry),
    ("3-szego-limit", _szego_limit),
    ("4-ed-cross-check", _ed_cross_check),
    ("5-spherical-ground-energy", _spherical_feq),
    ("6-saddle-limit", _saddle_limit),
    ("7-susceptibility-equality", _susceptibility_equality),
    ("8-oracle-consistency", _oracle_consistency),
    ("9-finite-beta-approach", _finite_beta_approach),
    ("10-property-suites", _property_suites),
]


def run_all(name_filter: str | None = None, printer=print) -> list[CriterionResult]:
    """Run (optionally filtered) criteria, printing one pass/fail line each."""
    results = []
    for name, func in CRITERIA:
        if name_filter and name_filter not in name:
            continue
        start = time.perf_counter()
        try:
            passed, detail = func()
        except Exception as exc:  # an erroring criterion is a failing criterion
            passed, detail = False, f"raised {type(exc).__name__}: {exc}"
        elapsed = time.perf_counter() - start
        results.append(CriterionResult(name, passed, detail, elapsed))
        printer(f"{'PASS' if passed else 'FAIL'}  {name}  ({elapsed:.1f}s)  {detail}")
    return results
